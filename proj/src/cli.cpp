#include "dc2b/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#ifndef DC2B_GIT_DESCRIBE
#define DC2B_GIT_DESCRIBE "unknown"
#endif

namespace dc2b::cli {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kSplitStream = 0x5011;
constexpr std::uint64_t kBprStream = 0xb9c;
constexpr std::uint64_t kPolicyStream = 0x9011;
constexpr std::uint64_t kScenarioStream = 0xc1a5;

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Tracks written artifacts so a failed run can remove them.
class ArtifactSet {
 public:
  explicit ArtifactSet(fs::path dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& contents) {
    const fs::path p = path(name);
    created_.push_back(p);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << contents;
    out.close();
    if (!out) throw InputError("failed writing " + p.string());
  }

  void adopt(const std::string& name) { created_.push_back(path(name)); }

  /// Re-reads a CSV and checks it has a header plus rows of equal width.
  void validate_csv(const std::string& name, std::size_t min_rows) const {
    std::ifstream in(path(name));
    std::string line;
    if (!std::getline(in, line)) throw InputError(name + " is empty");
    const auto width = std::count(line.begin(), line.end(), ',');
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (std::count(line.begin(), line.end(), ',') != width) throw InputError(name + " has ragged rows");
      ++rows;
    }
    if (rows < min_rows) throw InputError(name + " has too few rows");
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& p : created_) out.push_back(p.filename().string());
    return out;
  }

  void remove_all() noexcept {
    std::error_code ec;
    for (const auto& p : created_) fs::remove(p, ec);
    created_.clear();
  }

 private:
  fs::path dir_;
  std::vector<fs::path> created_;
};

struct PreparedData {
  data::Dataset dataset;
  data::SplitSpec split;
  data::BprModel model;  // item/user factors only when trained in-process
  bool trained = false;
  std::optional<fs::path> embeddings_source;
  ItemCatalog catalog;
  Vector mean_user;
  std::vector<eval::UserPositives> test_users;
};

data::DatasetFormat format_of(const RunConfig& cfg) { return data::parse_dataset_format(cfg.dataset); }

int threshold_of(const RunConfig& cfg) {
  return cfg.threshold.value_or(data::default_threshold(format_of(cfg)));
}

data::Dataset load(const RunConfig& cfg) { return data::load_dataset(cfg.data_dir, format_of(cfg), threshold_of(cfg)); }

data::SplitSpec split_of(const RunConfig& cfg, const data::Dataset& ds) {
  return data::split_users(ds.users, cfg.train_ratio, derive_seed(cfg.seed, kSplitStream));
}

data::BprModel train(const RunConfig& cfg, const data::Dataset& ds, const data::SplitSpec& split) {
  std::vector<data::Interaction> train_rows;
  for (const auto& row : ds.positives) {
    if (std::binary_search(split.train_users.begin(), split.train_users.end(), row.user)) train_rows.push_back(row);
  }
  data::BprOptions opts = cfg.bpr;
  opts.seed = derive_seed(cfg.seed, kBprStream);
  return data::train_bpr_embeddings(train_rows, ds.items, opts);
}

std::vector<eval::UserPositives> test_positives(const data::Dataset& ds, const data::SplitSpec& split,
                                                std::size_t max_users) {
  const auto grouped = ds.positives_by_user();
  std::vector<eval::UserPositives> users;
  for (RawId u : split.test_users) {
    if (max_users && users.size() >= max_users) break;
    eval::UserPositives up;
    up.user_id = u;
    auto it = grouped.find(u);
    if (it != grouped.end()) {
      for (RawId item : it->second) {
        auto pos = std::lower_bound(ds.items.begin(), ds.items.end(), item);
        up.positives.push_back(static_cast<ItemId>(pos - ds.items.begin()));
      }
    }
    users.push_back(std::move(up));
  }
  return users;
}

PreparedData prepare_data(const RunConfig& cfg, std::ostream& log) {
  PreparedData p;
  p.dataset = load(cfg);
  if (p.dataset.users.size() < 2) throw InputError("dataset has fewer than 2 users after thresholding");
  p.split = split_of(cfg, p.dataset);

  std::optional<fs::path> source = cfg.embeddings;
  if (!source && fs::exists(cfg.out / "embeddings.tsv") && fs::exists(cfg.out / "mean_user.tsv")) {
    source = cfg.out / "embeddings.tsv";
  }
  if (source) {
    const auto table = data::load_embeddings(*source);
    p.catalog = data::build_catalog(p.dataset, table);
    const fs::path mean_path = source->parent_path() / "mean_user.tsv";
    if (!fs::exists(mean_path)) throw InputError("missing " + mean_path.string() + " next to the embeddings");
    p.mean_user = data::load_vector(mean_path);
    p.embeddings_source = source;
    log << "loaded embeddings from " << source->string() << "\n";
  } else {
    p.model = train(cfg, p.dataset, p.split);
    p.trained = true;
    p.catalog = data::build_catalog(p.dataset, p.model);
    p.mean_user = p.model.mean_user;
    log << "trained BPR embeddings (AUC " << p.model.auc << ")\n";
  }
  if (p.catalog.dim() != static_cast<std::size_t>(p.mean_user.size())) {
    throw InputError("mean user embedding dimension does not match item embeddings");
  }
  p.test_users = test_positives(p.dataset, p.split, cfg.max_users);
  return p;
}

nlohmann::json stats_json(const data::DatasetStats& s) {
  return {{"users", s.users},
          {"items", s.items},
          {"interactions", s.interactions},
          {"categories", s.categories},
          {"density", s.density},
          {"raw_ratings", s.raw_ratings},
          {"unknown_items_skipped", s.unknown_items},
          {"unscored_discarded", s.unscored}};
}

nlohmann::json deviation_json(const data::Dataset& ds) {
  const auto ref = reference_stats(ds.format);
  if (!ref) return nullptr;
  auto rel = [](double got, double want) { return want == 0.0 ? 0.0 : (got - want) / want; };
  const bool exact = ds.stats.users == ref->users && ds.stats.items == ref->items &&
                     ds.stats.interactions == ref->interactions;
  return {{"reference", {{"users", ref->users}, {"items", ref->items}, {"interactions", ref->interactions},
                         {"density", ref->density}}},
          {"exact_match", exact},
          {"relative_deviation",
           {{"users", rel(double(ds.stats.users), double(ref->users))},
            {"items", rel(double(ds.stats.items), double(ref->items))},
            {"interactions", rel(double(ds.stats.interactions), double(ref->interactions))},
            {"density", rel(ds.stats.density, ref->density)}}}};
}

nlohmann::json dataset_json(const RunConfig& cfg) {
  nlohmann::json j = {{"format", cfg.dataset}, {"dir", cfg.data_dir.string()}};
  if (cfg.dataset == "clustered") return j;
  nlohmann::json files = nlohmann::json::object();
  for (const auto& entry : {"u.data", "u.item", "ratings.dat", "movies.dat", "rating.csv", "anime.csv"}) {
    const fs::path p = cfg.data_dir / entry;
    if (fs::exists(p)) files[entry] = hex(data::file_hash(p));
  }
  j["fnv1a64"] = files;
  return j;
}

eval::ClusteredScenario clustered(const RunConfig& cfg) {
  return eval::make_clustered_scenario(eval::ClusteredSpec{}, derive_seed(cfg.seed, kScenarioStream));
}

policies::PolicyConfig policy_for(const RunConfig& cfg, policies::PolicyKind kind) {
  policies::PolicyConfig p = cfg.policy;
  p.kind = kind;
  p.seed = derive_seed(cfg.seed, kPolicyStream);
  return p;
}

eval::ReplayOptions replay_options(const RunConfig& cfg) {
  eval::ReplayOptions o;
  o.trials = cfg.trials;
  o.threads = cfg.threads;
  return o;
}

template <typename Fn>
void with_inputs(const RunConfig& cfg, std::ostream& log, nlohmann::json& manifest, Fn&& fn) {
  if (cfg.dataset == "clustered") {
    const auto scenario = clustered(cfg);
    manifest["inputs"] = {{"items", scenario.items.size()}, {"test_users", scenario.users.size()}};
    fn(scenario.inputs());
    return;
  }
  PreparedData p = prepare_data(cfg, log);
  manifest["stats"] = stats_json(p.dataset.stats);
  manifest["inputs"] = {{"items", p.catalog.size()},
                        {"train_users", p.split.train_users.size()},
                        {"test_users", p.test_users.size()},
                        {"embeddings", p.embeddings_source ? p.embeddings_source->string() : "trained in-process"}};
  if (p.trained) manifest["inputs"]["bpr_auc"] = p.model.auc;
  eval::ReplayInputs inputs{&p.catalog, p.mean_user, p.test_users};
  fn(inputs);
}

void run_command(const RunConfig& cfg, ArtifactSet& out, nlohmann::json& manifest, std::ostream& log) {
  switch (cfg.command) {
    case Command::prepare: {
      const auto ds = load(cfg);
      const auto split = split_of(cfg, ds);
      data::save_interactions(out.path("positives.tsv"), ds.positives);
      out.adopt("positives.tsv");
      data::save_split(out.path("split.tsv"), split);
      out.adopt("split.tsv");
      manifest["stats"] = stats_json(ds.stats);
      manifest["reference_deviation"] = deviation_json(ds);
      manifest["split"] = {{"train_users", split.train_users.size()}, {"test_users", split.test_users.size()}};
      if (data::load_interactions(out.path("positives.tsv")).size() != ds.positives.size()) {
        throw InputError("positives.tsv failed validation");
      }
      log << "users " << ds.stats.users << ", items " << ds.stats.items << ", interactions "
          << ds.stats.interactions << ", density " << ds.stats.density << "\n";
      return;
    }
    case Command::train_embeddings: {
      const auto ds = load(cfg);
      const auto split = split_of(cfg, ds);
      const auto model = train(cfg, ds, split);
      data::save_embeddings(out.path("embeddings.tsv"), model.item_ids, model.item_factors);
      out.adopt("embeddings.tsv");
      data::save_vector(out.path("mean_user.tsv"), model.mean_user);
      out.adopt("mean_user.tsv");
      if (data::load_embeddings(out.path("embeddings.tsv")).ids.size() != model.item_ids.size()) {
        throw InputError("embeddings.tsv failed validation");
      }
      manifest["bpr"] = {{"auc", model.auc}, {"auc_on_holdout", model.auc_on_holdout}, {"items", model.item_ids.size()}};
      log << "BPR AUC " << model.auc << "\n";
      return;
    }
    case Command::replay: {
      with_inputs(cfg, log, manifest, [&](const eval::ReplayInputs& inputs) {
        const auto report = eval::evaluate_policy(inputs, policy_for(cfg, cfg.policy.kind), replay_options(cfg));
        std::ostringstream csv;
        const eval::MetricsReport reports[] = {report};
        eval::write_metrics_csv(csv, reports);
        out.write("metrics.csv", csv.str());
        out.validate_csv("metrics.csv", 1);
        manifest["truncated_sessions"] = report.truncated_sessions;
      });
      return;
    }
    case Command::compare: {
      with_inputs(cfg, log, manifest, [&](const eval::ReplayInputs& inputs) {
        std::vector<eval::MetricsReport> reports;
        for (auto kind : cfg.compare_policies) {
          reports.push_back(eval::evaluate_policy(inputs, policy_for(cfg, kind), replay_options(cfg)));
          log << reports.back().policy << ": F " << reports.back().f_measure << "\n";
        }
        std::ostringstream csv;
        eval::write_compare_csv(csv, reports);
        out.write("compare.csv", csv.str());
        out.validate_csv("compare.csv", reports.size());
      });
      return;
    }
    case Command::sweep: {
      with_inputs(cfg, log, manifest, [&](const eval::ReplayInputs& inputs) {
        const auto rows = eval::sweep(cfg.sweep_parameter, cfg.sweep_values, inputs,
                                      policy_for(cfg, policies::PolicyKind::dc2b), replay_options(cfg));
        std::ostringstream csv;
        eval::write_sweep_csv(csv, cfg.sweep_parameter, rows);
        out.write("sweep.csv", csv.str());
        out.validate_csv("sweep.csv", rows.size());
      });
      return;
    }
    case Command::regret: {
      eval::RegretOptions opts;
      opts.policy = cfg.regret_policy;
      opts.slate_size = cfg.regret_slate_size;
      opts.horizon = cfg.horizon;
      opts.episodes = cfg.episodes;
      opts.approx_oracle = cfg.approx_oracle;
      opts.lambda_prior = cfg.policy.lambda_prior;
      opts.seed = cfg.seed;
      opts.threads = cfg.threads;
      const auto curve = eval::simulate_regret(cfg.env, opts);
      std::ostringstream csv;
      eval::write_regret_csv(csv, curve);
      out.write("regret.csv", csv.str());
      out.validate_csv("regret.csv", cfg.horizon);
      manifest["regret"] = {{"final", curve.cumulative.back()},
                            {"min_term", curve.min_term},
                            {"approx_oracle", curve.approx_oracle}};
      return;
    }
  }
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::prepare: return "prepare";
    case Command::train_embeddings: return "train-embeddings";
    case Command::replay: return "replay";
    case Command::sweep: return "sweep";
    case Command::regret: return "regret";
    case Command::compare: return "compare";
  }
  return "unknown";
}

std::optional<ReferenceStats> reference_stats(data::DatasetFormat format) {
  switch (format) {
    case data::DatasetFormat::ml100k: return ReferenceStats{942, 1447, 55375, 0.0406};
    case data::DatasetFormat::ml1m: return ReferenceStats{6038, 3533, 575281, 0.0270};
    case data::DatasetFormat::anime: return ReferenceStats{69400, 8825, 5231117, 0.0085};
  }
  return std::nullopt;
}

void RunConfig::validate() const {
  try {
    policy.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (dataset != "clustered") {
    try {
      (void)data::parse_dataset_format(dataset);
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  }
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw UsageError("--train-ratio must lie in (0, 1)");
  if (trials == 0) throw UsageError("--trials must be positive");
  if (bpr.dim <= 0) throw UsageError("--dim must be positive");
  if (command == Command::regret) {
    if (env.items > dpp::kExhaustiveCap && !approx_oracle) {
      throw UsageError("--items " + std::to_string(env.items) + " exceeds the exhaustive oracle cap of " +
                       std::to_string(dpp::kExhaustiveCap) + "; add --approx-oracle");
    }
    if (!(env.alpha > 0.0)) throw UsageError("--env-alpha must be positive");
  }
  const bool needs_data = command != Command::regret && dataset != "clustered";
  if (needs_data && !fs::is_directory(data_dir)) {
    throw UsageError("data directory '" + data_dir.string() + "' does not exist");
  }
  if (embeddings && !fs::exists(*embeddings)) {
    throw UsageError("embeddings file '" + embeddings->string() + "' does not exist");
  }
  if (command == Command::sweep && sweep_values.empty()) throw UsageError("--values must not be empty");
}

nlohmann::json RunConfig::to_json() const {
  std::vector<std::string> compare_names;
  for (auto k : compare_policies) compare_names.emplace_back(policies::to_string(k));
  nlohmann::json j = {
      {"command", cli::to_string(command)},
      {"dataset", dataset},
      {"data_dir", data_dir.string()},
      {"threshold", threshold ? nlohmann::json(*threshold) : nlohmann::json(nullptr)},
      {"train_ratio", train_ratio},
      {"max_users", max_users},
      {"embeddings", embeddings ? nlohmann::json(embeddings->string()) : nlohmann::json(nullptr)},
      {"bpr", {{"dim", bpr.dim}, {"epochs", bpr.epochs}, {"lr", bpr.learning_rate}, {"reg", bpr.regularization}}},
      {"policy",
       {{"kind", policies::to_string(policy.kind)},
        {"alpha", policy.alpha},
        {"lambda", policy.lambda_prior},
        {"prior_mean_scale", policy.prior_mean_scale},
        {"mmr_alpha", policy.mmr_alpha},
        {"epsilon", policy.epsilon},
        {"dpp_theta", policy.dpp_map_theta},
        {"slate_size", policy.slate_size},
        {"vb_tol", policy.update.tol},
        {"vb_max_iter", policy.update.max_iter}}},
      {"compare_policies", compare_names},
      {"trials", trials},
      {"sweep", {{"parameter", eval::to_string(sweep_parameter)}, {"values", sweep_values}}},
      {"regret",
       {{"policy", eval::to_string(regret_policy)},
        {"dim", env.dim},
        {"items", env.items},
        {"slate_size", regret_slate_size},
        {"env_alpha", env.alpha},
        {"noise_sigma", env.noise_sigma},
        {"horizon", horizon},
        {"episodes", episodes},
        {"approx_oracle", approx_oracle}}},
      {"seed", seed},
      {"out", out.string()},
  };
  return j;
}

RunConfig parse_config(const std::vector<std::string>& argv) {
  RunConfig cfg;
  CLI::App app{"DC2B diversified contextual combinatorial bandit simulator", "dc2b"};
  app.set_config("--config", "", "flat key=value config file (keys are flag names)");
  app.allow_config_extras(false);

  std::string command;
  app.add_option("command", command, "prepare | train-embeddings | replay | sweep | regret | compare")
      ->required()
      ->check(CLI::IsMember({"prepare", "train-embeddings", "replay", "sweep", "regret", "compare"}));

  std::string data_dir = cfg.data_dir.string();
  std::string out = cfg.out.string();
  std::string embeddings;
  int threshold = -1;
  std::string policy = "dc2b";
  std::string policies_list;
  std::string sweep_param = "alpha";
  std::string values_list;
  std::string regret_policy = "dc2b";

  app.add_option("--dataset", cfg.dataset, "ml100k | ml1m | anime | clustered")
      ->check(CLI::IsMember({"ml100k", "ml1m", "anime", "clustered"}));
  app.add_option("--data-dir", data_dir, "directory holding the dataset files");
  app.add_option("--threshold", threshold, "ratings above this are positive (default 3, anime 6)");
  app.add_option("--train-ratio", cfg.train_ratio, "fraction of users used for training");
  app.add_option("--max-users", cfg.max_users, "cap on evaluated test users (0 = all)");
  app.add_option("--embeddings", embeddings, "item embedding TSV; mean_user.tsv must sit beside it");
  app.add_option("--dim", cfg.bpr.dim, "embedding dimension")->check(CLI::PositiveNumber);
  app.add_option("--epochs", cfg.bpr.epochs, "BPR epochs")->check(CLI::NonNegativeNumber);
  app.add_option("--bpr-lr", cfg.bpr.learning_rate, "BPR learning rate")->check(CLI::PositiveNumber);
  app.add_option("--bpr-reg", cfg.bpr.regularization, "BPR L2 regularization")->check(CLI::NonNegativeNumber);

  app.add_option("--policy", policy, "dc2b | log_rank | mmr | eps_greedy | dpp_map");
  app.add_option("--policies", policies_list, "comma list of policies for compare");
  app.add_option("--alpha", cfg.policy.alpha, "DC2B quality exponent")->check(CLI::PositiveNumber);
  app.add_option("--lambda", cfg.policy.lambda_prior, "prior covariance scale")->check(CLI::PositiveNumber);
  app.add_option("--slate-size", cfg.policy.slate_size, "items per slate K")->check(CLI::PositiveNumber);
  app.add_option("--trials", cfg.trials, "trials per test user")->check(CLI::PositiveNumber);
  app.add_option("--epsilon", cfg.policy.epsilon, "epsilon-greedy exploration rate")->check(CLI::Range(0.0, 1.0));
  app.add_option("--prior-mean-scale", cfg.policy.prior_mean_scale, "DC2B prior mean as a multiple of the mean user (0 = zero mean)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--mmr-alpha", cfg.policy.mmr_alpha, "MMR relevance weight")->check(CLI::Range(0.0, 1.0));
  app.add_option("--dpp-theta", cfg.policy.dpp_map_theta, "DPP-map quality weight")->check(CLI::Range(0.0, 1.0));
  app.add_option("--vb-tol", cfg.policy.update.tol, "variational convergence tolerance")->check(CLI::PositiveNumber);
  app.add_option("--vb-max-iter", cfg.policy.update.max_iter, "variational iteration cap")->check(CLI::PositiveNumber);

  app.add_option("--sweep-param", sweep_param, "alpha | slate_size")->check(CLI::IsMember({"alpha", "slate_size"}));
  app.add_option("--values", values_list, "comma list of sweep values");

  app.add_option("--regret-policy", regret_policy, "dc2b | random | oracle")
      ->check(CLI::IsMember({"dc2b", "random", "oracle"}));
  app.add_option("--env-dim", cfg.env.dim, "synthetic feature dimension")->check(CLI::PositiveNumber);
  app.add_option("--items", cfg.env.items, "synthetic catalog size")->check(CLI::PositiveNumber);
  app.add_option("--env-alpha", cfg.env.alpha, "quality exponent of the synthetic reward")->check(CLI::PositiveNumber);
  app.add_option("--noise", cfg.env.noise_sigma, "reward noise sigma")->check(CLI::NonNegativeNumber);
  app.add_option("--horizon", cfg.horizon, "trials per regret episode")->check(CLI::PositiveNumber);
  app.add_option("--episodes", cfg.episodes, "regret episodes")->check(CLI::PositiveNumber);
  app.add_flag("--approx-oracle", cfg.approx_oracle, "greedy per-trial optimum above the exhaustive cap");

  app.add_option("--seed", cfg.seed, "global seed");
  app.add_option("--threads", cfg.threads, "worker threads (0 = $DC2B_THREADS or all cores)");
  app.add_option("--out", out, "output directory");

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), 0);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (command == "prepare") cfg.command = Command::prepare;
  else if (command == "train-embeddings") cfg.command = Command::train_embeddings;
  else if (command == "replay") cfg.command = Command::replay;
  else if (command == "sweep") cfg.command = Command::sweep;
  else if (command == "regret") cfg.command = Command::regret;
  else cfg.command = Command::compare;

  cfg.data_dir = data_dir;
  cfg.out = out;
  if (!embeddings.empty()) cfg.embeddings = fs::path(embeddings);
  if (threshold >= 0) cfg.threshold = threshold;
  if (cfg.command == Command::regret && app.get_option("--slate-size")->count() > 0) {
    cfg.regret_slate_size = cfg.policy.slate_size;
  }
  if (auto* opt = app.get_option("--config"); opt && opt->count() > 0) cfg.config_file = opt->as<std::string>();
  try {
    cfg.policy.kind = policies::parse_policy_kind(policy);
    if (!policies_list.empty()) {
      cfg.compare_policies.clear();
      for (const auto& name : split_list(policies_list)) cfg.compare_policies.push_back(policies::parse_policy_kind(name));
    }
    cfg.sweep_parameter = eval::parse_sweep_parameter(sweep_param);
    if (!values_list.empty()) {
      cfg.sweep_values.clear();
      for (const auto& v : split_list(values_list)) cfg.sweep_values.push_back(std::stod(v));
    } else if (cfg.sweep_parameter == eval::SweepParameter::slate_size) {
      cfg.sweep_values = {5, 10};
    }
    cfg.regret_policy = eval::parse_regret_policy(regret_policy);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  } catch (const std::logic_error& e) {
    throw UsageError(std::string("bad numeric list: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  ArtifactSet artifacts(config.out);
  try {
    fs::create_directories(config.out);
    const auto started = std::chrono::steady_clock::now();
    nlohmann::json manifest = {{"config", config.to_json()},
                               {"seeds",
                                {{"global", config.seed},
                                 {"split", derive_seed(config.seed, kSplitStream)},
                                 {"bpr", derive_seed(config.seed, kBprStream)},
                                 {"policy", derive_seed(config.seed, kPolicyStream)}}},
                               {"dataset", dataset_json(config)},
                               {"git_describe", DC2B_GIT_DESCRIBE}};
    run_command(config, artifacts, manifest, log);
    manifest["outputs"] = artifacts.names();
    manifest["degenerate_similarities"] = data::degenerate_similarity_count();
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log << to_string(config.command) << " finished in " << elapsed << " s\n";
    const std::string manifest_name = std::string(to_string(config.command)) + "_manifest.json";
    artifacts.write(manifest_name, manifest.dump(2) + "\n");
    if (!nlohmann::json::parse(std::ifstream(artifacts.path(manifest_name))).is_object()) throw InputError("manifest failed validation");
    return 0;
  } catch (const std::exception& e) {
    artifacts.remove_all();
    err << "dc2b " << to_string(config.command) << ": " << e.what() << "\n";
    return 1;
  }
}

int main_entry(const std::vector<std::string>& argv, std::ostream& log, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(argv);
  } catch (const UsageError& e) {
    (e.exit_code() == 0 ? log : err) << e.what() << (e.exit_code() == 0 ? "" : "\n");
    return e.exit_code();
  }
  return run(cfg, log, err);
}

}  // namespace dc2b::cli
