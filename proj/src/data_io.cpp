#include "dc2b/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace dc2b::data {
namespace fs = std::filesystem;
namespace {

std::atomic<std::size_t> g_degenerate_similarity{0};

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

[[noreturn]] void malformed(const fs::path& path, std::size_t line, const std::string& why) {
  throw InputError(path.string() + ":" + std::to_string(line) + ": " + why);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

// RFC-4180-ish: commas inside double quotes do not split; "" is a literal quote.
std::vector<std::string> split_csv(std::string_view s) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (quoted) {
      if (ch == '"' && i + 1 < s.size() && s[i + 1] == '"') {
        out.back().push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back().push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back().push_back(ch);
    }
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

struct RatingScale {
  int min;
  int max;
};

RatingScale scale_of(DatasetFormat format) {
  return format == DatasetFormat::anime ? RatingScale{1, 10} : RatingScale{1, 5};
}

struct RawRating {
  RawId user;
  RawId item;
  int rating;
  std::optional<std::int64_t> timestamp;
};

struct ParsedRatings {
  std::vector<RawRating> rows;
  std::size_t unscored = 0;
};

ParsedRatings read_ratings(const fs::path& path, DatasetFormat format) {
  auto in = open_input(path);
  const RatingScale scale = scale_of(format);
  ParsedRatings parsed;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    std::vector<std::string> fields;
    switch (format) {
      case DatasetFormat::ml100k: {
        for (auto f : split(view, "\t")) fields.emplace_back(f);
        break;
      }
      case DatasetFormat::ml1m: {
        for (auto f : split(view, "::")) fields.emplace_back(f);
        break;
      }
      case DatasetFormat::anime: {
        fields = split_csv(view);
        if (lineno == 1 && !fields.empty() && trim(fields[0]) == "user_id") continue;
        break;
      }
    }
    const std::size_t expected = format == DatasetFormat::anime ? 3 : 4;
    if (fields.size() != expected) {
      malformed(path, lineno, "expected " + std::to_string(expected) + " fields, found " +
                                  std::to_string(fields.size()));
    }
    RawRating row{};
    if (!parse_number(fields[0], row.user) || !parse_number(fields[1], row.item) ||
        !parse_number(fields[2], row.rating)) {
      malformed(path, lineno, "non-numeric user, item or rating");
    }
    if (expected == 4) {
      std::int64_t ts = 0;
      if (!parse_number(fields[3], ts)) malformed(path, lineno, "non-numeric timestamp");
      row.timestamp = ts;
    }
    if (format == DatasetFormat::anime && row.rating == -1) {
      ++parsed.unscored;
      continue;
    }
    if (row.rating < scale.min || row.rating > scale.max) {
      malformed(path, lineno, "rating " + std::to_string(row.rating) + " outside [" +
                                  std::to_string(scale.min) + ", " + std::to_string(scale.max) + "]");
    }
    parsed.rows.push_back(row);
  }
  return parsed;
}

struct ItemMeta {
  std::map<RawId, CategorySet> categories;
  std::size_t category_count = 0;
};

ItemMeta read_item_meta(const fs::path& path, DatasetFormat format) {
  auto in = open_input(path);
  ItemMeta meta;
  std::map<std::string, int> names;
  auto name_id = [&](std::string_view name) {
    auto [it, inserted] = names.emplace(std::string(name), static_cast<int>(names.size()));
    return it->second;
  };
  std::string line;
  std::size_t lineno = 0;
  constexpr std::size_t kMl100kGenres = 19;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    RawId id = 0;
    CategorySet cats;
    switch (format) {
      case DatasetFormat::ml100k: {
        const auto fields = split(view, "|");
        if (fields.size() < 5 + kMl100kGenres) malformed(path, lineno, "expected 24 pipe-separated fields");
        if (!parse_number(fields[0], id)) malformed(path, lineno, "non-numeric item id");
        const std::size_t first = fields.size() - kMl100kGenres;
        for (std::size_t g = 0; g < kMl100kGenres; ++g) {
          const auto flag = trim(fields[first + g]);
          if (flag == "1") {
            cats.push_back(static_cast<int>(g));
          } else if (flag != "0") {
            malformed(path, lineno, "genre flag must be 0 or 1");
          }
        }
        meta.category_count = kMl100kGenres;
        break;
      }
      case DatasetFormat::ml1m: {
        const auto fields = split(view, "::");
        if (fields.size() != 3) malformed(path, lineno, "expected 3 '::'-separated fields");
        if (!parse_number(fields[0], id)) malformed(path, lineno, "non-numeric item id");
        for (auto g : split(trim(fields[2]), "|")) {
          if (!trim(g).empty()) cats.push_back(name_id(trim(g)));
        }
        break;
      }
      case DatasetFormat::anime: {
        const auto fields = split_csv(view);
        if (lineno == 1 && !fields.empty() && trim(fields[0]) == "anime_id") continue;
        if (fields.size() < 3) malformed(path, lineno, "expected at least 3 CSV fields");
        if (!parse_number(fields[0], id)) malformed(path, lineno, "non-numeric anime id");
        for (auto g : split(fields[2], ",")) {
          if (!trim(g).empty()) cats.push_back(name_id(trim(g)));
        }
        break;
      }
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    meta.categories[id] = std::move(cats);
  }
  if (format != DatasetFormat::ml100k) meta.category_count = names.size();
  return meta;
}

}  // namespace

std::string_view to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::ml100k: return "ml100k";
    case DatasetFormat::ml1m: return "ml1m";
    case DatasetFormat::anime: return "anime";
  }
  return "unknown";
}

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "ml100k" || name == "ml-100k") return DatasetFormat::ml100k;
  if (name == "ml1m" || name == "ml-1m") return DatasetFormat::ml1m;
  if (name == "anime") return DatasetFormat::anime;
  throw InputError("unknown dataset format '" + std::string(name) + "'");
}

int default_threshold(DatasetFormat format) { return format == DatasetFormat::anime ? 6 : 3; }

std::map<RawId, std::vector<RawId>> Dataset::positives_by_user() const {
  std::map<RawId, std::vector<RawId>> grouped;
  for (const auto& row : positives) grouped[row.user].push_back(row.item);
  for (auto& [user, items] : grouped) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  return grouped;
}

Dataset load_dataset(const fs::path& dir, DatasetFormat format, int threshold) {
  switch (format) {
    case DatasetFormat::ml100k: return load_dataset_files(dir / "u.data", dir / "u.item", format, threshold);
    case DatasetFormat::ml1m: return load_dataset_files(dir / "ratings.dat", dir / "movies.dat", format, threshold);
    case DatasetFormat::anime: return load_dataset_files(dir / "rating.csv", dir / "anime.csv", format, threshold);
  }
  throw InputError("unknown dataset format");
}

Dataset load_dataset_files(const fs::path& ratings, const fs::path& item_meta, DatasetFormat format,
                           int threshold) {
  const ItemMeta meta = read_item_meta(item_meta, format);
  const ParsedRatings parsed = read_ratings(ratings, format);

  Dataset ds;
  ds.format = format;
  ds.threshold = threshold;
  ds.stats.raw_ratings = parsed.rows.size() + parsed.unscored;
  ds.stats.unscored = parsed.unscored;
  std::set<RawId> users;
  std::set<RawId> items;
  for (const auto& row : parsed.rows) {
    if (row.rating <= threshold) continue;
    if (!meta.categories.contains(row.item)) {
      ++ds.stats.unknown_items;
      continue;
    }
    ds.positives.push_back({row.user, row.item, row.rating, row.timestamp});
    users.insert(row.user);
    items.insert(row.item);
  }
  ds.users.assign(users.begin(), users.end());
  ds.items.assign(items.begin(), items.end());
  for (RawId id : ds.items) ds.categories[id] = meta.categories.at(id);

  ds.stats.users = ds.users.size();
  ds.stats.items = ds.items.size();
  ds.stats.interactions = ds.positives.size();
  ds.stats.categories = meta.category_count;
  ds.stats.density = ds.users.empty() || ds.items.empty()
                         ? 0.0
                         : static_cast<double>(ds.positives.size()) /
                               (static_cast<double>(ds.users.size()) * static_cast<double>(ds.items.size()));
  return ds;
}

SplitSpec split_users(std::vector<RawId> users, double ratio, Seed seed) {
  if (users.size() < 2) throw InputError("split_users needs at least 2 users");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("split ratio must lie in (0, 1)");
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  std::mt19937_64 rng(seed);
  std::shuffle(users.begin(), users.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(users.size())));
  SplitSpec spec;
  spec.seed = seed;
  spec.train_users.assign(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(n_train));
  spec.test_users.assign(users.begin() + static_cast<std::ptrdiff_t>(n_train), users.end());
  std::sort(spec.train_users.begin(), spec.train_users.end());
  std::sort(spec.test_users.begin(), spec.test_users.end());
  return spec;
}

BprModel train_bpr_embeddings(const std::vector<Interaction>& train, const std::vector<RawId>& item_universe,
                              const BprOptions& options) {
  if (options.dim <= 0) throw InputError("embedding dimension must be positive");
  if (train.empty()) throw InputError("BPR training data is empty");
  if (item_universe.size() < 2) throw InputError("BPR needs at least 2 items");
  if (options.epochs < 0 || !(options.learning_rate > 0.0) || options.regularization < 0.0) {
    throw InputError("invalid BPR hyperparameters");
  }

  BprModel model;
  model.item_ids = item_universe;
  std::sort(model.item_ids.begin(), model.item_ids.end());
  model.item_ids.erase(std::unique(model.item_ids.begin(), model.item_ids.end()), model.item_ids.end());
  std::unordered_map<RawId, std::size_t> item_row;
  for (std::size_t r = 0; r < model.item_ids.size(); ++r) item_row[model.item_ids[r]] = r;

  std::set<RawId> user_set;
  for (const auto& row : train) user_set.insert(row.user);
  model.user_ids.assign(user_set.begin(), user_set.end());
  std::unordered_map<RawId, std::size_t> user_row;
  for (std::size_t r = 0; r < model.user_ids.size(); ++r) user_row[model.user_ids[r]] = r;

  // Deduplicated (user, item) pairs in a fixed order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& row : train) {
    auto it = item_row.find(row.item);
    if (it == item_row.end()) {
      throw InputError("BPR: item " + std::to_string(row.item) + " is not in the item universe");
    }
    pairs.emplace_back(user_row.at(row.user), it->second);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::mt19937_64 rng(options.seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto n_hold = static_cast<std::size_t>(options.holdout_fraction * static_cast<double>(pairs.size()));
  std::vector<std::pair<std::size_t, std::size_t>> holdout(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::pair<std::size_t, std::size_t>> fit(pairs.begin() + static_cast<std::ptrdiff_t>(n_hold), pairs.end());
  if (fit.empty()) {
    fit = holdout;
    holdout.clear();
  }

  // Every known positive (including held-out ones) is excluded from negatives.
  std::vector<std::unordered_set<std::size_t>> positives(model.user_ids.size());
  for (const auto& [u, i] : pairs) positives[u].insert(i);

  const auto d = static_cast<Eigen::Index>(options.dim);
  const auto n_items = model.item_ids.size();
  std::normal_distribution<double> init(0.0, 0.1);
  model.user_factors.resize(static_cast<Eigen::Index>(model.user_ids.size()), d);
  model.item_factors.resize(static_cast<Eigen::Index>(n_items), d);
  for (Eigen::Index r = 0; r < model.user_factors.rows(); ++r)
    for (Eigen::Index c = 0; c < d; ++c) model.user_factors(r, c) = init(rng);
  for (Eigen::Index r = 0; r < model.item_factors.rows(); ++r)
    for (Eigen::Index c = 0; c < d; ++c) model.item_factors(r, c) = init(rng);

  std::uniform_int_distribution<std::size_t> pick_pair(0, fit.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_item(0, n_items - 1);
  auto sample_negative = [&](std::size_t u) -> std::optional<std::size_t> {
    if (positives[u].size() >= n_items) return std::nullopt;
    while (true) {
      const std::size_t j = pick_item(rng);
      if (!positives[u].contains(j)) return j;
    }
  };

  const double lr = options.learning_rate;
  const double reg = options.regularization;
  Eigen::RowVectorXd diff(d);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t step = 0; step < fit.size(); ++step) {
      const auto [u, i] = fit[pick_pair(rng)];
      const auto neg = sample_negative(u);
      if (!neg) continue;
      const auto ur = static_cast<Eigen::Index>(u);
      const auto ir = static_cast<Eigen::Index>(i);
      const auto jr = static_cast<Eigen::Index>(*neg);
      diff = model.item_factors.row(ir) - model.item_factors.row(jr);
      const Eigen::RowVectorXd user = model.user_factors.row(ur);
      const double g = sigmoid(-user.dot(diff));
      model.user_factors.row(ur) += lr * (g * diff - reg * user);
      model.item_factors.row(ir) += lr * (g * user - reg * model.item_factors.row(ir));
      model.item_factors.row(jr) += lr * (-g * user - reg * model.item_factors.row(jr));
    }
  }

  model.mean_user = model.user_factors.colwise().mean().transpose();

  // AUC: each evaluation pair against 20 sampled negatives.
  model.auc_on_holdout = !holdout.empty();
  const auto& eval = holdout.empty() ? fit : holdout;
  std::mt19937_64 eval_rng(derive_seed(options.seed, 0xa0c));
  std::uniform_int_distribution<std::size_t> eval_item(0, n_items - 1);
  double wins = 0.0;
  double total = 0.0;
  for (const auto& [u, i] : eval) {
    if (positives[u].size() >= n_items) continue;
    const auto user = model.user_factors.row(static_cast<Eigen::Index>(u));
    const double pos_score = user.dot(model.item_factors.row(static_cast<Eigen::Index>(i)));
    for (int k = 0; k < 20; ++k) {
      std::size_t j;
      do {
        j = eval_item(eval_rng);
      } while (positives[u].contains(j));
      const double neg_score = user.dot(model.item_factors.row(static_cast<Eigen::Index>(j)));
      wins += pos_score > neg_score ? 1.0 : (pos_score == neg_score ? 0.5 : 0.0);
      total += 1.0;
    }
  }
  model.auc = total > 0.0 ? wins / total : 0.5;
  return model;
}

void save_embeddings(const fs::path& path, const std::vector<RawId>& ids, const RowMatrix& values) {
  if (static_cast<std::size_t>(values.rows()) != ids.size()) {
    throw InputError("save_embeddings: id count does not match row count");
  }
  auto out = open_output(path);
  char buf[32];
  for (std::size_t r = 0; r < ids.size(); ++r) {
    out << ids[r];
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values(static_cast<Eigen::Index>(r), c));
      out << '\t' << buf;
    }
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

EmbeddingTable load_embeddings(const fs::path& path) {
  auto in = open_input(path);
  std::vector<RawId> ids;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  std::set<RawId> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view, "\t");
    if (fields.size() < 2) malformed(path, lineno, "expected item id and at least one value");
    RawId id = 0;
    if (!parse_number(fields[0], id)) malformed(path, lineno, "non-numeric item id");
    if (!seen.insert(id).second) malformed(path, lineno, "duplicate item id " + std::to_string(id));
    std::vector<double> row(fields.size() - 1);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!parse_number(fields[c + 1], row[c]) || !std::isfinite(row[c])) {
        malformed(path, lineno, "non-numeric or non-finite value");
      }
    }
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      malformed(path, lineno, "row has dimension " + std::to_string(row.size()) + ", expected " +
                                  std::to_string(dim));
    }
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      malformed(path, lineno, "item " + std::to_string(id) + " is all zeros and cannot be normalized");
    }
    ids.push_back(id);
    rows.push_back(std::move(row));
  }
  EmbeddingTable table;
  table.ids = std::move(ids);
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < dim; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

void save_vector(const fs::path& path, const Vector& v) {
  auto out = open_output(path);
  char buf[32];
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", v(k));
    out << (k ? "\t" : "") << buf;
  }
  out << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

Vector load_vector(const fs::path& path) {
  auto in = open_input(path);
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  for (auto f : split(trim(line), "\t")) {
    double v = 0.0;
    if (!parse_number(f, v)) malformed(path, 1, "non-numeric value");
    values.push_back(v);
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void save_interactions(const fs::path& path, const std::vector<Interaction>& rows) {
  auto out = open_output(path);
  for (const auto& row : rows) {
    out << row.user << '\t' << row.item << '\t' << row.rating;
    if (row.timestamp) out << '\t' << *row.timestamp;
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

std::vector<Interaction> load_interactions(const fs::path& path) {
  auto in = open_input(path);
  std::vector<Interaction> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view, "\t");
    if (fields.size() != 3 && fields.size() != 4) malformed(path, lineno, "expected 3 or 4 fields");
    Interaction row;
    if (!parse_number(fields[0], row.user) || !parse_number(fields[1], row.item) ||
        !parse_number(fields[2], row.rating)) {
      malformed(path, lineno, "non-numeric field");
    }
    if (fields.size() == 4) {
      std::int64_t ts = 0;
      if (!parse_number(fields[3], ts)) malformed(path, lineno, "non-numeric timestamp");
      row.timestamp = ts;
    }
    rows.push_back(row);
  }
  return rows;
}

void save_split(const fs::path& path, const SplitSpec& split) {
  auto out = open_output(path);
  out << "# seed\t" << split.seed << '\n';
  for (RawId u : split.train_users) out << u << "\ttrain\n";
  for (RawId u : split.test_users) out << u << "\ttest\n";
  if (!out) throw InputError("failed writing " + path.string());
}

SplitSpec load_split(const fs::path& path) {
  auto in = open_input(path);
  SplitSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view, "\t");
    if (fields.size() != 2) malformed(path, lineno, "expected 2 fields");
    if (trim(fields[0]) == "# seed") {
      if (!parse_number(fields[1], spec.seed)) malformed(path, lineno, "bad seed");
      continue;
    }
    RawId user = 0;
    if (!parse_number(fields[0], user)) malformed(path, lineno, "non-numeric user id");
    const auto role = trim(fields[1]);
    if (role == "train") {
      spec.train_users.push_back(user);
    } else if (role == "test") {
      spec.test_users.push_back(user);
    } else {
      malformed(path, lineno, "role must be train or test");
    }
  }
  std::sort(spec.train_users.begin(), spec.train_users.end());
  std::sort(spec.test_users.begin(), spec.test_users.end());
  return spec;
}

ItemCatalog build_catalog(const Dataset& dataset, const EmbeddingTable& table) {
  std::unordered_map<RawId, Eigen::Index> row_of;
  for (std::size_t r = 0; r < table.ids.size(); ++r) row_of[table.ids[r]] = static_cast<Eigen::Index>(r);
  RowMatrix features(static_cast<Eigen::Index>(dataset.items.size()), table.values.cols());
  std::vector<CategorySet> cats;
  cats.reserve(dataset.items.size());
  for (std::size_t r = 0; r < dataset.items.size(); ++r) {
    const RawId id = dataset.items[r];
    auto it = row_of.find(id);
    if (it == row_of.end()) throw InputError("no embedding for item " + std::to_string(id));
    features.row(static_cast<Eigen::Index>(r)) = table.values.row(it->second);
    cats.push_back(dataset.categories.at(id));
  }
  return ItemCatalog(dataset.items, std::move(features), std::move(cats));
}

ItemCatalog build_catalog(const Dataset& dataset, const BprModel& model) {
  return build_catalog(dataset, EmbeddingTable{model.item_ids, model.item_factors});
}

double jaccard_similarity(const CategorySet& a, const CategorySet& b) {
  if (a.empty() || b.empty()) {
    g_degenerate_similarity.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::size_t degenerate_similarity_count() noexcept { return g_degenerate_similarity.load(); }

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace dc2b::data
