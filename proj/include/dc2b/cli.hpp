#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dc2b/data_io.hpp"
#include "dc2b/evaluation.hpp"
#include "dc2b/policies.hpp"

namespace dc2b::cli {

enum class Command { prepare, train_embeddings, replay, sweep, regret, compare };

std::string_view to_string(Command command);

/// Bad command line or config file. `exit_code` is 2 for usage errors and 0
/// when the "error" is a help request (message holds the help text).
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string message, int exit_code = 2) : std::runtime_error(std::move(message)), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

struct RunConfig {
  Command command = Command::replay;

  // dataset
  std::string dataset = "ml100k";  // ml100k | ml1m | anime | clustered
  std::filesystem::path data_dir = "data/ml-100k";
  std::optional<int> threshold;
  double train_ratio = 0.8;
  std::size_t max_users = 0;  // 0 = every test user

  // embeddings
  std::optional<std::filesystem::path> embeddings;
  data::BprOptions bpr{};

  // policies
  policies::PolicyConfig policy{};
  std::vector<policies::PolicyKind> compare_policies = {
      policies::PolicyKind::log_rank, policies::PolicyKind::mmr, policies::PolicyKind::eps_greedy,
      policies::PolicyKind::dpp_map, policies::PolicyKind::dc2b};
  std::size_t trials = 5;

  // sweep
  eval::SweepParameter sweep_parameter = eval::SweepParameter::alpha;
  std::vector<double> sweep_values = {0.01, 0.1, 1, 3, 5, 10, 100};

  // regret
  eval::RegretPolicy regret_policy = eval::RegretPolicy::dc2b;
  eval::SyntheticEnvSpec env{};
  std::size_t regret_slate_size = 3;  // --slate-size overrides it for the regret command
  std::size_t horizon = 2000;
  std::size_t episodes = 20;
  bool approx_oracle = false;

  Seed seed = 42;
  std::filesystem::path out = "out";
  unsigned threads = 0;
  std::optional<std::filesystem::path> config_file;

  /// Checks cross-field constraints and file existence. Throws UsageError.
  void validate() const;
  nlohmann::json to_json() const;
};

/// argv[0] is skipped. CLI flags override config-file values, which override
/// defaults. Throws UsageError.
RunConfig parse_config(const std::vector<std::string>& argv);

/// Executes the command, writing artifacts under config.out. Returns the
/// process exit code; errors go to `err` and partial outputs are removed.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

/// parse_config + run with usage errors mapped to exit code 2.
int main_entry(const std::vector<std::string>& argv, std::ostream& log, std::ostream& err);

/// Published dataset statistics used to report ingestion deviations.
struct ReferenceStats {
  std::size_t users;
  std::size_t items;
  std::size_t interactions;
  double density;
};
std::optional<ReferenceStats> reference_stats(data::DatasetFormat format);

}  // namespace dc2b::cli
