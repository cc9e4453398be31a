#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dc2b/catalog.hpp"
#include "dc2b/common.hpp"

namespace dc2b::data {

enum class DatasetFormat { ml100k, ml1m, anime };

std::string_view to_string(DatasetFormat format);
DatasetFormat parse_dataset_format(std::string_view name);
/// The threshold used for each dataset by default: 3 for MovieLens, 6 for Anime.
int default_threshold(DatasetFormat format);

struct Interaction {
  RawId user = 0;
  RawId item = 0;
  int rating = 0;
  std::optional<std::int64_t> timestamp;

  bool operator==(const Interaction&) const = default;
};

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  std::size_t categories = 0;
  double density = 0.0;
  /// Rating rows seen, before any filtering.
  std::size_t raw_ratings = 0;
  /// Positive rows whose item is missing from the item file.
  std::size_t unknown_items = 0;
  /// Anime rows with rating −1 (watched, not scored).
  std::size_t unscored = 0;
};

/// Thresholded positives and the category metadata of the retained items.
struct Dataset {
  DatasetFormat format = DatasetFormat::ml100k;
  int threshold = 3;
  std::vector<Interaction> positives;
  std::vector<RawId> users;               // sorted, each with ≥ 1 positive
  std::vector<RawId> items;               // sorted, each with ≥ 1 positive
  std::map<RawId, CategorySet> categories;  // for every retained item
  DatasetStats stats;

  /// Positive item ids grouped by user.
  std::map<RawId, std::vector<RawId>> positives_by_user() const;
};

/// Reads the standard files of `format` from `dir`:
///   ml100k: u.data + u.item;  ml1m: ratings.dat + movies.dat;  anime: rating.csv + anime.csv
Dataset load_dataset(const std::filesystem::path& dir, DatasetFormat format, int threshold);
Dataset load_dataset_files(const std::filesystem::path& ratings, const std::filesystem::path& item_meta,
                           DatasetFormat format, int threshold);

struct SplitSpec {
  std::vector<RawId> train_users;  // sorted
  std::vector<RawId> test_users;   // sorted
  Seed seed = 0;
};

/// Seeded shuffle, then the first floor(ratio·n) users train.
SplitSpec split_users(std::vector<RawId> users, double ratio, Seed seed);

struct BprOptions {
  int dim = 10;
  int epochs = 30;
  double learning_rate = 0.05;
  double regularization = 0.01;
  double holdout_fraction = 0.05;
  Seed seed = 42;
};

struct BprModel {
  std::vector<RawId> item_ids;  // row order of item_factors
  std::vector<RawId> user_ids;  // row order of user_factors
  RowMatrix item_factors;
  RowMatrix user_factors;
  Vector mean_user;
  double auc = 0.5;
  /// False when the holdout was empty and AUC was measured on training pairs.
  bool auc_on_holdout = true;
};

/// SGD on sampled (user, positive, negative) triples maximizing
/// log σ(u·(x_pos − x_neg)) with L2 regularization. Negatives are drawn from
/// `item_universe`, which must contain every positive item.
BprModel train_bpr_embeddings(const std::vector<Interaction>& train, const std::vector<RawId>& item_universe,
                              const BprOptions& options);

/// Item-id keyed embedding rows as stored on disk (not normalized).
struct EmbeddingTable {
  std::vector<RawId> ids;
  RowMatrix values;
};

/// TSV rows "item_id\tv1\t...\tvd", written with round-trip precision.
void save_embeddings(const std::filesystem::path& path, const std::vector<RawId>& ids, const RowMatrix& values);
/// Parses and validates (consistent d, finite, non-zero rows).
EmbeddingTable load_embeddings(const std::filesystem::path& path);

void save_vector(const std::filesystem::path& path, const Vector& v);
Vector load_vector(const std::filesystem::path& path);

void save_interactions(const std::filesystem::path& path, const std::vector<Interaction>& rows);
std::vector<Interaction> load_interactions(const std::filesystem::path& path);

void save_split(const std::filesystem::path& path, const SplitSpec& split);
SplitSpec load_split(const std::filesystem::path& path);

/// Catalog over `dataset.items` in id order with features looked up in `table`.
ItemCatalog build_catalog(const Dataset& dataset, const EmbeddingTable& table);
ItemCatalog build_catalog(const Dataset& dataset, const BprModel& model);

/// |A∩B| / |A∪B| over sorted sets. An empty side is degenerate: returns 0
/// and bumps degenerate_similarity_count().
double jaccard_similarity(const CategorySet& a, const CategorySet& b);
std::size_t degenerate_similarity_count() noexcept;

/// 64-bit FNV-1a over file bytes (0 for a missing file).
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace dc2b::data
