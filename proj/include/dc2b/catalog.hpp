#pragma once

#include <span>
#include <string>
#include <vector>

#include "dc2b/common.hpp"

namespace dc2b {

using CategorySet = std::vector<int>;  // sorted, unique

/// The ground set of arms: raw ids, unit-norm feature rows and category sets.
/// Immutable once constructed; shared read-only between simulations.
class ItemCatalog {
 public:
  ItemCatalog() = default;

  /// Rows of `features` are L2-normalized here; a zero row is rejected.
  /// `categories` may be empty (no metadata) or must have one entry per row.
  ItemCatalog(std::vector<RawId> raw_ids, RowMatrix features,
              std::vector<CategorySet> categories = {});

  std::size_t size() const noexcept { return raw_ids_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  bool empty() const noexcept { return raw_ids_.empty(); }

  const RowMatrix& features() const noexcept { return features_; }
  auto feature(ItemId i) const { return features_.row(static_cast<Eigen::Index>(i)); }

  RawId raw_id(ItemId i) const { return raw_ids_.at(i); }
  const std::vector<RawId>& raw_ids() const noexcept { return raw_ids_; }

  bool has_categories() const noexcept { return !categories_.empty(); }
  const CategorySet& categories(ItemId i) const { return categories_.at(i); }

  /// Throws InputError when any id is out of range.
  void check_ids(std::span<const ItemId> ids) const;

 private:
  std::vector<RawId> raw_ids_;
  RowMatrix features_;
  std::vector<CategorySet> categories_;
};

}  // namespace dc2b
