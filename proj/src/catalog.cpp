#include "dc2b/catalog.hpp"

#include <algorithm>
#include <string>

namespace dc2b {

ItemCatalog::ItemCatalog(std::vector<RawId> raw_ids, RowMatrix features,
                         std::vector<CategorySet> categories)
    : raw_ids_(std::move(raw_ids)), features_(std::move(features)), categories_(std::move(categories)) {
  if (static_cast<std::size_t>(features_.rows()) != raw_ids_.size()) {
    throw InputError("catalog: " + std::to_string(raw_ids_.size()) + " ids but " +
                     std::to_string(features_.rows()) + " feature rows");
  }
  if (!categories_.empty() && categories_.size() != raw_ids_.size()) {
    throw InputError("catalog: category list length does not match item count");
  }
  for (Eigen::Index i = 0; i < features_.rows(); ++i) {
    const double norm = features_.row(i).norm();
    if (!std::isfinite(norm) || norm == 0.0) {
      throw InputError("catalog: feature row " + std::to_string(i) + " (item " +
                       std::to_string(raw_ids_[static_cast<std::size_t>(i)]) +
                       ") has zero or non-finite norm");
    }
    features_.row(i) /= norm;
  }
  for (auto& cats : categories_) {
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  }
}

void ItemCatalog::check_ids(std::span<const ItemId> ids) const {
  for (ItemId id : ids) {
    if (id >= size()) {
      throw InputError("item id " + std::to_string(id) + " out of range (catalog size " +
                       std::to_string(size()) + ")");
    }
  }
}

}  // namespace dc2b
