#pragma once

#include <span>
#include <string>
#include <vector>

#include "confreg/error.hpp"

namespace confreg {

// Dense row-major feature matrix.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return dim_ == 0 ? 0 : values_.size() / dim_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
  }

  void push_back(std::span<const double> row) {
    if (row.size() != dim_) {
      throw InputError("row has " + std::to_string(row.size()) + " features, table expects " +
                       std::to_string(dim_));
    }
    values_.insert(values_.end(), row.begin(), row.end());
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

// Numeric view of one split: features, gold labels and the identifiers the
// metrics and soft-target files are keyed by.
struct TrainingSet {
  FeatureTable x;
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;
  std::vector<std::string> subsets;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
};

}  // namespace confreg
