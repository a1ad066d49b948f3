#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace glmebic {

class Family;

/// Response vector and an n x p covariate matrix stored column-major, so each
/// feature is a contiguous span (the access pattern of screening and
/// forward selection).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> y, std::vector<double> x_column_major, std::size_t p,
          std::vector<std::string> feature_names = {});

  std::size_t n() const noexcept { return y_.size(); }
  std::size_t p() const noexcept { return p_; }

  std::span<const double> y() const noexcept { return y_; }
  std::span<const double> column(std::size_t j) const noexcept {
    return {x_.data() + j * n(), n()};
  }
  double x(std::size_t row, std::size_t col) const noexcept { return x_[col * n() + row]; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  /// Throws DataError naming the first offending row when a response is
  /// outside the family's support.
  void validate_response(const Family& family) const;

  Dataset subset_rows(std::span<const std::size_t> rows) const;
  Dataset subset_columns(std::span<const std::size_t> cols) const;

  double mean_response() const noexcept;

 private:
  std::vector<double> y_;
  std::vector<double> x_;
  std::size_t p_ = 0;
  std::vector<std::string> names_;
};

/// Header row required, first column named `y`, all remaining columns are
/// covariates. Empty or non-numeric fields (including NA) are rejected with a
/// DataError that names the row and column.
Dataset read_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text, const std::string& source = "<memory>");
void write_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace glmebic
