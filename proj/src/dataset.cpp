#include "glmebic/dataset.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "glmebic/error.hpp"
#include "glmebic/links.hpp"

namespace glmebic {

Dataset::Dataset(std::vector<double> y, std::vector<double> x_column_major, std::size_t p,
                 std::vector<std::string> feature_names)
    : y_(std::move(y)), x_(std::move(x_column_major)), p_(p), names_(std::move(feature_names)) {
  if (y_.size() < 2) throw Error(ErrorCode::DataError, "need at least two observations");
  if (p_ < 1) throw Error(ErrorCode::DataError, "need at least one covariate");
  if (x_.size() != y_.size() * p_) {
    throw Error(ErrorCode::DataError, "covariate matrix size does not match n x p");
  }
  if (!names_.empty() && names_.size() != p_) {
    throw Error(ErrorCode::DataError, "feature name count does not match p");
  }
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (!std::isfinite(y_[i])) {
      throw Error(ErrorCode::DataError, fmt::format("non-finite response at row {}", i + 1));
    }
  }
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (!std::isfinite(x_[k])) {
      throw Error(ErrorCode::DataError, fmt::format("non-finite covariate at row {}, column {}",
                                                    k % y_.size() + 1, k / y_.size() + 1));
    }
  }
}

void Dataset::validate_response(const Family& family) const {
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (!family.valid_response(y_[i])) {
      throw Error(ErrorCode::DataError,
                  fmt::format("row {}: response y={} is not valid for the {} family", i + 1,
                              y_[i], family.name()));
    }
  }
}

Dataset Dataset::subset_rows(std::span<const std::size_t> rows) const {
  std::vector<double> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(y_[r]);
  std::vector<double> x(rows.size() * p_);
  for (std::size_t j = 0; j < p_; ++j) {
    const auto col = column(j);
    double* dst = x.data() + j * rows.size();
    for (std::size_t k = 0; k < rows.size(); ++k) dst[k] = col[rows[k]];
  }
  return Dataset(std::move(y), std::move(x), p_, names_);
}

Dataset Dataset::subset_columns(std::span<const std::size_t> cols) const {
  std::vector<double> x;
  x.reserve(cols.size() * n());
  std::vector<std::string> names;
  for (auto c : cols) {
    const auto col = column(c);
    x.insert(x.end(), col.begin(), col.end());
    if (!names_.empty()) names.push_back(names_[c]);
  }
  return Dataset(y_, std::move(x), cols.size(), std::move(names));
}

double Dataset::mean_response() const noexcept {
  return std::accumulate(y_.begin(), y_.end(), 0.0) / static_cast<double>(y_.size());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

template <typename F>
void split_fields(std::string_view line, F&& on_field) {
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      on_field(trim(line.substr(start)));
      return;
    }
    on_field(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

}  // namespace

Dataset parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (pos > text.size()) break;
      continue;
    }
    if (header.empty()) {
      split_fields(line, [&](std::string_view f) { header.emplace_back(f); });
      if (header.empty() || header.front() != "y") {
        throw Error(ErrorCode::DataError, source + ": first header column must be named 'y'");
      }
      if (header.size() < 2) throw Error(ErrorCode::DataError, source + ": no covariate columns");
      continue;
    }
    std::vector<double> row;
    row.reserve(header.size());
    std::size_t col = 0;
    split_fields(line, [&](std::string_view f) {
      ++col;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::DataError,
                    fmt::format("{}: row {} (line {}), column {}: missing or non-numeric value '{}'",
                                source, rows.size() + 1, line_no, col, f));
      }
      row.push_back(v);
    });
    if (row.size() != header.size()) {
      throw Error(ErrorCode::DataError,
                  fmt::format("{}: row {} (line {}) has {} fields, header has {}", source,
                              rows.size() + 1, line_no, row.size(), header.size()));
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw Error(ErrorCode::DataError, source + ": empty file");

  const std::size_t n = rows.size();
  const std::size_t p = header.size() - 1;
  std::vector<double> y(n);
  std::vector<double> x(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rows[i][0];
    for (std::size_t j = 0; j < p; ++j) x[j * n + i] = rows[i][j + 1];
  }
  std::vector<std::string> names(header.begin() + 1, header.end());
  return Dataset(std::move(y), std::move(x), p, std::move(names));
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::DataError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::DataError, "cannot write " + path.string());
  out << "y";
  for (std::size_t j = 0; j < data.p(); ++j) {
    if (data.feature_names().empty()) {
      out << ",x" << (j + 1);
    } else {
      out << ',' << data.feature_names()[j];
    }
  }
  out << '\n';
  std::string line;
  for (std::size_t i = 0; i < data.n(); ++i) {
    line = fmt::format("{}", data.y()[i]);
    for (std::size_t j = 0; j < data.p(); ++j) fmt::format_to(std::back_inserter(line), ",{}", data.x(i, j));
    line += '\n';
    out << line;
  }
}

}  // namespace glmebic
