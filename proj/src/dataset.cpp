#include "fastpd/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fastpd/errors.hpp"

namespace fastpd {

Dataset::Dataset(std::vector<double> values, std::size_t n, std::size_t d,
                 std::vector<std::string> column_names)
    : n_(n), d_(d), values_(std::move(values)) {
  if (values_.size() != n * d)
    throw ValidationError("dataset: value buffer size does not match n*d");
  check_finite();
  if (!column_names.empty()) set_column_names(std::move(column_names));
}

void Dataset::set_column_names(std::vector<std::string> names) {
  if (names.size() != d_)
    throw ValidationError("dataset: expected " + std::to_string(d_) + " column names, got " +
                          std::to_string(names.size()));
  column_names_ = std::move(names);
}

std::string Dataset::column_name(std::size_t i) const {
  if (i < column_names_.size() && !column_names_[i].empty()) return column_names_[i];
  return "f" + std::to_string(i);
}

void Dataset::check_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw ValidationError("dataset: non-finite entry at row " + std::to_string(i / d_) +
                            ", column " + std::to_string(i % d_));
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

bool parse_cell(const std::string& field, double* out) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t') ++end;
  if (*end != '\0') return false;
  *out = v;
  return true;
}

}  // namespace

Dataset load_csv(const std::string& text, HasHeader header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_fields(line));
  }
  if (rows.empty()) throw ValidationError("empty table");

  bool has_header = false;
  if (header == HasHeader::kYes) {
    has_header = true;
  } else if (header == HasHeader::kAuto) {
    double tmp;
    for (const std::string& cell : rows[0]) {
      if (!parse_cell(cell, &tmp)) {
        has_header = true;
        break;
      }
    }
  }

  std::vector<std::string> names;
  std::size_t first_row = 0;
  if (has_header) {
    names = rows[0];
    first_row = 1;
  }
  if (first_row >= rows.size()) throw ValidationError("empty table (header only)");

  const std::size_t d = rows[first_row].size();
  const std::size_t n = rows.size() - first_row;
  std::vector<double> values;
  values.reserve(n * d);
  for (std::size_t r = first_row; r < rows.size(); ++r) {
    if (rows[r].size() != d)
      throw ValidationError("ragged row " + std::to_string(r - first_row) + ": expected " +
                            std::to_string(d) + " fields, got " + std::to_string(rows[r].size()));
    for (std::size_t c = 0; c < d; ++c) {
      double v;
      if (!parse_cell(rows[r][c], &v))
        throw ValidationError("non-numeric cell at row " + std::to_string(r - first_row) +
                              ", column " + std::to_string(c) + ": '" + rows[r][c] + "'");
      if (!std::isfinite(v))
        throw ValidationError("non-finite cell at row " + std::to_string(r - first_row) +
                              ", column " + std::to_string(c));
      values.push_back(v);
    }
  }
  if (has_header && names.size() != d)
    throw ValidationError("header has " + std::to_string(names.size()) + " fields but rows have " +
                          std::to_string(d));
  Dataset out(std::move(values), n, d);
  if (has_header) out.set_column_names(std::move(names));
  return out;
}

Dataset load_csv_file(const std::string& path, HasHeader header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_csv(buf.str(), header);
}

std::string save_csv(const Dataset& data, bool write_header) {
  std::string out;
  char buf[40];
  if (write_header && !data.column_names().empty()) {
    for (std::size_t c = 0; c < data.d(); ++c) {
      if (c) out.push_back(',');
      out += data.column_names()[c];
    }
    out.push_back('\n');
  }
  for (std::size_t r = 0; r < data.n(); ++r) {
    for (std::size_t c = 0; c < data.d(); ++c) {
      if (c) out.push_back(',');
      std::snprintf(buf, sizeof(buf), "%.17g", data.at(r, c));
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

void save_csv_file(const Dataset& data, const std::string& path, bool write_header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write data file '" + path + "'");
  out << save_csv(data, write_header);
}

double GaussianSampler::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianSampler::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 shifted into (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double dgp1_target(double x1, double x2) { return x1 + x2 + 2.0 * x1 * x2; }

double dgp2_target(std::span<const double> x) {
  return 3.0 * std::sin(x[0]) + 2.5 * std::cos(0.3 * x[1]) + 1.12 * x[2] +
         std::sin(x[3] * x[4]) + 0.7 * x[5] * x[6];
}

namespace {

// Lower-triangular Cholesky factor of a small dense SPD matrix.
std::vector<double> cholesky(const std::vector<double>& a, std::size_t d) {
  std::vector<double> l(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        if (sum <= 0.0) throw Error("covariance matrix is not positive definite");
        l[i * d + i] = std::sqrt(sum);
      } else {
        l[i * d + j] = sum / l[j * d + j];
      }
    }
  }
  return l;
}

}  // namespace

GeneratedData generate_dgp(Dgp kind, std::size_t n, std::uint64_t seed, int dimension) {
  if (n == 0) throw ValidationError("generate_dgp: n must be >= 1");
  GaussianSampler rng(seed);
  GeneratedData out;

  if (kind == Dgp::kDgp1) {
    if (dimension != 0 && dimension != 2)
      throw ValidationError("dgp1 is two-dimensional");
    constexpr double rho = 0.3;
    const double load = std::sqrt(1.0 - rho * rho);
    Dataset x(n, 2);
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      x.at(i, 0) = z1;
      x.at(i, 1) = rho * z1 + load * z2;
      out.y[i] = dgp1_target(x.at(i, 0), x.at(i, 1)) + rng.normal();
    }
    out.x = std::move(x);
    return out;
  }

  // dgp2
  constexpr std::size_t kCore = 7;
  const std::size_t d = dimension == 0 ? kCore : static_cast<std::size_t>(dimension);
  if (d < kCore) throw ValidationError("dgp2 needs at least 7 covariates");
  std::vector<double> sigma(kCore * kCore, 0.0);
  for (std::size_t i = 0; i < kCore; ++i) {
    sigma[i * kCore + i] += 3.0;
    sigma[i * kCore + (kCore - 1 - i)] += 0.6;  // antidiagonal
  }
  const std::vector<double> l = cholesky(sigma, kCore);
  const double noise_sd = std::sqrt(0.1);
  const double extra_sd = std::sqrt(3.0);

  Dataset x(n, d);
  out.y.resize(n);
  std::vector<double> z(kCore);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kCore; ++k) z[k] = rng.normal();
    for (std::size_t r = 0; r < kCore; ++r) {
      double v = 0.0;
      for (std::size_t c = 0; c <= r; ++c) v += l[r * kCore + c] * z[c];
      x.at(i, r) = v;
    }
    for (std::size_t r = kCore; r < d; ++r) x.at(i, r) = extra_sd * rng.normal();
    out.y[i] = dgp2_target(x.row(i)) + noise_sd * rng.normal();
  }
  out.x = std::move(x);
  return out;
}

}  // namespace fastpd
