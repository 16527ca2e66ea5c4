#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fastpd {

// A dense row-major numeric matrix with optional column names. Background
// samples and evaluation points are both Datasets. All entries are finite;
// loading and construction enforce this. Immutable after construction in
// practice (shared read-only across evaluators).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t n, std::size_t d)
      : n_(n), d_(d), values_(n * d, 0.0) {}
  Dataset(std::vector<double> values, std::size_t n, std::size_t d,
          std::vector<std::string> column_names = {});

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }

  double& at(std::size_t row, std::size_t col) { return values_[row * d_ + col]; }
  double at(std::size_t row, std::size_t col) const { return values_[row * d_ + col]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * d_, d_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * d_, d_}; }
  const std::vector<double>& values() const { return values_; }

  const std::vector<std::string>& column_names() const { return column_names_; }
  void set_column_names(std::vector<std::string> names);
  // Name of column i, falling back to "f<i>".
  std::string column_name(std::size_t i) const;

  void check_finite() const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> values_;
  std::vector<std::string> column_names_;
};

enum class HasHeader { kNo, kYes, kAuto };

// RFC-4180-style CSV, comma delimiter, optional single header row.
// Ragged rows, non-numeric cells (reported with row/column) and empty
// tables raise ValidationError.
Dataset load_csv(const std::string& text, HasHeader header = HasHeader::kAuto);
Dataset load_csv_file(const std::string& path, HasHeader header = HasHeader::kAuto);
// Floats are written with 17 significant digits so save/load round-trips
// exactly.
std::string save_csv(const Dataset& data, bool write_header = true);
void save_csv_file(const Dataset& data, const std::string& path, bool write_header = true);

// Deterministic Gaussian stream: std::mt19937_64 (bit-stable across
// platforms per the standard), 53-bit uniforms, Box-Muller transform.
// Fixed on purpose so seeded fixtures reproduce everywhere.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform();
  // Standard normal.
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class Dgp { kDgp1, kDgp2 };

struct GeneratedData {
  Dataset x;
  std::vector<double> y;
};

// Synthetic data generating processes used by the simulation tests.
//   dgp1: X ~ N(0, [[1, .3], [.3, 1]]),  m(x) = x1 + x2 + 2*x1*x2,
//         Y ~ N(m(X), 1).
//   dgp2: X ~ N(0, 3*I7 + 0.6*J7) with J7 the antidiagonal identity,
//         m(x) = 3 sin(x1) + 2.5 cos(0.3 x2) + 1.12 x3 + sin(x4 x5)
//                + 0.7 x6 x7,  Y ~ N(m(X), 0.1).
// `dimension` may widen dgp2 beyond its 7 covariates; extra coordinates are
// iid N(0, 3) and unused by the target. Identical seeds give identical
// output.
GeneratedData generate_dgp(Dgp kind, std::size_t n, std::uint64_t seed, int dimension = 0);

// Target functions of the two DGPs, exposed for tests.
double dgp1_target(double x1, double x2);
double dgp2_target(std::span<const double> x);

}  // namespace fastpd
