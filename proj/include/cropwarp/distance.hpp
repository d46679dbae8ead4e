#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cropwarp/types.hpp"

namespace cropwarp {

enum class Measure { sam, dtw, twdtw, vdtw };

const char* to_string(Measure m);
Measure measure_from_string(const std::string& name);

// How the per-element direction vectors are built. value_pair is the
// normative construction (consecutive value pairs, invariant to
// multiplicative gain); time_segment uses (day delta, value delta) segments
// and is kept as an experimentation switch.
enum class VectorKind { value_pair, time_segment };

struct WarpConfig {
  Measure measure = Measure::vdtw;
  double band_days = 15.0;         // half-width of the warping corridor, in days
  double twdtw_alpha = 0.1;        // steepness of the time penalty (1/day)
  double twdtw_beta = 50.0;        // midpoint of the time penalty (days)
  double zero_vector_eps = 1e-12;  // below this norm a pair vector is degenerate
  VectorKind vector_kind = VectorKind::value_pair;
};

// Unit direction of one consecutive sample pair. `day` is the day of the
// later sample; the band constraint is evaluated on it.
struct PairVector {
  double a = 0;
  double b = 0;
  int day = 0;
  bool degenerate = false;
};

// One entry per element i >= 2: the normalized (value_{i-1}, value_i) pair,
// or the normalized (day delta, value delta) segment for time_segment.
std::vector<PairVector> pair_vectors(const Series& x, double eps,
                                     VectorKind kind = VectorKind::value_pair);

// Dense row-major matrix, just enough for the DP tables below.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// (n-1) x (m-1) matrix of angles (radians) between the pair vectors of x
// and y. Cells whose day offset exceeds the band are +infinity. A
// degenerate-vs-degenerate cell costs 0; degenerate-vs-normal costs pi/2.
Matrix angular_cost_matrix(const Series& x, const Series& y, const WarpConfig& cfg);

struct Accumulated {
  Matrix table;
  double distance = 0;
};

// Monotone-path DP over a local-cost matrix: first row and column are
// running sums, interior cells add the minimum of the three predecessors.
// Throws NoPathError when no finite path reaches the last cell.
Accumulated accumulate(const Matrix& local);

// Angle between two equal-length series treated as vectors; invariant to
// positive scaling of either argument. Result in [0, pi].
double sam(const Series& x, const Series& y);

double dtw(const Series& x, const Series& y, const WarpConfig& cfg = {});
double twdtw(const Series& x, const Series& y, const WarpConfig& cfg = {});
double vdtw(const Series& x, const Series& y, const WarpConfig& cfg = {});

// vdtw over precomputed pair vectors; avoids re-normalizing a series for
// every comparison in batch classification.
double vdtw_pairs(std::span<const PairVector> px, std::span<const PairVector> py,
                  const WarpConfig& cfg);

// Dispatch on cfg.measure.
double series_distance(const Series& x, const Series& y, const WarpConfig& cfg);

// Local and accumulated tables for inspection (never throws on a blocked
// corridor; distance is +infinity in that case).
struct CostMatrices {
  Matrix local;
  Matrix accumulated;
  std::size_t n = 0, m = 0;  // input lengths
  double distance = 0;
};

CostMatrices cost_matrices(const Series& x, const Series& y, const WarpConfig& cfg);

}  // namespace cropwarp
