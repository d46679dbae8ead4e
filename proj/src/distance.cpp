#include "cropwarp/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cropwarp/errors.hpp"

namespace cropwarp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Angle between two unit vectors via atan2(|cross|, dot). Unlike
// acos(clamp(dot)) this is exact for identical inputs (the cross product of
// a vector with itself is exactly zero) and loses no precision near 0 or pi.
double unit_angle(const PairVector& u, const PairVector& v) {
  double cross = u.a * v.b - u.b * v.a;
  double dot = u.a * v.a + u.b * v.b;
  return std::atan2(std::fabs(cross), dot);
}

double pair_cost(const PairVector& u, const PairVector& v) {
  if (u.degenerate && v.degenerate) return 0.0;
  if (u.degenerate || v.degenerate) return std::numbers::pi / 2.0;
  return unit_angle(u, v);
}

bool in_band(int day_x, int day_y, double band_days) {
  return std::fabs(static_cast<double>(day_x) - static_cast<double>(day_y)) <= band_days;
}

Accumulated accumulate_impl(const Matrix& local) {
  std::size_t rows = local.rows(), cols = local.cols();
  Matrix d(rows, cols, kInf);
  d(0, 0) = local(0, 0);
  for (std::size_t j = 1; j < cols; ++j) d(0, j) = d(0, j - 1) + local(0, j);
  for (std::size_t i = 1; i < rows; ++i) d(i, 0) = d(i - 1, 0) + local(i, 0);
  for (std::size_t i = 1; i < rows; ++i) {
    for (std::size_t j = 1; j < cols; ++j) {
      double best = std::min({d(i - 1, j - 1), d(i - 1, j), d(i, j - 1)});
      d(i, j) = local(i, j) + best;
    }
  }
  double final_cost = d(rows - 1, cols - 1);
  return {std::move(d), final_cost};
}

// Rolling two-row DP over the banded corridor only. Identical recurrence and
// evaluation order as accumulate_impl (row-major, left to right), so the
// results are bitwise equal; out-of-band cells never enter a sum.
template <typename DayX, typename DayY, typename LocalCost>
double banded_dp(std::size_t rows, std::size_t cols, DayX&& day_x, DayY&& day_y,
                 double band_days, LocalCost&& local) {
  std::vector<double> prev(cols, kInf), curr(cols, kInf);
  std::size_t lo = 0, hi = 0;  // in-band column range of the previous row
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t jlo = 0;
    while (jlo < cols &&
           static_cast<double>(day_x(i)) - static_cast<double>(day_y(jlo)) > band_days) {
      ++jlo;
    }
    std::size_t jhi = jlo;
    while (jhi < cols &&
           static_cast<double>(day_y(jhi)) - static_cast<double>(day_x(i)) <= band_days) {
      ++jhi;
    }
    if (jlo >= jhi) return kInf;  // this row has no in-band cell
    for (std::size_t j = jlo; j < jhi; ++j) {
      // Cells outside a row's corridor are blocked, so neighbors are only
      // read where the previous/current corridor covers them.
      double left = j > jlo ? curr[j - 1] : kInf;
      double up = i > 0 && j >= lo && j < hi ? prev[j] : kInf;
      double diag = i > 0 && j >= 1 && j - 1 >= lo && j - 1 < hi ? prev[j - 1] : kInf;
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else if (i == 0) {
        best = left;
      } else if (j == 0) {
        best = up;
      } else {
        best = std::min({diag, up, left});
      }
      curr[j] = local(i, j) + best;
    }
    std::swap(prev, curr);
    lo = jlo;
    hi = jhi;
  }
  return hi == cols ? prev[cols - 1] : kInf;
}

// Local costs for plain DTW: |x_i - y_j|, banded on the sample days.
Matrix abs_cost_matrix(const Series& x, const Series& y, const WarpConfig& cfg) {
  Matrix local(x.size(), y.size(), kInf);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (!in_band(x.days[i], y.days[j], cfg.band_days)) continue;
      local(i, j) = std::fabs(x.values[i] - y.values[j]);
    }
  }
  return local;
}

// DTW local cost plus the logistic time penalty on the day offset.
Matrix twdtw_cost_matrix(const Series& x, const Series& y, const WarpConfig& cfg) {
  Matrix local(x.size(), y.size(), kInf);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (!in_band(x.days[i], y.days[j], cfg.band_days)) continue;
      double dt = std::fabs(static_cast<double>(x.days[i]) - static_cast<double>(y.days[j]));
      double omega = 1.0 / (1.0 + std::exp(-cfg.twdtw_alpha * (dt - cfg.twdtw_beta)));
      local(i, j) = std::fabs(x.values[i] - y.values[j]) + omega;
    }
  }
  return local;
}

Matrix pair_cost_matrix(std::span<const PairVector> px, std::span<const PairVector> py,
                        const WarpConfig& cfg) {
  if (px.empty() || py.empty()) {
    throw ValidationError("vdtw needs series of length >= 2");
  }
  Matrix local(px.size(), py.size(), kInf);
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t j = 0; j < py.size(); ++j) {
      if (!in_band(px[i].day, py[j].day, cfg.band_days)) continue;
      local(i, j) = pair_cost(px[i], py[j]);
    }
  }
  return local;
}

double check_finite(double distance) {
  if (!std::isfinite(distance)) {
    throw NoPathError("no finite warping path within the band");
  }
  return distance;
}

}  // namespace

const char* to_string(Measure m) {
  switch (m) {
    case Measure::sam: return "sam";
    case Measure::dtw: return "dtw";
    case Measure::twdtw: return "twdtw";
    case Measure::vdtw: return "vdtw";
  }
  return "vdtw";
}

Measure measure_from_string(const std::string& name) {
  if (name == "sam") return Measure::sam;
  if (name == "dtw") return Measure::dtw;
  if (name == "twdtw") return Measure::twdtw;
  if (name == "vdtw") return Measure::vdtw;
  throw ValidationError("unknown measure '" + name + "' (expected sam|dtw|twdtw|vdtw)");
}

std::vector<PairVector> pair_vectors(const Series& x, double eps, VectorKind kind) {
  validate_series(x);
  if (x.size() < 2) throw ValidationError("pair vectors need a series of length >= 2");
  std::vector<PairVector> out;
  out.reserve(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) {
    double a, b;
    if (kind == VectorKind::value_pair) {
      a = x.values[i - 1];
      b = x.values[i];
    } else {
      a = static_cast<double>(x.days[i] - x.days[i - 1]);
      b = x.values[i] - x.values[i - 1];
    }
    PairVector pv;
    pv.day = x.days[i];
    double norm = std::hypot(a, b);
    if (norm < eps) {
      pv.degenerate = true;
    } else {
      pv.a = a / norm;
      pv.b = b / norm;
    }
    out.push_back(pv);
  }
  return out;
}

Matrix angular_cost_matrix(const Series& x, const Series& y, const WarpConfig& cfg) {
  return pair_cost_matrix(pair_vectors(x, cfg.zero_vector_eps, cfg.vector_kind),
                          pair_vectors(y, cfg.zero_vector_eps, cfg.vector_kind), cfg);
}

Accumulated accumulate(const Matrix& local) {
  if (local.rows() == 0 || local.cols() == 0) {
    throw ValidationError("cannot accumulate an empty cost matrix");
  }
  Accumulated acc = accumulate_impl(local);
  check_finite(acc.distance);
  return acc;
}

double sam(const Series& x, const Series& y) {
  validate_series(x);
  validate_series(y);
  if (x.size() != y.size()) throw ValidationError("sam requires equal-length series");
  if (x.empty()) throw ValidationError("sam requires non-empty series");

  double nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    nx += x.values[i] * x.values[i];
    ny += y.values[i] * y.values[i];
  }
  nx = std::sqrt(nx);
  ny = std::sqrt(ny);
  if (nx == 0.0 || ny == 0.0) throw DomainError("sam is undefined for an all-zero series");

  // angle = 2*atan2(|u-v|, |u+v|) over the normalized vectors; exact for
  // identical directions and stable near 0 and pi.
  double dm = 0, dp = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double u = x.values[i] / nx;
    double v = y.values[i] / ny;
    dm += (u - v) * (u - v);
    dp += (u + v) * (u + v);
  }
  return 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
}

double dtw(const Series& x, const Series& y, const WarpConfig& cfg) {
  validate_series(x);
  validate_series(y);
  if (x.empty() || y.empty()) throw ValidationError("dtw requires non-empty series");
  return check_finite(banded_dp(
      x.size(), y.size(), [&](std::size_t i) { return x.days[i]; },
      [&](std::size_t j) { return y.days[j]; }, cfg.band_days,
      [&](std::size_t i, std::size_t j) { return std::fabs(x.values[i] - y.values[j]); }));
}

double twdtw(const Series& x, const Series& y, const WarpConfig& cfg) {
  validate_series(x);
  validate_series(y);
  if (x.empty() || y.empty()) throw ValidationError("twdtw requires non-empty series");
  return check_finite(banded_dp(
      x.size(), y.size(), [&](std::size_t i) { return x.days[i]; },
      [&](std::size_t j) { return y.days[j]; }, cfg.band_days,
      [&](std::size_t i, std::size_t j) {
        double dt = std::fabs(static_cast<double>(x.days[i]) - static_cast<double>(y.days[j]));
        double omega = 1.0 / (1.0 + std::exp(-cfg.twdtw_alpha * (dt - cfg.twdtw_beta)));
        return std::fabs(x.values[i] - y.values[j]) + omega;
      }));
}

double vdtw_pairs(std::span<const PairVector> px, std::span<const PairVector> py,
                  const WarpConfig& cfg) {
  if (px.empty() || py.empty()) throw ValidationError("vdtw needs series of length >= 2");
  return check_finite(banded_dp(
      px.size(), py.size(), [&](std::size_t i) { return px[i].day; },
      [&](std::size_t j) { return py[j].day; }, cfg.band_days,
      [&](std::size_t i, std::size_t j) { return pair_cost(px[i], py[j]); }));
}

double vdtw(const Series& x, const Series& y, const WarpConfig& cfg) {
  auto px = pair_vectors(x, cfg.zero_vector_eps, cfg.vector_kind);
  auto py = pair_vectors(y, cfg.zero_vector_eps, cfg.vector_kind);
  return vdtw_pairs(px, py, cfg);
}

double series_distance(const Series& x, const Series& y, const WarpConfig& cfg) {
  switch (cfg.measure) {
    case Measure::sam: return sam(x, y);
    case Measure::dtw: return dtw(x, y, cfg);
    case Measure::twdtw: return twdtw(x, y, cfg);
    case Measure::vdtw: return vdtw(x, y, cfg);
  }
  throw ValidationError("unhandled measure");
}

CostMatrices cost_matrices(const Series& x, const Series& y, const WarpConfig& cfg) {
  CostMatrices out;
  out.n = x.size();
  out.m = y.size();
  switch (cfg.measure) {
    case Measure::sam: {
      out.local = Matrix(1, 1, sam(x, y));
      out.accumulated = out.local;
      out.distance = out.local(0, 0);
      return out;
    }
    case Measure::dtw: out.local = abs_cost_matrix(x, y, cfg); break;
    case Measure::twdtw: out.local = twdtw_cost_matrix(x, y, cfg); break;
    case Measure::vdtw: out.local = angular_cost_matrix(x, y, cfg); break;
  }
  Accumulated acc = accumulate_impl(out.local);
  out.accumulated = std::move(acc.table);
  out.distance = acc.distance;
  return out;
}

}  // namespace cropwarp
