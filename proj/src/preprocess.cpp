#include "cropwarp/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "cropwarp/errors.hpp"

namespace cropwarp {

namespace {

// Solves A x = b in place (partial pivoting); A is tiny (order+1 square).
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0) throw DomainError("singular normal equations");
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

// Least-squares polynomial value at offset 0 over (offsets, values).
double poly_fit_at_center(const std::vector<double>& offsets, const std::vector<double>& values,
                          int order) {
  std::size_t k = static_cast<std::size_t>(order) + 1;
  std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
  std::vector<double> atb(k, 0.0);
  for (std::size_t p = 0; p < offsets.size(); ++p) {
    double pw = 1.0;
    std::vector<double> powers(k);
    for (std::size_t j = 0; j < k; ++j) {
      powers[j] = pw;
      pw *= offsets[p];
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) ata[i][j] += powers[i] * powers[j];
      atb[i] += powers[i] * values[p];
    }
  }
  return solve_dense(std::move(ata), std::move(atb))[0];
}

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double raw_double_sigmoid(const SigmoidParams& p, double t) {
  return p.v_min + (p.v_max - p.v_min) * (sigma(p.m1 * (t - p.s1)) - sigma(p.m2 * (t - p.s2)));
}

double sigmoid_rmse(const SigmoidParams& p, const Series& s) {
  double sq = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double r = raw_double_sigmoid(p, static_cast<double>(s.days[i])) - s.values[i];
    sq += r * r;
  }
  return std::sqrt(sq / static_cast<double>(s.size()));
}

bool sigmoid_valid(const SigmoidParams& p) {
  return p.s1 < p.s2 && p.m1 > 0 && p.m2 > 0 && p.v_max >= p.v_min && std::isfinite(p.v_min) &&
         std::isfinite(p.v_max) && std::isfinite(p.m1) && std::isfinite(p.m2);
}

// Closed-form (v_min, v_max) minimizing the residual for fixed shape
// g(t) = sigma1 - sigma2: the model is linear in the two levels.
bool fit_levels(const Series& s, SigmoidParams& p) {
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double g = sigma(p.m1 * (s.days[i] - p.s1)) - sigma(p.m2 * (s.days[i] - p.s2));
    double w0 = 1.0 - g;  // coefficient of v_min
    a11 += w0 * w0;
    a12 += w0 * g;
    a22 += g * g;
    b1 += w0 * s.values[i];
    b2 += g * s.values[i];
  }
  double det = a11 * a22 - a12 * a12;
  if (std::fabs(det) < 1e-12) return false;
  p.v_min = (b1 * a22 - b2 * a12) / det;
  p.v_max = (a11 * b2 - a12 * b1) / det;
  return p.v_max >= p.v_min;
}

// Nelder-Mead over the six parameters with an invalidity penalty.
SigmoidParams nelder_mead(const Series& s, const SigmoidParams& init, int max_iter,
                          double tol) {
  constexpr int kDim = 6;
  using Point = std::array<double, kDim>;
  auto pack = [](const SigmoidParams& p) {
    return Point{p.v_min, p.v_max, p.s1, p.s2, p.m1, p.m2};
  };
  auto unpack = [](const Point& x) {
    return SigmoidParams{x[0], x[1], x[2], x[3], x[4], x[5]};
  };
  auto cost = [&](const Point& x) {
    SigmoidParams p = unpack(x);
    if (!sigmoid_valid(p)) return std::numeric_limits<double>::infinity();
    return sigmoid_rmse(p, s);
  };

  std::vector<std::pair<double, Point>> simplex;
  Point x0 = pack(init);
  simplex.emplace_back(cost(x0), x0);
  const double steps[kDim] = {0.05, 0.05, 8.0, 8.0, 0.02, 0.02};
  for (int d = 0; d < kDim; ++d) {
    Point x = x0;
    x[d] += steps[d];
    simplex.emplace_back(cost(x), x);
  }

  auto order = [&] {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  };
  order();

  for (int it = 0; it < max_iter; ++it) {
    if (std::isfinite(simplex.back().first) &&
        simplex.back().first - simplex.front().first < tol) {
      break;
    }
    Point centroid{};
    for (int i = 0; i < kDim; ++i) {
      for (int d = 0; d < kDim; ++d) centroid[d] += simplex[i].second[d];
    }
    for (int d = 0; d < kDim; ++d) centroid[d] /= kDim;

    auto blend = [&](double coef) {
      Point x;
      for (int d = 0; d < kDim; ++d) {
        x[d] = centroid[d] + coef * (simplex.back().second[d] - centroid[d]);
      }
      return x;
    };

    Point reflected = blend(-1.0);
    double fr = cost(reflected);
    if (fr < simplex.front().first) {
      Point expanded = blend(-2.0);
      double fe = cost(expanded);
      simplex.back() = fe < fr ? std::make_pair(fe, expanded) : std::make_pair(fr, reflected);
    } else if (fr < simplex[kDim - 1].first) {
      simplex.back() = {fr, reflected};
    } else {
      Point contracted = blend(0.5);
      double fc = cost(contracted);
      if (fc < simplex.back().first) {
        simplex.back() = {fc, contracted};
      } else {
        // shrink toward the best vertex
        for (int i = 1; i <= kDim; ++i) {
          for (int d = 0; d < kDim; ++d) {
            simplex[i].second[d] =
                simplex[0].second[d] + 0.5 * (simplex[i].second[d] - simplex[0].second[d]);
          }
          simplex[i].first = cost(simplex[i].second);
        }
      }
    }
    order();
  }
  return unpack(simplex.front().second);
}

}  // namespace

Series fill_cloud_gaps_idw(const Series& series) {
  validate_series(series);
  std::vector<std::size_t> clear_idx;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.flags[i] == QualityFlag::clear) clear_idx.push_back(i);
  }
  if (clear_idx.empty()) throw UnfillableError("series has no clear sample to fill from");

  Series out = series;
  out.flags.assign(series.size(), QualityFlag::clear);
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.flags[i] == QualityFlag::clear) continue;  // clear values pass through untouched
    auto right = std::lower_bound(clear_idx.begin(), clear_idx.end(), i);
    const std::size_t* lo = right == clear_idx.begin() ? nullptr : &*(right - 1);
    const std::size_t* hi = right == clear_idx.end() ? nullptr : &*right;
    if (lo && hi) {
      double dl = static_cast<double>(series.days[i] - series.days[*lo]);
      double dr = static_cast<double>(series.days[*hi] - series.days[i]);
      double wl = 1.0 / dl, wr = 1.0 / dr;
      out.values[i] = (series.values[*lo] * wl + series.values[*hi] * wr) / (wl + wr);
    } else {
      out.values[i] = lo ? series.values[*lo] : series.values[*hi];
    }
  }
  return out;
}

Series savitzky_golay(const Series& series, int window, int order) {
  validate_series(series);
  int n = static_cast<int>(series.size());
  if (window % 2 == 0) throw ParamError("SG window must be odd");
  if (order >= window) throw ParamError("SG order must be smaller than the window");
  if (order < 0) throw ParamError("SG order must be nonnegative");
  if (window > n) throw ParamError("SG window exceeds the series length");

  int half = window / 2;
  Series out = series;
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - half);
    int hi = std::min(n - 1, i + half);
    std::vector<double> offsets, values;
    offsets.reserve(hi - lo + 1);
    values.reserve(hi - lo + 1);
    for (int j = lo; j <= hi; ++j) {
      offsets.push_back(static_cast<double>(j - i));
      values.push_back(series.values[j]);
    }
    out.values[i] = poly_fit_at_center(offsets, values, order);
  }
  return out;
}

void validate_sigmoid(const SigmoidParams& p) {
  if (!sigmoid_valid(p)) throw ParamError("invalid double-sigmoid parameters");
}

double eval_double_sigmoid_at(const SigmoidParams& p, double t) {
  // The raw curve can dip a hair below v_min when the two logistics
  // overlap; clamp so the level contract holds.
  return std::max(p.v_min, raw_double_sigmoid(p, t));
}

Series eval_double_sigmoid(const SigmoidParams& p, const TimeGrid& grid) {
  validate_sigmoid(p);
  validate_grid(grid);
  Series out;
  for (int d = grid.t_l; d <= grid.t_u; d += grid.step) {
    out.days.push_back(d);
    out.values.push_back(eval_double_sigmoid_at(p, static_cast<double>(d)));
    out.flags.push_back(QualityFlag::clear);
  }
  return out;
}

SigmoidFit fit_double_sigmoid(const Series& series) {
  validate_series(series);
  if (series.size() < 7) throw ParamError("double-sigmoid fit needs at least 7 samples");

  double first = static_cast<double>(series.days.front());
  double last = static_cast<double>(series.days.back());
  double vmin = *std::min_element(series.values.begin(), series.values.end());
  double vmax = *std::max_element(series.values.begin(), series.values.end());

  // Coarse grid over the inflection days; levels are closed-form per shape.
  SigmoidParams best{vmin, vmax, first + (last - first) / 3.0,
                     first + 2.0 * (last - first) / 3.0, 0.1, 0.1};
  double best_rmse = sigmoid_rmse(best, series);
  const double slopes[2] = {0.05, 0.15};
  const int kGridN = 8;
  for (int a = 0; a < kGridN; ++a) {
    for (int b = a + 1; b <= kGridN; ++b) {
      double s1 = first + (last - first) * a / kGridN;
      double s2 = first + (last - first) * b / kGridN;
      for (double m1 : slopes) {
        for (double m2 : slopes) {
          SigmoidParams cand{vmin, vmax, s1, s2, m1, m2};
          if (!fit_levels(series, cand)) {
            cand.v_min = vmin;
            cand.v_max = std::max(vmax, vmin);
          }
          if (!sigmoid_valid(cand)) continue;
          double r = sigmoid_rmse(cand, series);
          if (r < best_rmse) {
            best_rmse = r;
            best = cand;
          }
        }
      }
    }
  }

  SigmoidParams refined = nelder_mead(series, best, 500, 1e-8);
  double refined_rmse = sigmoid_rmse(refined, series);

  SigmoidFit fit;
  if (sigmoid_valid(refined) && refined_rmse <= best_rmse) {
    fit.params = refined;
    fit.rmse = refined_rmse;
    fit.degraded = false;
  } else {
    fit.params = best;
    fit.rmse = best_rmse;
    fit.degraded = true;
  }
  return fit;
}

TimeGrid common_grid(const std::vector<std::vector<int>>& calendars, int step) {
  if (step < 1) throw ParamError("grid step must be >= 1");
  if (calendars.empty()) throw ParamError("common_grid needs at least one calendar");
  int t_l = std::numeric_limits<int>::min();
  int t_u = std::numeric_limits<int>::max();
  for (const auto& days : calendars) {
    if (days.size() < 2) throw ParamError("each calendar needs at least 2 acquisition days");
    auto [lo, hi] = std::minmax_element(days.begin(), days.end());
    t_l = std::max(t_l, *lo);
    t_u = std::min(t_u, *hi);
  }
  if (t_l >= t_u) {
    throw CoverageError("year calendars do not overlap (latest start " + std::to_string(t_l) +
                        " >= earliest end " + std::to_string(t_u) + ")");
  }
  return TimeGrid{t_l, t_u, step};
}

Series resample_linear(const Series& series, const TimeGrid& grid) {
  validate_series(series);
  validate_grid(grid);
  if (series.empty() || series.days.front() > grid.t_l || series.days.back() < grid.t_u) {
    throw CoverageError("series [" +
                        (series.empty() ? std::string("empty")
                                        : std::to_string(series.days.front()) + ", " +
                                              std::to_string(series.days.back())) +
                        "] does not cover grid [" + std::to_string(grid.t_l) + ", " +
                        std::to_string(grid.t_u) + "]");
  }

  Series out;
  std::size_t hi = 0;
  for (int d = grid.t_l; d <= grid.t_u; d += grid.step) {
    while (series.days[hi] < d) ++hi;
    double v;
    if (series.days[hi] == d) {
      v = series.values[hi];  // exact at sample days
    } else {
      std::size_t lo = hi - 1;
      double t = static_cast<double>(d - series.days[lo]) /
                 static_cast<double>(series.days[hi] - series.days[lo]);
      v = std::lerp(series.values[lo], series.values[hi], t);
    }
    out.days.push_back(d);
    out.values.push_back(v);
    out.flags.push_back(QualityFlag::clear);
  }
  return out;
}

}  // namespace cropwarp
