#include "cropwarp/window.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cropwarp/errors.hpp"
#include "csv_detail.hpp"

namespace cropwarp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Series slice(const Series& s, std::size_t lo, std::size_t hi) {  // inclusive
  Series out;
  out.days.assign(s.days.begin() + lo, s.days.begin() + hi + 1);
  out.values.assign(s.values.begin() + lo, s.values.begin() + hi + 1);
  out.flags.assign(s.flags.begin() + lo, s.flags.begin() + hi + 1);
  return out;
}

// Centered moving average; the window shrinks at the ends.
std::vector<double> moving_average(const std::vector<double>& v, int width) {
  if (width <= 1) return v;
  int half = width / 2;
  int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - half);
    int hi = std::min(n - 1, i + half);
    double sum = 0;
    for (int j = lo; j <= hi; ++j) sum += v[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// First index (scanning outward) whose first and second outward differences
// stay within the epsilons for `run` consecutive positions. The run may
// continue past the end of the curve (extended as constant), but the run
// start must have real differences, so the candidate range stops at n-3.
// Returns -1 when nothing qualifies.
int plateau_start(const std::vector<double>& outward, double eps1, double eps2, int run) {
  int n = static_cast<int>(outward.size());
  if (n == 0) return -1;
  auto at = [&](int i) { return outward[std::min(i, n - 1)]; };
  for (int i = 0; i + 2 < n; ++i) {
    bool ok = true;
    for (int r = 0; r < run && ok; ++r) {
      double d1 = at(i + r + 1) - at(i + r);
      double d2 = at(i + r + 2) - 2.0 * at(i + r + 1) + at(i + r);
      ok = std::fabs(d1) <= eps1 && std::fabs(d2) <= eps2;
    }
    if (ok) return i;
  }
  return -1;
}

double auto_eps(const std::vector<double>& scores, double configured) {
  if (!std::isnan(configured)) return configured;
  auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  return 1e-3 * (*hi - *lo);
}

struct SideScan {
  int boundary_day = 0;
  bool no_plateau = false;
};

SideScan scan_side(const std::vector<double>& outward, const std::vector<int>& outward_days,
                   const WindowPolicy& policy) {
  double e1 = auto_eps(outward, policy.eps1);
  double e2 = auto_eps(outward, policy.eps2);
  if (outward.size() < 3) {
    // Too short to scan: a flat stub ends at the pivot, anything else is an
    // unconfirmed fallback to the span end.
    auto [lo, hi] = std::minmax_element(outward.begin(), outward.end());
    if (*hi - *lo <= e1) return {outward_days.front(), false};
    return {outward_days.back(), true};
  }
  std::vector<double> smoothed = moving_average(outward, policy.smoothing_width);
  int idx = plateau_start(smoothed, e1, e2, policy.stability_run);
  if (idx < 0) return {outward_days.back(), true};
  return {outward_days[idx], false};
}

}  // namespace

const char* to_string(WindowPolicyKind kind) {
  return kind == WindowPolicyKind::min_length ? "min_length" : "union";
}

WindowPolicyKind window_policy_from_string(const std::string& name) {
  if (name == "min_length") return WindowPolicyKind::min_length;
  if (name == "union") return WindowPolicyKind::union_hull;
  throw ValidationError("unknown window policy '" + name + "' (expected min_length|union)");
}

Series median_profile(std::span<const FieldSample> samples, const TimeGrid& grid) {
  validate_grid(grid);
  if (samples.empty()) throw ValidationError("median profile over an empty class");
  std::vector<int> days = grid.days();
  for (const auto& fs : samples) {
    if (fs.series.days != days) {
      throw ValidationError("sample " + fs.field_id + " is not resampled to the grid");
    }
  }
  Series out;
  out.days = days;
  out.values.resize(days.size());
  out.flags.assign(days.size(), QualityFlag::clear);
  std::vector<double> column(samples.size());
  for (std::size_t i = 0; i < days.size(); ++i) {
    for (std::size_t k = 0; k < samples.size(); ++k) column[k] = samples[k].series.values[i];
    std::sort(column.begin(), column.end());
    std::size_t n = column.size();
    out.values[i] = n % 2 == 1 ? column[n / 2] : (column[n / 2 - 1] + column[n / 2]) / 2.0;
  }
  return out;
}

int pivot_day(const Series& profile_a, const Series& profile_b) {
  if (profile_a.days != profile_b.days) {
    throw ValidationError("pivot_day requires profiles on the same grid");
  }
  if (profile_a.empty()) throw ValidationError("pivot_day over empty profiles");
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i < profile_a.size(); ++i) {
    double gap = std::fabs(profile_a.values[i] - profile_b.values[i]);
    if (gap > best_gap) {  // strict: ties keep the earliest day
      best_gap = gap;
      best = i;
    }
  }
  return profile_a.days[best];
}

ExpansionScores expansion_scores(const Series& profile_a, const Series& profile_b, int pivot,
                                 const WarpConfig& cfg) {
  if (profile_a.days != profile_b.days) {
    throw ValidationError("expansion scores require profiles on the same grid");
  }
  auto it = std::find(profile_a.days.begin(), profile_a.days.end(), pivot);
  if (it == profile_a.days.end()) throw ValidationError("pivot day is not on the grid");
  std::size_t p = static_cast<std::size_t>(it - profile_a.days.begin());

  WarpConfig score_cfg = cfg;
  score_cfg.measure = Measure::dtw;  // expansion scores use plain DTW

  ExpansionScores out;
  out.pivot = pivot;
  out.days = profile_a.days;
  out.left.assign(profile_a.size(), kNaN);
  out.right.assign(profile_a.size(), kNaN);
  for (std::size_t j = 0; j <= p; ++j) {
    out.left[j] = dtw(slice(profile_a, j, p), slice(profile_b, j, p), score_cfg);
  }
  for (std::size_t j = p; j < profile_a.size(); ++j) {
    out.right[j] = dtw(slice(profile_a, p, j), slice(profile_b, p, j), score_cfg);
  }
  return out;
}

PairWindow optimal_window(const ExpansionScores& scores, const WindowPolicy& policy) {
  auto it = std::find(scores.days.begin(), scores.days.end(), scores.pivot);
  if (it == scores.days.end()) throw ValidationError("scores do not contain the pivot day");
  std::size_t p = static_cast<std::size_t>(it - scores.days.begin());

  // Reorder each side so index 0 is the pivot and indices grow outward.
  std::vector<double> left_scores, right_scores;
  std::vector<int> left_days, right_days;
  for (std::size_t j = p + 1; j-- > 0;) {
    left_scores.push_back(scores.left[j]);
    left_days.push_back(scores.days[j]);
  }
  for (std::size_t j = p; j < scores.days.size(); ++j) {
    right_scores.push_back(scores.right[j]);
    right_days.push_back(scores.days[j]);
  }

  SideScan left = scan_side(left_scores, left_days, policy);
  SideScan right = scan_side(right_scores, right_days, policy);

  PairWindow w;
  w.pivot = scores.pivot;
  w.o1 = left.boundary_day;
  w.o2 = right.boundary_day;
  w.no_plateau = left.no_plateau || right.no_plateau;
  return w;
}

WindowResult multiclass_window(const std::map<std::string, Series>& profiles,
                               const WindowPolicy& policy, const WarpConfig& cfg) {
  if (profiles.size() < 2) throw ValidationError("window selection needs at least 2 classes");

  WindowResult result;
  const std::pair<std::string, std::string>* best_key = nullptr;
  int best_len = 0;
  ExpansionScores best_scores;

  for (auto a = profiles.begin(); a != profiles.end(); ++a) {
    for (auto b = std::next(a); b != profiles.end(); ++b) {
      int pivot = pivot_day(a->second, b->second);
      ExpansionScores scores = expansion_scores(a->second, b->second, pivot, cfg);
      PairWindow w = optimal_window(scores, policy);
      auto key = std::make_pair(a->first, b->first);
      auto [it, _] = result.per_pair.emplace(key, w);
      int len = w.o2 - w.o1;
      if (!best_key || len < best_len) {
        best_key = &it->first;
        best_len = len;
        best_scores = std::move(scores);
      }
    }
  }

  const PairWindow& winner = result.per_pair.at(*best_key);
  result.pivot = winner.pivot;
  result.scores = std::move(best_scores);
  if (policy.kind == WindowPolicyKind::min_length) {
    result.o1 = winner.o1;
    result.o2 = winner.o2;
    result.no_plateau = winner.no_plateau;
  } else {
    result.o1 = std::numeric_limits<int>::max();
    result.o2 = std::numeric_limits<int>::min();
    result.no_plateau = false;
    for (const auto& [key, w] : result.per_pair) {
      (void)key;
      result.o1 = std::min(result.o1, w.o1);
      result.o2 = std::max(result.o2, w.o2);
      result.no_plateau = result.no_plateau || w.no_plateau;
    }
  }
  return result;
}

Series crop_series_to_window(const Series& series, int o1, int o2) {
  validate_series(series);
  if (o1 > o2) throw ParamError("window requires o1 <= o2");
  if (series.empty() || o1 < series.days.front() || o2 > series.days.back()) {
    throw CoverageError("window [" + std::to_string(o1) + ", " + std::to_string(o2) +
                        "] lies outside the series span");
  }
  Series out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.days[i] < o1 || series.days[i] > o2) continue;
    out.days.push_back(series.days[i]);
    out.values.push_back(series.values[i]);
    out.flags.push_back(series.flags[i]);
  }
  if (out.empty()) {
    throw CoverageError("window [" + std::to_string(o1) + ", " + std::to_string(o2) +
                        "] selects no samples");
  }
  return out;
}

std::string score_curve_csv(const ExpansionScores& scores) {
  std::ostringstream out;
  out << "day,score_left,score_right\n";
  for (std::size_t i = 0; i < scores.days.size(); ++i) {
    out << scores.days[i] << ',';
    if (!std::isnan(scores.left[i])) out << detail::format_double(scores.left[i]);
    out << ',';
    if (!std::isnan(scores.right[i])) out << detail::format_double(scores.right[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace cropwarp
