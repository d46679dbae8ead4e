#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cropwarp/distance.hpp"
#include "cropwarp/types.hpp"

namespace cropwarp {

enum class WindowPolicyKind { min_length, union_hull };

const char* to_string(WindowPolicyKind kind);
WindowPolicyKind window_policy_from_string(const std::string& name);

struct WindowPolicy {
  WindowPolicyKind kind = WindowPolicyKind::min_length;
  // Plateau thresholds for the first/second difference of the score curve.
  // NaN means automatic: 1e-3 of that side's score range.
  double eps1 = std::numeric_limits<double>::quiet_NaN();
  double eps2 = std::numeric_limits<double>::quiet_NaN();
  int smoothing_width = 3;  // moving-average width (samples, odd)
  int stability_run = 3;    // consecutive flat samples required
};

// Pointwise median across one class's samples, all resampled to the grid.
Series median_profile(std::span<const FieldSample> samples, const TimeGrid& grid);

// Grid day with the largest absolute profile gap; ties take the earliest day.
int pivot_day(const Series& profile_a, const Series& profile_b);

// Expansion scores around the pivot: for a candidate day J, the DTW score of
// the two profiles restricted to the closed interval between J and the
// pivot. left[i] is defined for days[i] <= pivot, right[i] for
// days[i] >= pivot; the other entries are NaN.
struct ExpansionScores {
  std::vector<int> days;
  std::vector<double> left;
  std::vector<double> right;
  int pivot = 0;
};

ExpansionScores expansion_scores(const Series& profile_a, const Series& profile_b,
                                 int pivot, const WarpConfig& cfg);

struct PairWindow {
  int o1 = 0;
  int o2 = 0;
  int pivot = 0;
  bool no_plateau = false;  // no flat run found; window fell back to the full span
};

// Scans outward from the pivot over the smoothed score curve and stops at
// the first day whose outward first and second differences stay within the
// epsilons for the stability run. A side without a plateau falls back to
// the span end and sets no_plateau.
PairWindow optimal_window(const ExpansionScores& scores, const WindowPolicy& policy);

struct WindowResult {
  int pivot = 0;
  int o1 = 0;
  int o2 = 0;
  bool no_plateau = false;
  ExpansionScores scores;  // score curve of the reported pair
  std::map<std::pair<std::string, std::string>, PairWindow> per_pair;
};

// Pairwise windows over all class pairs. min_length reports the shortest
// pairwise window; union_hull reports the smallest interval containing all
// of them.
WindowResult multiclass_window(const std::map<std::string, Series>& profiles,
                               const WindowPolicy& policy, const WarpConfig& cfg);

// Samples with day in [o1, o2], inclusive. Throws CoverageError when the
// window lies outside the series span or selects nothing.
Series crop_series_to_window(const Series& series, int o1, int o2);

// Score curve CSV for plotting: day,score_left,score_right with empty cells
// where a side is undefined.
std::string score_curve_csv(const ExpansionScores& scores);

}  // namespace cropwarp
