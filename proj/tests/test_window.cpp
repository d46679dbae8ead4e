#include "doctest.h"

#include <cmath>

#include "cropwarp/errors.hpp"
#include "cropwarp/window.hpp"
#include "test_util.hpp"

using namespace cropwarp;
using testutil::from_values;

namespace {

FieldSample sample_on_grid(const std::string& id, const std::vector<double>& values,
                           const TimeGrid& grid) {
  FieldSample fs;
  fs.field_id = id;
  fs.year = 2013;
  Series s;
  s.days = grid.days();
  s.values = values;
  s.flags.assign(values.size(), QualityFlag::clear);
  fs.series = s;
  return fs;
}

// Two profiles identical outside [bump_lo, bump_hi]; inside, b rises above a
// by a smooth bump peaking at the midpoint. The shared base is constant so
// the expansion scores are exactly flat outside the bump.
std::pair<Series, Series> bump_profiles(const TimeGrid& grid, int bump_lo, int bump_hi,
                                        double height) {
  Series a, b;
  a.days = grid.days();
  for (int d : a.days) {
    double base = 0.3;
    a.values.push_back(base);
    double bump = 0.0;
    if (d > bump_lo && d < bump_hi) {
      double t = (d - bump_lo) / static_cast<double>(bump_hi - bump_lo);
      bump = height * std::sin(t * 3.14159265358979323846);
    }
    b.days.push_back(d);
    b.values.push_back(base + bump);
  }
  a.flags.assign(a.days.size(), QualityFlag::clear);
  b.flags.assign(b.days.size(), QualityFlag::clear);
  return {a, b};
}

}  // namespace

TEST_CASE("median profile") {
  TimeGrid grid{100, 102, 1};
  auto s1 = sample_on_grid("a", {0.1, 0.1, 0.1}, grid);
  auto s2 = sample_on_grid("b", {0.2, 0.9, 0.2}, grid);
  auto s3 = sample_on_grid("c", {0.9, 0.2, 0.9}, grid);

  std::vector<FieldSample> one{s2};
  CHECK(median_profile(one, grid).values == s2.series.values);

  std::vector<FieldSample> all{s1, s2, s3};
  Series med = median_profile(all, grid);
  CHECK(med.values == std::vector<double>{0.2, 0.2, 0.2});

  std::vector<FieldSample> permuted{s3, s1, s2};
  CHECK(median_profile(permuted, grid).values == med.values);

  CHECK_THROWS_AS(median_profile(std::vector<FieldSample>{}, grid), ValidationError);
}

TEST_CASE("pivot day picks the largest gap, earliest on ties") {
  Series a = from_values({0, 0, 1, 0});
  Series b = from_values({0, 0, 0, 0});
  CHECK(pivot_day(a, b) == 20);

  // total tie -> earliest day
  CHECK(pivot_day(b, b) == 0);

  Series c = from_values({0.1, 0.3, 0.3, 0.2});
  CHECK(pivot_day(c, b) == 10);  // first of the tied maxima

  CHECK_THROWS_AS(pivot_day(a, from_values({0, 0, 0})), ValidationError);
}

TEST_CASE("expansion scores") {
  WarpConfig cfg;
  TimeGrid grid{100, 160, 2};
  auto [a, b] = bump_profiles(grid, 120, 140, 0.4);
  int pivot = pivot_day(a, b);
  CHECK(pivot == 130);

  ExpansionScores scores = expansion_scores(a, b, pivot, cfg);
  std::size_t p = (130 - 100) / 2;
  // single-cell interval equals the absolute profile gap at the pivot
  CHECK(scores.left[p] ==
        doctest::Approx(std::fabs(a.values[p] - b.values[p])).epsilon(1e-12));
  CHECK(scores.right[p] == scores.left[p]);

  // identical profiles score zero everywhere
  ExpansionScores zero = expansion_scores(a, a, pivot, cfg);
  for (std::size_t i = 0; i <= p; ++i) CHECK(zero.left[i] == 0.0);
  for (std::size_t i = p; i < zero.days.size(); ++i) CHECK(zero.right[i] == 0.0);

  // beyond the bump the profiles agree, so the scores stop growing
  double at_bump_end = scores.right[(140 - 100) / 2];
  CHECK(scores.right.back() == doctest::Approx(at_bump_end).epsilon(1e-9));
}

TEST_CASE("optimal window boundary on the stated scan rule") {
  ExpansionScores scores;
  scores.pivot = 0;
  for (int i = 0; i < 7; ++i) scores.days.push_back(i * 10);
  scores.left.assign(7, std::numeric_limits<double>::quiet_NaN());
  scores.left[0] = 0.0;
  scores.right = {0, 0.1, 0.4, 0.8, 1.0, 1.0, 1.0};

  WindowPolicy policy;
  policy.eps1 = 1e-6;
  policy.eps2 = 1e-6;
  policy.smoothing_width = 1;  // scan the raw curve
  PairWindow w = optimal_window(scores, policy);
  CHECK(w.o2 == 40);  // the first 1.0
  CHECK(w.o1 == 0);
  CHECK(!w.no_plateau);
}

TEST_CASE("all-zero scores stop at the pivot") {
  ExpansionScores scores;
  scores.pivot = 30;
  for (int i = 0; i < 7; ++i) scores.days.push_back(i * 10);
  scores.left.assign(7, std::numeric_limits<double>::quiet_NaN());
  scores.right.assign(7, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i <= 3; ++i) scores.left[i] = 0.0;
  for (int i = 3; i < 7; ++i) scores.right[i] = 0.0;

  PairWindow w = optimal_window(scores, WindowPolicy{});
  CHECK(w.o1 == 30);
  CHECK(w.o2 == 30);
}

TEST_CASE("strictly increasing scores fall back to the full span") {
  ExpansionScores scores;
  scores.pivot = 0;
  for (int i = 0; i < 10; ++i) {
    scores.days.push_back(i * 10);
    scores.right.push_back(0.2 * i * i);  // accelerating, never flat
    scores.left.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  scores.left[0] = 0.0;

  PairWindow w = optimal_window(scores, WindowPolicy{});
  CHECK(w.no_plateau);
  CHECK(w.o2 == 90);  // span end
}

TEST_CASE("optimal window is invariant to a common profile offset") {
  WarpConfig cfg;
  TimeGrid grid{100, 200, 1};
  auto [a, b] = bump_profiles(grid, 130, 170, 0.35);
  int pivot = pivot_day(a, b);
  WindowPolicy policy;
  PairWindow w1 = optimal_window(expansion_scores(a, b, pivot, cfg), policy);

  Series a2 = a, b2 = b;
  for (double& v : a2.values) v += 0.25;
  for (double& v : b2.values) v += 0.25;
  PairWindow w2 = optimal_window(expansion_scores(a2, b2, pivot_day(a2, b2), cfg), policy);
  CHECK(w1.o1 == w2.o1);
  CHECK(w1.o2 == w2.o2);
  CHECK(w1.pivot == w2.pivot);
}

TEST_CASE("multiclass policies") {
  WarpConfig cfg;
  TimeGrid grid{100, 300, 1};
  auto [a, b] = bump_profiles(grid, 170, 227, 0.4);
  auto [c, d] = bump_profiles(grid, 180, 240, 0.4);
  (void)c;

  std::map<std::string, Series> profiles{{"corn", b}, {"cotton", a}, {"soy", d}};
  WindowPolicy policy;

  WindowResult min_len = multiclass_window(profiles, policy, cfg);
  REQUIRE(min_len.per_pair.size() == 3);

  policy.kind = WindowPolicyKind::union_hull;
  WindowResult hull = multiclass_window(profiles, policy, cfg);
  CHECK(hull.o1 <= min_len.o1);
  CHECK(hull.o2 >= min_len.o2);
  int min_observed = std::numeric_limits<int>::max();
  for (const auto& [key, w] : min_len.per_pair) {
    (void)key;
    min_observed = std::min(min_observed, w.o2 - w.o1);
    CHECK(hull.o1 <= w.o1);
    CHECK(hull.o2 >= w.o2);
  }
  CHECK(min_len.o2 - min_len.o1 == min_observed);

  std::map<std::string, Series> single{{"corn", b}};
  CHECK_THROWS_AS(multiclass_window(single, policy, cfg), ValidationError);
}

TEST_CASE("crop series to window") {
  Series s;
  for (int d = 160; d <= 300; ++d) {
    s.days.push_back(d);
    s.values.push_back(0.1);
    s.flags.push_back(QualityFlag::clear);
  }
  Series full = crop_series_to_window(s, 160, 300);
  CHECK(full == s);

  Series cut = crop_series_to_window(s, 170, 227);
  CHECK(cut.size() == 58);
  CHECK(cut.days.front() == 170);
  CHECK(cut.days.back() == 227);

  CHECK_THROWS_AS(crop_series_to_window(s, 100, 150), CoverageError);
  CHECK_THROWS_AS(crop_series_to_window(s, 100, 400), CoverageError);
}

TEST_CASE("score curve csv shape") {
  WarpConfig cfg;
  TimeGrid grid{100, 120, 5};
  auto [a, b] = bump_profiles(grid, 105, 115, 0.2);
  ExpansionScores scores = expansion_scores(a, b, pivot_day(a, b), cfg);
  std::string csv = score_curve_csv(scores);
  CHECK(csv.rfind("day,score_left,score_right\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5);
}
