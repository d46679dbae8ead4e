#include "doctest.h"

#include <cmath>

#include "cropwarp/errors.hpp"
#include "cropwarp/vegindex.hpp"

using namespace cropwarp;

TEST_CASE("ndvi matches its definition") {
  CHECK(compute_index(IndexKind::ndvi, 0, 0, 0.1, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("msavi reduces to zero when nir equals red") {
  // radical collapses to 2*nir+1 exactly
  CHECK(compute_index(IndexKind::msavi, 0, 0, 0.3, 0.3) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("msavi formula evaluation") {
  double v = compute_index(IndexKind::msavi, 0, 0, 0.1, 0.5);
  // oracle: (2*nir+1 - sqrt((2*nir+1)^2 - 8*(nir-red)))/2 evaluated directly
  double expect = (2.0 * 0.5 + 1.0 - std::sqrt((2.0 * 0.5 + 1.0) * (2.0 * 0.5 + 1.0) -
                                               8.0 * (0.5 - 0.1))) /
                  2.0;
  CHECK(v == doctest::Approx(expect).epsilon(1e-14));
  CHECK(v == doctest::Approx(0.5528).epsilon(1e-4));
}

TEST_CASE("savi and osavi use their soil factors") {
  IndexParams p;
  double savi = compute_index(IndexKind::savi, 0, 0, 0.1, 0.5, p);
  CHECK(savi == doctest::Approx(1.5 * 0.4 / 1.1).epsilon(1e-12));
  double osavi = compute_index(IndexKind::osavi, 0, 0, 0.1, 0.5, p);
  CHECK(osavi == doctest::Approx(1.16 * 0.4 / 0.76).epsilon(1e-12));
}

TEST_CASE("evi, wdrvi and endvi formulas") {
  IndexParams p;
  double evi = compute_index(IndexKind::evi, 0.05, 0, 0.1, 0.5, p);
  CHECK(evi == doctest::Approx(2.5 * 0.4 / (0.5 + 0.6 - 0.375 + 1.0)).epsilon(1e-12));
  double wdrvi = compute_index(IndexKind::wdrvi, 0, 0, 0.1, 0.5, p);
  CHECK(wdrvi == doctest::Approx((0.1 - 0.1) / (0.1 + 0.1)).epsilon(1e-12));
  double endvi = compute_index(IndexKind::endvi, 0.05, 0.2, 0, 0.5, p);
  CHECK(endvi == doctest::Approx((0.7 - 0.1) / (0.7 + 0.1)).epsilon(1e-12));
}

TEST_CASE("zero denominators are domain errors") {
  CHECK_THROWS_AS(compute_index(IndexKind::ndvi, 0, 0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(compute_index(IndexKind::wdrvi, 0, 0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(compute_index(IndexKind::ndvi, 0, 0, std::nan(""), 0.5), DomainError);
}

TEST_CASE("ndvi and wdrvi stay in [-1, 1] over the reflectance grid") {
  for (int r = 0; r <= 20; ++r) {
    for (int n = 0; n <= 20; ++n) {
      double red = r / 20.0, nir = n / 20.0;
      if (red + nir == 0.0) continue;
      double ndvi = compute_index(IndexKind::ndvi, 0, 0, red, nir);
      CHECK(ndvi >= -1.0);
      CHECK(ndvi <= 1.0);
      double wdrvi = compute_index(IndexKind::wdrvi, 0, 0, red, nir);
      CHECK(wdrvi >= -1.0);
      CHECK(wdrvi <= 1.0);
    }
  }
}

TEST_CASE("msavi radicand is nonnegative over the reflectance grid") {
  for (int r = 0; r <= 40; ++r) {
    for (int n = 0; n <= 40; ++n) {
      double red = r / 40.0, nir = n / 40.0;
      double t = 2.0 * nir + 1.0;
      CHECK(t * t - 8.0 * (nir - red) >= 0.0);
      CHECK_NOTHROW(compute_index(IndexKind::msavi, 0, 0, red, nir));
    }
  }
}

TEST_CASE("ndvi is invariant to common scaling") {
  for (double c : {0.5, 2.0, 7.5}) {
    double base = compute_index(IndexKind::ndvi, 0, 0, 0.12, 0.43);
    double scaled = compute_index(IndexKind::ndvi, 0, 0, c * 0.12, c * 0.43);
    CHECK(scaled == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("index names round-trip") {
  for (auto kind : {IndexKind::ndvi, IndexKind::savi, IndexKind::osavi, IndexKind::msavi,
                    IndexKind::evi, IndexKind::wdrvi, IndexKind::endvi}) {
    CHECK(index_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(index_kind_from_string("nvdi"), ValidationError);
}
