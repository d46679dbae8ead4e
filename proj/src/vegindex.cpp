#include "cropwarp/vegindex.hpp"

#include <cmath>

#include "cropwarp/errors.hpp"

namespace cropwarp {

const char* to_string(IndexKind kind) {
  switch (kind) {
    case IndexKind::ndvi: return "ndvi";
    case IndexKind::savi: return "savi";
    case IndexKind::osavi: return "osavi";
    case IndexKind::msavi: return "msavi";
    case IndexKind::evi: return "evi";
    case IndexKind::wdrvi: return "wdrvi";
    case IndexKind::endvi: return "endvi";
  }
  return "msavi";
}

IndexKind index_kind_from_string(const std::string& name) {
  if (name == "ndvi") return IndexKind::ndvi;
  if (name == "savi") return IndexKind::savi;
  if (name == "osavi") return IndexKind::osavi;
  if (name == "msavi") return IndexKind::msavi;
  if (name == "evi") return IndexKind::evi;
  if (name == "wdrvi") return IndexKind::wdrvi;
  if (name == "endvi") return IndexKind::endvi;
  throw ValidationError("unknown vegetation index '" + name + "'");
}

namespace {

double ratio(double num, double den, const char* what) {
  if (den == 0.0) throw DomainError(std::string("zero denominator in ") + what);
  return num / den;
}

}  // namespace

double compute_index(IndexKind kind, double blue, double green, double red,
                     double nir, const IndexParams& p) {
  if (!std::isfinite(blue) || !std::isfinite(green) || !std::isfinite(red) ||
      !std::isfinite(nir)) {
    throw DomainError("non-finite reflectance");
  }
  switch (kind) {
    case IndexKind::ndvi:
      return ratio(nir - red, nir + red, "NDVI");
    case IndexKind::savi:
      return (1.0 + p.savi_l) * ratio(nir - red, nir + red + p.savi_l, "SAVI");
    case IndexKind::osavi:
      return (1.0 + p.osavi_l) * ratio(nir - red, nir + red + p.osavi_l, "OSAVI");
    case IndexKind::msavi: {
      // Self-calibrating soil line: the radicand is nonnegative for
      // reflectances in [0, 1].
      double t = 2.0 * nir + 1.0;
      double radicand = t * t - 8.0 * (nir - red);
      if (radicand < 0.0) throw DomainError("negative radicand in MSAVI");
      return (t - std::sqrt(radicand)) / 2.0;
    }
    case IndexKind::evi:
      return p.evi_g * ratio(nir - red, nir + p.evi_c1 * red - p.evi_c2 * blue + p.evi_l, "EVI");
    case IndexKind::wdrvi:
      return ratio(p.wdrvi_alpha * nir - red, p.wdrvi_alpha * nir + red, "WDRVI");
    case IndexKind::endvi:
      return ratio((nir + green) - 2.0 * blue, (nir + green) + 2.0 * blue, "ENDVI");
  }
  throw DomainError("unhandled index kind");
}

}  // namespace cropwarp
