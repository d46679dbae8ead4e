#pragma once

#include <string>

namespace cropwarp {

enum class IndexKind { ndvi, savi, osavi, msavi, evi, wdrvi, endvi };

const char* to_string(IndexKind kind);
IndexKind index_kind_from_string(const std::string& name);

// Standard-literature constants; all overridable.
struct IndexParams {
  double savi_l = 0.5;
  double osavi_l = 0.16;
  double wdrvi_alpha = 0.2;
  double evi_g = 2.5;
  double evi_c1 = 6.0;
  double evi_c2 = 7.5;
  double evi_l = 1.0;
};

// Computes one vegetation index from surface reflectances. Bands the chosen
// index does not use are ignored. Throws DomainError on a zero denominator
// or (for MSAVI) a negative radicand.
double compute_index(IndexKind kind, double blue, double green, double red,
                     double nir, const IndexParams& params = {});

}  // namespace cropwarp
