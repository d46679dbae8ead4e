#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cropwarp/preprocess.hpp"
#include "cropwarp/types.hpp"

namespace cropwarp {

// Generator for one crop class: a double-sigmoid base curve plus per-field
// variability (sowing-day jitter, multiplicative gain, value noise).
struct ClassSpec {
  std::string name;
  SigmoidParams base;
  double sowing_jitter_sd = 0;  // days, gaussian
  double gain_lo = 1.0;         // per-field gain, uniform
  double gain_hi = 1.0;
  double value_noise_sd = 0;
};

// A fixed perturbation applied to one series: shift the curve in time,
// rescale, offset, add noise.
struct Scenario {
  double shift_days = 0;
  double gain = 1.0;
  double offset = 0;
  double noise_sd = 0;
};

// Ranges a per-field Scenario is drawn from. Degenerate ranges give the
// same systematic perturbation to every field.
struct ScenarioRange {
  std::pair<double, double> shift_days{0, 0};
  std::pair<double, double> gain{1, 1};
  std::pair<double, double> offset{0, 0};
  double noise_sd = 0;
  double cloud_fraction = 0;  // fraction of samples flagged cloud
};

// identity, s1 (shift only), s2 (gain only), s3 (gain+shift),
// s4 (gain+shift+noise).
ScenarioRange scenario_preset(const std::string& name);

// Default class shapes: a late, steep season (second crop after a winter
// harvest) and an earlier season with a long plateau and gentler slopes.
ClassSpec corn_like();
ClassSpec cotton_like();

// One synthetic field: jittered double sigmoid, scaled, noised, clipped to
// [-0.2, 1.0]. Same seed, same series.
Series synth_profile(const ClassSpec& spec, const TimeGrid& grid, std::uint64_t seed);

// Shifts the curve by shift_days (re-interpolated back onto the original
// days, extending the boundary values), then applies value = gain*value +
// offset + noise. Throws CoverageError when the shifted support no longer
// overlaps the original days.
Series apply_scenario(const Series& series, const Scenario& sc, std::uint64_t seed);

struct SimulatedDataset {
  std::vector<FieldSample> year_a;
  std::vector<FieldSample> year_b;
};

// Two labeled synthetic years over the same fields: each field has one base
// phenology (shared across years) and one per-year scenario draw. Fully
// deterministic in the seed; identity ranges make the years identical.
SimulatedDataset generate_dataset(std::span<const ClassSpec> specs, int fields_per_class,
                                  const TimeGrid& grid, const ScenarioRange& year_a,
                                  const ScenarioRange& year_b, int year_a_num,
                                  int year_b_num, std::uint64_t seed);

}  // namespace cropwarp
