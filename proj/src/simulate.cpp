#include "cropwarp/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "cropwarp/errors.hpp"
#include "cropwarp/rng.hpp"

namespace cropwarp {

namespace {

constexpr double kClipLo = -0.2;
constexpr double kClipHi = 1.0;

double draw_range(Rng& rng, const std::pair<double, double>& range) {
  return rng.uniform(range.first, range.second);
}

}  // namespace

ScenarioRange scenario_preset(const std::string& name) {
  ScenarioRange r;
  if (name == "identity") return r;
  if (name == "s1") {  // sowing / growth shift
    r.shift_days = {-10, 10};
    return r;
  }
  if (name == "s2") {  // illumination gain
    r.gain = {0.85, 1.15};
    return r;
  }
  if (name == "s3") {
    r.shift_days = {-10, 10};
    r.gain = {0.85, 1.15};
    return r;
  }
  if (name == "s4") {
    r.shift_days = {-10, 10};
    r.gain = {0.85, 1.15};
    r.noise_sd = 0.02;
    return r;
  }
  throw ValidationError("unknown scenario preset '" + name +
                        "' (expected identity|s1|s2|s3|s4)");
}

ClassSpec corn_like() {
  ClassSpec spec;
  spec.name = "corn";
  // Second crop after a winter harvest: late green-up, steep slopes. The
  // shared levels put all discrimination into the season timing.
  spec.base = SigmoidParams{0.15, 0.85, 183, 265, 0.25, 0.30};
  spec.sowing_jitter_sd = 6.0;
  spec.gain_lo = 0.80;
  spec.gain_hi = 1.20;
  spec.value_noise_sd = 0.005;
  return spec;
}

ClassSpec cotton_like() {
  ClassSpec spec;
  spec.name = "cotton";
  spec.base = SigmoidParams{0.15, 0.85, 165, 270, 0.12, 0.20};
  spec.sowing_jitter_sd = 6.0;
  spec.gain_lo = 0.80;
  spec.gain_hi = 1.20;
  spec.value_noise_sd = 0.005;
  return spec;
}

Series synth_profile(const ClassSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
  validate_sigmoid(spec.base);
  validate_grid(grid);
  if (spec.sowing_jitter_sd < 0 || spec.value_noise_sd < 0 || spec.gain_lo <= 0 ||
      spec.gain_lo > spec.gain_hi) {
    throw ParamError("invalid class spec '" + spec.name + "'");
  }

  Rng rng(seed);
  double jitter = spec.sowing_jitter_sd > 0 ? rng.gaussian(0.0, spec.sowing_jitter_sd) : 0.0;
  double gain = rng.uniform(spec.gain_lo, spec.gain_hi);
  SigmoidParams p = spec.base;
  p.s1 += jitter;
  p.s2 += jitter;

  Series out;
  for (int d = grid.t_l; d <= grid.t_u; d += grid.step) {
    double v = gain * eval_double_sigmoid_at(p, static_cast<double>(d));
    if (spec.value_noise_sd > 0) v += rng.gaussian(0.0, spec.value_noise_sd);
    out.days.push_back(d);
    out.values.push_back(std::clamp(v, kClipLo, kClipHi));
    out.flags.push_back(QualityFlag::clear);
  }
  return out;
}

Series apply_scenario(const Series& series, const Scenario& sc, std::uint64_t seed) {
  validate_series(series);
  if (series.empty()) throw ValidationError("cannot perturb an empty series");
  if (sc.gain <= 0) throw ParamError("scenario gain must be positive");

  double first = series.days.front() + sc.shift_days;
  double last = series.days.back() + sc.shift_days;
  if (last < series.days.front() || first > series.days.back()) {
    throw CoverageError("shift of " + std::to_string(sc.shift_days) +
                        " days pushes the series outside its own span");
  }

  Rng rng(seed);
  Series out = series;
  for (std::size_t i = 0; i < series.size(); ++i) {
    double v;
    if (sc.shift_days == 0.0) {
      v = series.values[i];
    } else {
      // Interpolate the shifted curve back onto the original days; past the
      // shifted support the boundary value extends (phenology plateaus).
      double query = static_cast<double>(series.days[i]) - sc.shift_days;
      if (query <= series.days.front()) {
        v = series.values.front();
      } else if (query >= series.days.back()) {
        v = series.values.back();
      } else {
        auto hi = std::upper_bound(series.days.begin(), series.days.end(), query);
        std::size_t h = static_cast<std::size_t>(hi - series.days.begin());
        std::size_t l = h - 1;
        double t = (query - series.days[l]) /
                   static_cast<double>(series.days[h] - series.days[l]);
        v = std::lerp(series.values[l], series.values[h], t);
      }
    }
    v = sc.gain * v + sc.offset;
    if (sc.noise_sd > 0) v += rng.gaussian(0.0, sc.noise_sd);
    out.values[i] = v;
  }
  return out;
}

SimulatedDataset generate_dataset(std::span<const ClassSpec> specs, int fields_per_class,
                                  const TimeGrid& grid, const ScenarioRange& year_a,
                                  const ScenarioRange& year_b, int year_a_num,
                                  int year_b_num, std::uint64_t seed) {
  if (specs.empty()) throw ParamError("generate_dataset needs at least one class spec");
  if (fields_per_class < 1) throw ParamError("fields_per_class must be >= 1");

  auto make_year = [&](const ScenarioRange& range, int year_num,
                       std::uint64_t year_tag) {
    std::vector<FieldSample> fields;
    fields.reserve(specs.size() * static_cast<std::size_t>(fields_per_class));
    for (std::size_t c = 0; c < specs.size(); ++c) {
      for (int f = 0; f < fields_per_class; ++f) {
        // The base phenology depends only on (seed, class, field): the same
        // field keeps its character across years.
        std::uint64_t base_seed = mix_seed(seed, c, static_cast<std::uint64_t>(f));
        Series base = synth_profile(specs[c], grid, base_seed);

        std::uint64_t sc_seed = mix_seed(base_seed, year_tag);
        Rng sc_rng(sc_seed);
        Scenario sc;
        sc.shift_days = draw_range(sc_rng, range.shift_days);
        sc.gain = draw_range(sc_rng, range.gain);
        sc.offset = draw_range(sc_rng, range.offset);
        sc.noise_sd = range.noise_sd;

        FieldSample fs;
        fs.field_id = specs[c].name + "_" + std::to_string(f);
        fs.year = year_num;
        fs.label = specs[c].name;
        fs.series = apply_scenario(base, sc, mix_seed(sc_seed, 1));

        if (range.cloud_fraction > 0) {
          Rng cloud_rng(mix_seed(sc_seed, 2));
          for (auto& flag : fs.series.flags) {
            if (cloud_rng.uniform01() < range.cloud_fraction) flag = QualityFlag::cloud;
          }
        }
        fields.push_back(std::move(fs));
      }
    }
    return fields;
  };

  SimulatedDataset out;
  out.year_a = make_year(year_a, year_a_num, 11);
  out.year_b = make_year(year_b, year_b_num, 22);
  return out;
}

}  // namespace cropwarp
