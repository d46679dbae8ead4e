#include "cropwarp/types.hpp"

#include "cropwarp/errors.hpp"

namespace cropwarp {

const char* to_string(QualityFlag flag) {
  switch (flag) {
    case QualityFlag::clear: return "clear";
    case QualityFlag::cloud: return "cloud";
    case QualityFlag::shadow: return "shadow";
  }
  return "clear";
}

QualityFlag quality_flag_from_string(const std::string& name) {
  if (name == "clear") return QualityFlag::clear;
  if (name == "cloud") return QualityFlag::cloud;
  if (name == "shadow") return QualityFlag::shadow;
  throw ValidationError("unknown quality flag '" + name + "' (expected clear|cloud|shadow)");
}

Series make_series(std::vector<int> days, std::vector<double> values,
                   std::vector<QualityFlag> flags) {
  if (flags.empty()) flags.assign(days.size(), QualityFlag::clear);
  Series s{std::move(days), std::move(values), std::move(flags)};
  validate_series(s);
  return s;
}

void validate_series(const Series& s) {
  if (s.values.size() != s.days.size() || s.flags.size() != s.days.size()) {
    throw ValidationError("series arrays have mismatched lengths");
  }
  for (std::size_t i = 1; i < s.days.size(); ++i) {
    if (s.days[i] <= s.days[i - 1]) {
      throw ValidationError("series days must be strictly increasing (day " +
                            std::to_string(s.days[i]) + " follows " +
                            std::to_string(s.days[i - 1]) + ")");
    }
  }
}

std::vector<int> TimeGrid::days() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int d = t_l; d <= t_u; d += step) out.push_back(d);
  return out;
}

void validate_grid(const TimeGrid& g) {
  if (g.step < 1) throw ParamError("grid step must be >= 1");
  if (g.t_l >= g.t_u) throw ParamError("grid requires t_l < t_u");
}

}  // namespace cropwarp
