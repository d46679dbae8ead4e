#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cropwarp {

enum class QualityFlag { clear, cloud, shadow };

const char* to_string(QualityFlag flag);
QualityFlag quality_flag_from_string(const std::string& name);

// One vegetation-index trajectory: per sample a day-of-year, a value and a
// quality flag. Days are strictly increasing and the three arrays always
// have the same length.
struct Series {
  std::vector<int> days;
  std::vector<double> values;
  std::vector<QualityFlag> flags;

  std::size_t size() const { return days.size(); }
  bool empty() const { return days.empty(); }

  bool operator==(const Series&) const = default;
};

// Builds a Series and validates its invariants. Omitted flags default to
// clear.
Series make_series(std::vector<int> days, std::vector<double> values,
                   std::vector<QualityFlag> flags = {});

// Throws ValidationError if lengths differ or days are not strictly
// increasing.
void validate_series(const Series& s);

// Uniform day grid shared by all years of a study.
struct TimeGrid {
  int t_l = 0;
  int t_u = 0;
  int step = 1;

  int size() const { return (t_u - t_l) / step + 1; }
  int day_at(int i) const { return t_l + i * step; }
  std::vector<int> days() const;

  bool operator==(const TimeGrid&) const = default;
};

void validate_grid(const TimeGrid& g);

// The unit of classification: one field in one year. An empty label means
// the sample is unlabeled.
struct FieldSample {
  std::string field_id;
  int year = 0;
  std::string label;
  Series series;

  bool has_label() const { return !label.empty(); }
};

}  // namespace cropwarp
