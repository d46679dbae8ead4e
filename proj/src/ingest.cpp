#include "cropwarp/ingest.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cropwarp/errors.hpp"
#include "csv_detail.hpp"

namespace cropwarp {

namespace {

using detail::format_double;
using detail::format_optional;
using detail::parse_double;
using detail::parse_int;
using detail::split_csv;

const char* kObservationHeader = "field_id,year,doy,blue,green,red,nir,qa,vi";
const char* kProcessedHeader = "field_id,year,doy,vi,label";

bool is_leap(int year) {
  return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
}

// Converts YYYY-MM-DD to a day-of-year.
int iso_to_doy(const std::string& text, int row_year, int row_no) {
  int y = 0, m = 0, d = 0;
  std::size_t p1 = text.find('-');
  std::size_t p2 = p1 == std::string::npos ? std::string::npos : text.find('-', p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos ||
      !parse_int(std::string_view(text).substr(0, p1), y) ||
      !parse_int(std::string_view(text).substr(p1 + 1, p2 - p1 - 1), m) ||
      !parse_int(std::string_view(text).substr(p2 + 1), d)) {
    throw ValidationError("row " + std::to_string(row_no) + ": bad date '" + text + "'");
  }
  static const int days_in_month[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12) {
    throw ValidationError("row " + std::to_string(row_no) + ": bad month in '" + text + "'");
  }
  int dim = days_in_month[m - 1] + (m == 2 && is_leap(y) ? 1 : 0);
  if (d < 1 || d > dim) {
    throw ValidationError("row " + std::to_string(row_no) + ": bad day in '" + text + "'");
  }
  if (y != row_year) {
    throw ValidationError("row " + std::to_string(row_no) + ": date year " +
                          std::to_string(y) + " disagrees with year column " +
                          std::to_string(row_year));
  }
  int doy = d;
  for (int i = 0; i < m - 1; ++i) doy += days_in_month[i];
  if (m > 2 && is_leap(y)) doy += 1;
  return doy;
}

std::optional<double> parse_optional_cell(const std::string& cell, const char* col, int row_no) {
  if (cell.empty()) return std::nullopt;
  double v = 0;
  if (!parse_double(cell, v)) {
    throw ValidationError("row " + std::to_string(row_no) + ": unparseable " +
                          std::string(col) + " value '" + cell + "'");
  }
  return v;
}

void require_header(const std::string& line, const char* expected, const char* what) {
  std::string got = line;
  if (!got.empty() && got.back() == '\r') got.pop_back();
  if (got != expected) {
    throw SchemaError(std::string(what) + " header must be '" + expected + "', got '" +
                      got + "'");
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

std::vector<ObservationRow> parse_observations(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty observations file (no header)");
  require_header(line, kObservationHeader, "observations");

  std::vector<ObservationRow> rows;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv(line);
    if (cells.size() != 9) {
      throw ValidationError("row " + std::to_string(row_no) + ": expected 9 cells, got " +
                            std::to_string(cells.size()));
    }
    ObservationRow row;
    row.field_id = cells[0];
    if (row.field_id.empty()) {
      throw ValidationError("row " + std::to_string(row_no) + ": empty field_id");
    }
    if (!parse_int(cells[1], row.year)) {
      throw ValidationError("row " + std::to_string(row_no) + ": unparseable year '" +
                            cells[1] + "'");
    }
    if (cells[2].find('-') != std::string::npos) {
      row.doy = iso_to_doy(cells[2], row.year, row_no);
    } else if (!parse_int(cells[2], row.doy)) {
      throw ValidationError("row " + std::to_string(row_no) + ": unparseable doy '" +
                            cells[2] + "'");
    }
    if (row.doy < 1 || row.doy > 366) {
      throw ValidationError("row " + std::to_string(row_no) + ": doy " +
                            std::to_string(row.doy) + " outside [1, 366]");
    }
    row.blue = parse_optional_cell(cells[3], "blue", row_no);
    row.green = parse_optional_cell(cells[4], "green", row_no);
    row.red = parse_optional_cell(cells[5], "red", row_no);
    row.nir = parse_optional_cell(cells[6], "nir", row_no);
    try {
      row.qa = quality_flag_from_string(cells[7]);
    } catch (const ValidationError&) {
      throw ValidationError("row " + std::to_string(row_no) + ": bad qa '" + cells[7] + "'");
    }
    row.vi = parse_optional_cell(cells[8], "vi", row_no);

    bool has_bands = row.blue && row.green && row.red && row.nir;
    if (!has_bands && !row.vi) {
      throw ValidationError("row " + std::to_string(row_no) +
                            ": needs either all four bands or a vi value");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_observations(std::ostream& out, std::span<const ObservationRow> rows) {
  out << kObservationHeader << '\n';
  for (const auto& r : rows) {
    out << r.field_id << ',' << r.year << ',' << r.doy << ',' << format_optional(r.blue)
        << ',' << format_optional(r.green) << ',' << format_optional(r.red) << ','
        << format_optional(r.nir) << ',' << to_string(r.qa) << ',' << format_optional(r.vi)
        << '\n';
  }
}

LabelTable parse_labels(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty labels file (no header)");
  require_header(line, "field_id,year,crop", "labels");

  LabelTable table;
  std::map<std::pair<std::string, int>, int> first_row;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv(line);
    if (cells.size() != 3) {
      throw ValidationError("labels row " + std::to_string(row_no) + ": expected 3 cells");
    }
    int year = 0;
    if (!parse_int(cells[1], year)) {
      throw ValidationError("labels row " + std::to_string(row_no) + ": unparseable year '" +
                            cells[1] + "'");
    }
    auto key = std::make_pair(cells[0], year);
    auto [it, inserted] = table.emplace(key, cells[2]);
    if (!inserted) {
      throw ConflictError("duplicate label for (" + cells[0] + ", " + cells[1] + "): rows " +
                          std::to_string(first_row[key]) + " and " + std::to_string(row_no));
    }
    first_row[key] = row_no;
  }
  return table;
}

std::vector<FieldSample> build_field_samples(std::span<const ObservationRow> rows,
                                             const LabelTable& labels, IndexKind index,
                                             const IndexParams& params, IngestStats* stats) {
  struct DayAccum {
    std::vector<double> values;
    int clear = 0, cloud = 0, shadow = 0;
  };
  // (field, year) -> doy -> pixel values
  std::map<std::pair<std::string, int>, std::map<int, DayAccum>> groups;

  for (const auto& row : rows) {
    double vi = row.vi ? *row.vi
                       : compute_index(index, *row.blue, *row.green, *row.red, *row.nir, params);
    auto& acc = groups[{row.field_id, row.year}][row.doy];
    acc.values.push_back(vi);
    switch (row.qa) {
      case QualityFlag::clear: acc.clear++; break;
      case QualityFlag::cloud: acc.cloud++; break;
      case QualityFlag::shadow: acc.shadow++; break;
    }
  }

  std::vector<FieldSample> samples;
  samples.reserve(groups.size());
  for (auto& [key, by_day] : groups) {
    FieldSample fs;
    fs.field_id = key.first;
    fs.year = key.second;
    auto label_it = labels.find(key);
    if (label_it != labels.end()) fs.label = label_it->second;
    for (auto& [doy, acc] : by_day) {
      fs.series.days.push_back(doy);
      fs.series.values.push_back(median_of(acc.values));
      QualityFlag flag;
      if (acc.clear > 0) {
        flag = QualityFlag::clear;
      } else {
        // majority of the non-clear flags, ties toward cloud
        flag = acc.shadow > acc.cloud ? QualityFlag::shadow : QualityFlag::cloud;
      }
      fs.series.flags.push_back(flag);
    }
    samples.push_back(std::move(fs));
  }

  if (stats) {
    stats->labeled_fields_without_rows = 0;
    for (const auto& [key, crop] : labels) {
      (void)crop;
      if (!groups.contains(key)) stats->labeled_fields_without_rows++;
    }
  }
  return samples;
}

void write_processed(std::ostream& out, std::span<const FieldSample> samples) {
  out << kProcessedHeader << '\n';
  for (const auto& fs : samples) {
    for (std::size_t i = 0; i < fs.series.size(); ++i) {
      out << fs.field_id << ',' << fs.year << ',' << fs.series.days[i] << ','
          << format_double(fs.series.values[i]) << ',' << fs.label << '\n';
    }
  }
}

std::vector<FieldSample> read_processed(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty processed file (no header)");
  require_header(line, kProcessedHeader, "processed dataset");

  std::map<std::pair<std::string, int>, FieldSample> by_key;
  std::vector<std::pair<std::string, int>> order;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv(line);
    if (cells.size() != 5) {
      throw ValidationError("processed row " + std::to_string(row_no) + ": expected 5 cells");
    }
    int year = 0, doy = 0;
    double vi = 0;
    if (!parse_int(cells[1], year) || !parse_int(cells[2], doy) || !parse_double(cells[3], vi)) {
      throw ValidationError("processed row " + std::to_string(row_no) + ": unparseable numerics");
    }
    auto key = std::make_pair(cells[0], year);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      FieldSample fs;
      fs.field_id = cells[0];
      fs.year = year;
      fs.label = cells[4];
      it = by_key.emplace(key, std::move(fs)).first;
      order.push_back(key);
    }
    it->second.series.days.push_back(doy);
    it->second.series.values.push_back(vi);
    it->second.series.flags.push_back(QualityFlag::clear);
  }

  std::vector<FieldSample> samples;
  samples.reserve(order.size());
  for (const auto& key : order) {
    FieldSample& fs = by_key[key];
    validate_series(fs.series);
    samples.push_back(std::move(fs));
  }
  return samples;
}

std::vector<ObservationRow> observation_rows_from_samples(std::span<const FieldSample> samples) {
  std::vector<ObservationRow> rows;
  for (const auto& fs : samples) {
    for (std::size_t i = 0; i < fs.series.size(); ++i) {
      ObservationRow row;
      row.field_id = fs.field_id;
      row.year = fs.year;
      row.doy = fs.series.days[i];
      row.qa = fs.series.flags[i];
      row.vi = fs.series.values[i];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace cropwarp
