#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cropwarp/types.hpp"
#include "cropwarp/vegindex.hpp"

namespace cropwarp {

// One pixel observation as read from the observations CSV. Either the full
// band set or a precomputed index value must be present.
struct ObservationRow {
  std::string field_id;
  int year = 0;
  int doy = 0;
  std::optional<double> blue, green, red, nir;
  QualityFlag qa = QualityFlag::clear;
  std::optional<double> vi;

  bool operator==(const ObservationRow&) const = default;
};

// Observations CSV, header required:
//   field_id,year,doy,blue,green,red,nir,qa,vi
// The doy column accepts either a day-of-year integer or an ISO date
// (YYYY-MM-DD, converted with leap years honored). Band cells or the vi
// cell may be empty, but not both.
std::vector<ObservationRow> parse_observations(std::istream& in);

// Writes rows back in the same schema; parse(write(rows)) == rows.
void write_observations(std::ostream& out, std::span<const ObservationRow> rows);

// (field_id, year) -> crop label.
using LabelTable = std::map<std::pair<std::string, int>, std::string>;

// Labels CSV: field_id,year,crop. Duplicate keys are rejected even when the
// labels agree.
LabelTable parse_labels(std::istream& in);

struct IngestStats {
  int labeled_fields_without_rows = 0;
};

// Aggregates pixel rows into one sample per (field, year): per acquisition
// day the sample value is the median of per-pixel index values, and the
// sample is flagged clear when at least one contributing pixel is clear
// (otherwise by the majority non-clear flag, ties toward cloud).
std::vector<FieldSample> build_field_samples(std::span<const ObservationRow> rows,
                                             const LabelTable& labels,
                                             IndexKind index,
                                             const IndexParams& params = {},
                                             IngestStats* stats = nullptr);

// Processed-dataset CSV used between pipeline stages, header:
//   field_id,year,doy,vi,label
// One row per retained grid day; label may be empty.
void write_processed(std::ostream& out, std::span<const FieldSample> samples);
std::vector<FieldSample> read_processed(std::istream& in);

// Re-expresses samples in the observations schema (vi column filled,
// bands empty), e.g. to export simulated data.
std::vector<ObservationRow> observation_rows_from_samples(std::span<const FieldSample> samples);

}  // namespace cropwarp
