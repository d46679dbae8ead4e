#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cropwarp/distance.hpp"
#include "cropwarp/types.hpp"

namespace cropwarp {

enum class ClassifierMode { nearest_neighbor, median_template };

const char* to_string(ClassifierMode mode);
ClassifierMode classifier_mode_from_string(const std::string& name);

struct ExperimentConfig {
  WarpConfig warp;
  int train_year = 0;
  int test_year = 0;  // == train_year -> same-year protocol with exclusion
  int samples_per_class = 50;
  int replications = 100;
  std::uint64_t seed = 0;
  ClassifierMode mode = ClassifierMode::nearest_neighbor;
  std::optional<std::pair<int, int>> window;  // restrict series to [o1, o2]
  int threads = 1;
};

// Rows are predictions, columns are observations. Counts are doubles so the
// same type can carry replication means.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> classes);

  void add(const std::string& predicted, const std::string& observed, double weight = 1.0);
  void add_matrix(const ConfusionMatrix& other);
  void scale(double factor);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t index_of(const std::string& label) const;  // throws on unknown label
  double count(std::size_t pred, std::size_t obs) const;
  double row_sum(std::size_t pred) const;
  double col_sum(std::size_t obs) const;
  double trace() const;
  double total() const;

 private:
  std::vector<std::string> classes_;
  std::map<std::string, std::size_t> index_;
  std::vector<double> counts_;
};

// Class list inferred from the data (sorted unique labels of both arrays).
ConfusionMatrix confusion(std::span<const std::string> predictions,
                          std::span<const std::string> truth);
// Fixed class list; an unknown label throws ValidationError.
ConfusionMatrix confusion(std::span<const std::string> predictions,
                          std::span<const std::string> truth,
                          std::vector<std::string> classes);

// Per-matrix metrics. A class with a zero row/column sum gets NaN for the
// affected accuracy and is excluded from any averaging.
struct MetricsSummary {
  double overall_accuracy = 0;
  double kappa = 0;
  std::vector<double> users_accuracy;      // per class, row-wise
  std::vector<double> producers_accuracy;  // per class, column-wise
};

MetricsSummary metrics(const ConfusionMatrix& cm);

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;  // complement, for the same-year protocol
};

// Draws exactly k random samples per class (without replacement, seeded).
// Throws ValidationError when a class has fewer than k samples.
SplitResult stratified_sample(std::span<const FieldSample> dataset, int k,
                              std::uint64_t seed);

// 1-NN under the configured measure. Ties resolve by smaller distance, then
// lexicographic label, then field id, then position. Throws
// UnclassifiableError when every candidate distance is non-finite.
std::string nn_classify(const Series& test, std::span<const FieldSample> train,
                        const WarpConfig& cfg);

struct ClassTemplate {
  std::string label;
  Series series;
};

// Same contract as nn_classify with one median template per class.
std::string template_classify(const Series& test,
                              std::span<const ClassTemplate> templates,
                              const WarpConfig& cfg);

// Batch 1-NN over many test series; thread count never changes the result.
std::vector<std::string> nn_classify_batch(std::span<const FieldSample> tests,
                                           std::span<const FieldSample> train,
                                           const WarpConfig& cfg, int threads = 1);

struct MetricsReport {
  std::vector<std::string> classes;
  double overall_accuracy = 0;  // means over replications
  double kappa = 0;
  std::vector<double> users_accuracy;
  std::vector<double> producers_accuracy;
  std::vector<double> replication_oa;
  std::vector<double> replication_kappa;
};

struct ExperimentResult {
  MetricsReport report;
  ConfusionMatrix mean_confusion;
};

// Runs the stratified replication protocol on a dataset holding both years.
// Each replication draws its own train split from a deterministic sub-seed,
// so parallel and serial runs produce identical results.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::span<const FieldSample> dataset);

// Serialization: metrics JSON (keys overall_accuracy, kappa, users_accuracy,
// producers_accuracy, per_replication) and confusion CSV with a `pred\obs`
// header row. Confusion counts are rounded to integers for display.
std::string metrics_to_json(const MetricsReport& report);
std::string confusion_to_csv(const ConfusionMatrix& cm, bool round_counts = true);

// Deterministic per-replication seed derivation.
std::uint64_t replication_seed(std::uint64_t seed, int replication);

}  // namespace cropwarp
