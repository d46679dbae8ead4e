#include "cropwarp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cropwarp/errors.hpp"
#include "cropwarp/rng.hpp"
#include "cropwarp/window.hpp"

#include "json.hpp"

namespace cropwarp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Argmin with the total tie order (distance, label, field id, position).
struct Nearest {
  double distance = kInf;
  const std::string* label = nullptr;
  const std::string* field_id = nullptr;
  std::size_t index = 0;

  bool offer(double d, const std::string& lab, const std::string& fid, std::size_t idx) {
    if (!std::isfinite(d)) return false;
    bool better = false;
    if (!label) {
      better = true;
    } else if (d != distance) {
      better = d < distance;
    } else if (lab != *label) {
      better = lab < *label;
    } else if (fid != *field_id) {
      better = fid < *field_id;
    } else {
      better = idx < index;
    }
    if (better) {
      distance = d;
      label = &lab;
      field_id = &fid;
      index = idx;
    }
    return better;
  }
};

// Distances that cannot be computed inside the band count as infinite; the
// sample is unclassifiable only if that happens for every candidate.
double guarded_distance(const Series& x, const Series& y, const WarpConfig& cfg) {
  try {
    return series_distance(x, y, cfg);
  } catch (const NoPathError&) {
    return kInf;
  }
}

void run_chunked(std::size_t count, int threads, const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::size_t t = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += t) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<double> nan_mean_columns(const std::vector<std::vector<double>>& per_rep,
                                     std::size_t cols) {
  std::vector<double> mean(cols, kNaN);
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0;
    int n = 0;
    for (const auto& row : per_rep) {
      if (!std::isnan(row[c])) {
        sum += row[c];
        n++;
      }
    }
    if (n > 0) mean[c] = sum / n;
  }
  return mean;
}

}  // namespace

const char* to_string(ClassifierMode mode) {
  return mode == ClassifierMode::nearest_neighbor ? "nearest_neighbor" : "median_template";
}

ClassifierMode classifier_mode_from_string(const std::string& name) {
  if (name == "nearest_neighbor" || name == "nn") return ClassifierMode::nearest_neighbor;
  if (name == "median_template" || name == "median") return ClassifierMode::median_template;
  throw ValidationError("unknown classifier mode '" + name + "'");
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0.0) {
  for (std::size_t i = 0; i < classes_.size(); ++i) index_[classes_[i]] = i;
  if (index_.size() != classes_.size()) throw ValidationError("duplicate class names");
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw ValidationError("unknown label '" + label + "'");
  return it->second;
}

void ConfusionMatrix::add(const std::string& predicted, const std::string& observed,
                          double weight) {
  counts_[index_of(predicted) * classes_.size() + index_of(observed)] += weight;
}

void ConfusionMatrix::add_matrix(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw ValidationError("confusion matrices have different classes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

void ConfusionMatrix::scale(double factor) {
  for (double& c : counts_) c *= factor;
}

double ConfusionMatrix::count(std::size_t pred, std::size_t obs) const {
  return counts_[pred * classes_.size() + obs];
}

double ConfusionMatrix::row_sum(std::size_t pred) const {
  double s = 0;
  for (std::size_t j = 0; j < classes_.size(); ++j) s += count(pred, j);
  return s;
}

double ConfusionMatrix::col_sum(std::size_t obs) const {
  double s = 0;
  for (std::size_t i = 0; i < classes_.size(); ++i) s += count(i, obs);
  return s;
}

double ConfusionMatrix::trace() const {
  double s = 0;
  for (std::size_t i = 0; i < classes_.size(); ++i) s += count(i, i);
  return s;
}

double ConfusionMatrix::total() const {
  double s = 0;
  for (double c : counts_) s += c;
  return s;
}

ConfusionMatrix confusion(std::span<const std::string> predictions,
                          std::span<const std::string> truth) {
  std::set<std::string> names(predictions.begin(), predictions.end());
  names.insert(truth.begin(), truth.end());
  return confusion(predictions, truth, std::vector<std::string>(names.begin(), names.end()));
}

ConfusionMatrix confusion(std::span<const std::string> predictions,
                          std::span<const std::string> truth,
                          std::vector<std::string> classes) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("predictions and truth have different lengths");
  }
  ConfusionMatrix cm(std::move(classes));
  for (std::size_t i = 0; i < predictions.size(); ++i) cm.add(predictions[i], truth[i]);
  return cm;
}

MetricsSummary metrics(const ConfusionMatrix& cm) {
  double total = cm.total();
  if (total <= 0) throw ValidationError("metrics over an empty confusion matrix");
  std::size_t k = cm.classes().size();

  MetricsSummary out;
  out.overall_accuracy = cm.trace() / total;
  out.users_accuracy.resize(k, kNaN);
  out.producers_accuracy.resize(k, kNaN);
  double sum_prod = 0;
  for (std::size_t c = 0; c < k; ++c) {
    double row = cm.row_sum(c), col = cm.col_sum(c);
    if (row > 0) out.users_accuracy[c] = cm.count(c, c) / row;
    if (col > 0) out.producers_accuracy[c] = cm.count(c, c) / col;
    sum_prod += row * col;
  }
  // kappa = (OA - p_e) / (1 - p_e) computed in the product form so that
  // integer-count matrices give exact results.
  double denom = total * total - sum_prod;
  out.kappa = denom == 0 ? kNaN : (total * cm.trace() - sum_prod) / denom;
  return out;
}

std::uint64_t replication_seed(std::uint64_t seed, int replication) {
  return mix_seed(seed, static_cast<std::uint64_t>(replication));
}

SplitResult stratified_sample(std::span<const FieldSample> dataset, int k, std::uint64_t seed) {
  if (k < 1) throw ValidationError("stratified sampling requires k >= 1");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].has_label()) continue;
    by_class[dataset[i].label].push_back(i);
  }
  if (by_class.empty()) throw ValidationError("stratified sampling over an unlabeled dataset");

  Rng rng(seed);
  SplitResult split;
  for (auto& [label, indices] : by_class) {
    if (static_cast<int>(indices.size()) < k) {
      throw ValidationError("class '" + label + "' has " + std::to_string(indices.size()) +
                            " samples, fewer than k=" + std::to_string(k));
    }
    rng.shuffle(indices);
    split.train.insert(split.train.end(), indices.begin(), indices.begin() + k);
    split.test.insert(split.test.end(), indices.begin() + k, indices.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::string nn_classify(const Series& test, std::span<const FieldSample> train,
                        const WarpConfig& cfg) {
  if (train.empty()) throw ValidationError("nearest neighbor needs at least one training sample");
  Nearest best;
  for (std::size_t i = 0; i < train.size(); ++i) {
    best.offer(guarded_distance(test, train[i].series, cfg), train[i].label,
               train[i].field_id, i);
  }
  if (!best.label) throw UnclassifiableError("no finite distance to any training sample");
  return *best.label;
}

std::string template_classify(const Series& test, std::span<const ClassTemplate> templates,
                              const WarpConfig& cfg) {
  if (templates.empty()) throw ValidationError("template classification needs templates");
  static const std::string kNoField;
  Nearest best;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    best.offer(guarded_distance(test, templates[i].series, cfg), templates[i].label, kNoField, i);
  }
  if (!best.label) throw UnclassifiableError("no finite distance to any template");
  return *best.label;
}

std::vector<std::string> nn_classify_batch(std::span<const FieldSample> tests,
                                           std::span<const FieldSample> train,
                                           const WarpConfig& cfg, int threads) {
  if (train.empty()) throw ValidationError("nearest neighbor needs at least one training sample");

  // Pair vectors depend only on the series, so compute them once per sample.
  std::vector<std::vector<PairVector>> train_pairs, test_pairs;
  bool use_pairs = cfg.measure == Measure::vdtw;
  if (use_pairs) {
    train_pairs.reserve(train.size());
    for (const auto& fs : train) {
      train_pairs.push_back(pair_vectors(fs.series, cfg.zero_vector_eps, cfg.vector_kind));
    }
    test_pairs.reserve(tests.size());
    for (const auto& fs : tests) {
      test_pairs.push_back(pair_vectors(fs.series, cfg.zero_vector_eps, cfg.vector_kind));
    }
  }

  std::vector<std::string> labels(tests.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  run_chunked(tests.size(), threads, [&](std::size_t t) {
    try {
      Nearest best;
      for (std::size_t i = 0; i < train.size(); ++i) {
        double d;
        if (use_pairs) {
          try {
            d = vdtw_pairs(test_pairs[t], train_pairs[i], cfg);
          } catch (const NoPathError&) {
            d = kInf;
          }
        } else {
          d = guarded_distance(tests[t].series, train[i].series, cfg);
        }
        best.offer(d, train[i].label, train[i].field_id, i);
      }
      if (!best.label) throw UnclassifiableError("no finite distance to any training sample");
      labels[t] = *best.label;
    } catch (...) {
      std::scoped_lock lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return labels;
}

namespace {

struct RepOutcome {
  ConfusionMatrix cm;
  MetricsSummary summary;
};

Series pointwise_median(std::vector<const Series*> members) {
  const Series& first = *members.front();
  Series out;
  out.days = first.days;
  out.values.resize(first.size());
  out.flags.assign(first.size(), QualityFlag::clear);
  std::vector<double> column(members.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t k = 0; k < members.size(); ++k) column[k] = members[k]->values[i];
    std::sort(column.begin(), column.end());
    std::size_t n = column.size();
    out.values[i] = n % 2 == 1 ? column[n / 2] : (column[n / 2 - 1] + column[n / 2]) / 2.0;
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::span<const FieldSample> dataset) {
  if (cfg.replications < 1) throw ValidationError("replications must be >= 1");
  if (cfg.samples_per_class < 1) throw ValidationError("samples_per_class must be >= 1");

  std::vector<FieldSample> train_pool, test_pool;
  for (const auto& fs : dataset) {
    if (fs.year == cfg.train_year && fs.has_label()) train_pool.push_back(fs);
    if (fs.year == cfg.test_year && fs.year != cfg.train_year) test_pool.push_back(fs);
  }
  bool same_year = cfg.test_year == cfg.train_year;
  if (train_pool.empty()) {
    throw ValidationError("no labeled training samples for year " + std::to_string(cfg.train_year));
  }
  if (!same_year && test_pool.empty()) {
    throw ValidationError("no test samples for year " + std::to_string(cfg.test_year));
  }
  for (const auto& fs : test_pool) {
    if (!fs.has_label()) {
      throw ValidationError("test sample " + fs.field_id + " is unlabeled");
    }
  }

  if (cfg.window) {
    auto [o1, o2] = *cfg.window;
    for (auto* pool : {&train_pool, &test_pool}) {
      for (auto& fs : *pool) fs.series = crop_series_to_window(fs.series, o1, o2);
    }
  }

  std::set<std::string> names;
  for (const auto& fs : train_pool) names.insert(fs.label);
  for (const auto& fs : test_pool) names.insert(fs.label);
  std::vector<std::string> classes(names.begin(), names.end());

  bool use_pairs = cfg.warp.measure == Measure::vdtw;
  std::vector<std::vector<PairVector>> train_pairs, test_pairs;
  if (use_pairs) {
    for (const auto& fs : train_pool) {
      train_pairs.push_back(pair_vectors(fs.series, cfg.warp.zero_vector_eps, cfg.warp.vector_kind));
    }
    for (const auto& fs : test_pool) {
      test_pairs.push_back(pair_vectors(fs.series, cfg.warp.zero_vector_eps, cfg.warp.vector_kind));
    }
  }

  // One replication: a fresh stratified split, then 1-NN (or one median
  // template per class) over the split's training samples.
  auto run_rep = [&](int rep) -> RepOutcome {
    SplitResult split = stratified_sample(train_pool, cfg.samples_per_class,
                                          replication_seed(cfg.seed, rep));
    std::vector<std::string> predictions, truth;

    // Candidate set for this replication.
    std::vector<ClassTemplate> templates;
    if (cfg.mode == ClassifierMode::median_template) {
      std::map<std::string, std::vector<const Series*>> members;
      for (std::size_t idx : split.train) members[train_pool[idx].label].push_back(&train_pool[idx].series);
      for (auto& [label, series_list] : members) {
        templates.push_back({label, pointwise_median(series_list)});
      }
    }
    std::vector<std::vector<PairVector>> template_pairs;
    if (use_pairs && !templates.empty()) {
      for (const auto& t : templates) {
        template_pairs.push_back(
            pair_vectors(t.series, cfg.warp.zero_vector_eps, cfg.warp.vector_kind));
      }
    }

    auto classify_one = [&](const Series& series, const std::vector<PairVector>* pairs) {
      Nearest best;
      if (cfg.mode == ClassifierMode::median_template) {
        static const std::string kNoField;
        for (std::size_t i = 0; i < templates.size(); ++i) {
          double d;
          try {
            d = use_pairs ? vdtw_pairs(*pairs, template_pairs[i], cfg.warp)
                          : series_distance(series, templates[i].series, cfg.warp);
          } catch (const NoPathError&) {
            d = kInf;
          }
          best.offer(d, templates[i].label, kNoField, i);
        }
      } else {
        for (std::size_t i : split.train) {
          double d;
          try {
            d = use_pairs ? vdtw_pairs(*pairs, train_pairs[i], cfg.warp)
                          : series_distance(series, train_pool[i].series, cfg.warp);
          } catch (const NoPathError&) {
            d = kInf;
          }
          best.offer(d, train_pool[i].label, train_pool[i].field_id, i);
        }
      }
      if (!best.label) throw UnclassifiableError("no finite distance to any candidate");
      return *best.label;
    };

    if (same_year) {
      for (std::size_t idx : split.test) {
        predictions.push_back(
            classify_one(train_pool[idx].series, use_pairs ? &train_pairs[idx] : nullptr));
        truth.push_back(train_pool[idx].label);
      }
    } else {
      for (std::size_t t = 0; t < test_pool.size(); ++t) {
        predictions.push_back(
            classify_one(test_pool[t].series, use_pairs ? &test_pairs[t] : nullptr));
        truth.push_back(test_pool[t].label);
      }
    }

    if (predictions.empty()) {
      throw ValidationError("replication " + std::to_string(rep) +
                            " has no test samples (k consumed every sample)");
    }
    ConfusionMatrix cm = confusion(predictions, truth, classes);
    return {cm, metrics(cm)};
  };

  std::vector<std::optional<RepOutcome>> outcomes(cfg.replications);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  run_chunked(static_cast<std::size_t>(cfg.replications), cfg.threads, [&](std::size_t r) {
    try {
      outcomes[r] = run_rep(static_cast<int>(r));
    } catch (...) {
      std::scoped_lock lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  // Aggregate in replication order regardless of the execution schedule.
  ExperimentResult result;
  result.report.classes = classes;
  result.mean_confusion = ConfusionMatrix(classes);
  std::vector<std::vector<double>> ua_rows, pa_rows;
  for (int r = 0; r < cfg.replications; ++r) {
    const RepOutcome& o = *outcomes[r];
    result.mean_confusion.add_matrix(o.cm);
    result.report.replication_oa.push_back(o.summary.overall_accuracy);
    result.report.replication_kappa.push_back(o.summary.kappa);
    ua_rows.push_back(o.summary.users_accuracy);
    pa_rows.push_back(o.summary.producers_accuracy);
  }
  result.mean_confusion.scale(1.0 / cfg.replications);

  double oa_sum = 0;
  for (double v : result.report.replication_oa) oa_sum += v;
  result.report.overall_accuracy = oa_sum / cfg.replications;
  double kappa_sum = 0;
  int kappa_n = 0;
  for (double v : result.report.replication_kappa) {
    if (!std::isnan(v)) {
      kappa_sum += v;
      kappa_n++;
    }
  }
  result.report.kappa = kappa_n > 0 ? kappa_sum / kappa_n : kNaN;
  result.report.users_accuracy = nan_mean_columns(ua_rows, classes.size());
  result.report.producers_accuracy = nan_mean_columns(pa_rows, classes.size());
  return result;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["overall_accuracy"] = report.overall_accuracy;
  j["kappa"] = report.kappa;
  nlohmann::json ua, pa;
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    ua[report.classes[c]] = report.users_accuracy[c];
    pa[report.classes[c]] = report.producers_accuracy[c];
  }
  j["users_accuracy"] = ua;
  j["producers_accuracy"] = pa;
  nlohmann::json reps = nlohmann::json::array();
  for (std::size_t r = 0; r < report.replication_oa.size(); ++r) {
    reps.push_back({{"overall_accuracy", report.replication_oa[r]},
                    {"kappa", report.replication_kappa[r]}});
  }
  j["per_replication"] = reps;
  return j.dump(2) + "\n";
}

std::string confusion_to_csv(const ConfusionMatrix& cm, bool round_counts) {
  std::ostringstream out;
  out << "pred\\obs";
  for (const auto& c : cm.classes()) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < cm.classes().size(); ++i) {
    out << cm.classes()[i];
    for (std::size_t j = 0; j < cm.classes().size(); ++j) {
      double v = cm.count(i, j);
      if (round_counts) {
        out << ',' << static_cast<long long>(std::llround(v));
      } else {
        out << ',' << v;
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cropwarp
