// Command-line front end: simulate, preprocess, classify, select-window,
// distance and evaluate subcommands wired around the library. Every
// subcommand accepts --config FILE (flat key=value lines, # comments) and
// any key can be overridden by the flag of the same name; flags win.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cropwarp/classify.hpp"
#include "cropwarp/distance.hpp"
#include "cropwarp/errors.hpp"
#include "cropwarp/ingest.hpp"
#include "cropwarp/preprocess.hpp"
#include "cropwarp/simulate.hpp"
#include "cropwarp/types.hpp"
#include "cropwarp/vegindex.hpp"
#include "cropwarp/version.hpp"
#include "cropwarp/window.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flat key=value config support. CLI11's own config machinery does not fire
// for per-subcommand config files, so the file is expanded into flags placed
// before the user's flags; take-last option policy makes the command line
// win.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cropwarp::Error("cannot open config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw cropwarp::Error("config line is not key=value: '" + line + "'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    auto vfirst = value.find_first_not_of(" \t");
    value = vfirst == std::string::npos ? std::string() : value.substr(vfirst);
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

// Rewrites argv so config-file entries come right after the subcommand name.
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) return args;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;
  std::vector<std::string> merged{args[0]};
  for (auto& token : config_tokens(config_path)) merged.push_back(std::move(token));
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

void make_flags_take_last(CLI::App* app) {
  for (CLI::Option* opt : app->get_options()) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  for (CLI::App* sub : app->get_subcommands({})) make_flags_take_last(sub);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cropwarp::Error("cannot open " + path.string() + " for writing");
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cropwarp::Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Reproducibility record: the resolved configuration of this run.
void write_manifest(const fs::path& out_dir, const std::string& command, CLI::App* sub) {
  json j;
  j["command"] = command;
  j["version"] = CROPWARP_VERSION;
  j["config"] = sub->config_to_str(true, false);
  write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

std::vector<cropwarp::FieldSample> load_processed(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cropwarp::Error("cannot open " + path);
  return cropwarp::read_processed(in);
}

cropwarp::TimeGrid grid_of(const cropwarp::Series& s) {
  if (s.size() < 2) throw cropwarp::ValidationError("series too short to carry a grid");
  int step = s.days[1] - s.days[0];
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s.days[i] - s.days[i - 1] != step) {
      throw cropwarp::ValidationError("series days are not on a uniform grid");
    }
  }
  return cropwarp::TimeGrid{s.days.front(), s.days.back(), step};
}

void print_matrix(std::ostream& out, const char* title, const cropwarp::Matrix& m) {
  out << title << " (" << m.rows() << "x" << m.cols() << "):\n";
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (std::isinf(m(i, j))) {
        out << "      inf";
      } else {
        std::snprintf(buf, sizeof(buf), " %8.4f", m(i, j));
        out << buf;
      }
    }
    out << '\n';
  }
}

struct WarpOptions {
  std::string measure = "vdtw";
  double band_days = 15.0;
  double twdtw_alpha = 0.1;
  double twdtw_beta = 50.0;
  double zero_vector_eps = 1e-12;
  std::string vector_kind = "value_pair";

  void attach(CLI::App* sub) {
    sub->add_option("--measure", measure, "Distance measure: sam|dtw|twdtw|vdtw")
        ->capture_default_str();
    sub->add_option("--band-days", band_days, "Half-width of the warping band in days")
        ->capture_default_str();
    sub->add_option("--twdtw-alpha", twdtw_alpha, "TWDTW time-penalty steepness (1/day)")
        ->capture_default_str();
    sub->add_option("--twdtw-beta", twdtw_beta, "TWDTW time-penalty midpoint (days)")
        ->capture_default_str();
    sub->add_option("--zero-vector-eps", zero_vector_eps,
                    "Norm threshold below which a pair vector is degenerate")
        ->capture_default_str();
    sub->add_option("--vector-kind", vector_kind,
                    "Pair-vector construction: value_pair|time_segment")
        ->capture_default_str();
  }

  cropwarp::WarpConfig to_config() const {
    cropwarp::WarpConfig cfg;
    cfg.measure = cropwarp::measure_from_string(measure);
    cfg.band_days = band_days;
    cfg.twdtw_alpha = twdtw_alpha;
    cfg.twdtw_beta = twdtw_beta;
    cfg.zero_vector_eps = zero_vector_eps;
    if (vector_kind == "value_pair") {
      cfg.vector_kind = cropwarp::VectorKind::value_pair;
    } else if (vector_kind == "time_segment") {
      cfg.vector_kind = cropwarp::VectorKind::time_segment;
    } else {
      throw cropwarp::ValidationError("unknown vector kind '" + vector_kind + "'");
    }
    return cfg;
  }
};

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string out_dir;
  std::uint64_t seed = 0;
  int fields = 500;
  int year_a = 2013;
  int year_b = 2014;
  int grid_start = 96;
  int grid_end = 300;
  int grid_step = 4;
  std::string scenario_a = "identity";
  std::string scenario_b = "s4";
  double cloud_fraction = 0.0;
};

int cmd_simulate(const SimulateArgs& a, CLI::App* sub) {
  fs::create_directories(a.out_dir);
  cropwarp::TimeGrid grid{a.grid_start, a.grid_end, a.grid_step};
  cropwarp::ScenarioRange range_a = cropwarp::scenario_preset(a.scenario_a);
  cropwarp::ScenarioRange range_b = cropwarp::scenario_preset(a.scenario_b);
  range_a.cloud_fraction = a.cloud_fraction;
  range_b.cloud_fraction = a.cloud_fraction;

  std::vector<cropwarp::ClassSpec> specs{cropwarp::corn_like(), cropwarp::cotton_like()};
  cropwarp::SimulatedDataset ds = cropwarp::generate_dataset(
      specs, a.fields, grid, range_a, range_b, a.year_a, a.year_b, a.seed);

  std::vector<cropwarp::FieldSample> all = ds.year_a;
  all.insert(all.end(), ds.year_b.begin(), ds.year_b.end());

  std::ostringstream obs;
  cropwarp::write_observations(obs, cropwarp::observation_rows_from_samples(all));
  write_file(fs::path(a.out_dir) / "observations.csv", obs.str());

  std::ostringstream labels;
  labels << "field_id,year,crop\n";
  for (const auto& fsamp : all) {
    labels << fsamp.field_id << ',' << fsamp.year << ',' << fsamp.label << '\n';
  }
  write_file(fs::path(a.out_dir) / "labels.csv", labels.str());
  write_manifest(a.out_dir, "simulate", sub);
  std::cout << "wrote " << all.size() << " field-years to " << a.out_dir << "\n";
  return 0;
}

// -------------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string observations;
  std::string labels;
  std::string out_dir;
  std::string index = "msavi";
  std::string smoother = "sg";  // sg | sigmoid
  int sg_window = 5;
  int sg_order = 2;
  int grid_step = 1;
};

int cmd_preprocess(const PreprocessArgs& a, CLI::App* sub) {
  fs::create_directories(a.out_dir);

  std::ifstream obs_in(a.observations, std::ios::binary);
  if (!obs_in) throw cropwarp::Error("cannot open " + a.observations);
  auto rows = cropwarp::parse_observations(obs_in);

  cropwarp::LabelTable labels;
  if (!a.labels.empty()) {
    std::ifstream lab_in(a.labels, std::ios::binary);
    if (!lab_in) throw cropwarp::Error("cannot open " + a.labels);
    labels = cropwarp::parse_labels(lab_in);
  }

  cropwarp::IngestStats stats;
  auto samples = cropwarp::build_field_samples(
      rows, labels, cropwarp::index_kind_from_string(a.index), {}, &stats);

  int filled_gaps = 0;
  json dropped = json::array();
  std::vector<cropwarp::FieldSample> cleaned;
  for (auto& fsamp : samples) {
    for (auto f : fsamp.series.flags) filled_gaps += f != cropwarp::QualityFlag::clear;
    try {
      fsamp.series = cropwarp::fill_cloud_gaps_idw(fsamp.series);
      if (a.smoother == "sg") {
        int window = std::min<int>(a.sg_window, static_cast<int>(fsamp.series.size()));
        if (window % 2 == 0) window -= 1;
        fsamp.series = cropwarp::savitzky_golay(fsamp.series, window, a.sg_order);
      } else if (a.smoother == "sigmoid") {
        cropwarp::SigmoidFit fit = cropwarp::fit_double_sigmoid(fsamp.series);
        for (std::size_t i = 0; i < fsamp.series.size(); ++i) {
          fsamp.series.values[i] = cropwarp::eval_double_sigmoid_at(
              fit.params, static_cast<double>(fsamp.series.days[i]));
        }
      } else {
        throw cropwarp::ValidationError("unknown smoother '" + a.smoother + "' (sg|sigmoid)");
      }
      cleaned.push_back(std::move(fsamp));
    } catch (const cropwarp::UnfillableError& e) {
      dropped.push_back({{"field_id", fsamp.field_id},
                         {"year", fsamp.year},
                         {"reason", e.what()}});
    } catch (const cropwarp::ParamError& e) {
      dropped.push_back({{"field_id", fsamp.field_id},
                         {"year", fsamp.year},
                         {"reason", e.what()}});
    }
  }
  if (cleaned.empty()) throw cropwarp::Error("no usable fields after gap filling");

  // One acquisition calendar per year (union over fields), then the
  // cross-year intersection span.
  std::map<int, std::set<int>> year_days;
  for (const auto& fsamp : cleaned) {
    year_days[fsamp.year].insert(fsamp.series.days.begin(), fsamp.series.days.end());
  }
  std::vector<std::vector<int>> calendars;
  for (const auto& [year, days] : year_days) {
    (void)year;
    calendars.emplace_back(days.begin(), days.end());
  }
  cropwarp::TimeGrid grid = cropwarp::common_grid(calendars, a.grid_step);

  std::vector<cropwarp::FieldSample> resampled;
  for (auto& fsamp : cleaned) {
    try {
      fsamp.series = cropwarp::resample_linear(fsamp.series, grid);
      resampled.push_back(std::move(fsamp));
    } catch (const cropwarp::CoverageError& e) {
      dropped.push_back({{"field_id", fsamp.field_id},
                         {"year", fsamp.year},
                         {"reason", e.what()}});
    }
  }
  if (resampled.empty()) throw cropwarp::Error("no field covers the common grid");

  std::ostringstream processed;
  cropwarp::write_processed(processed, resampled);
  write_file(fs::path(a.out_dir) / "processed.csv", processed.str());

  json report;
  report["t_l"] = grid.t_l;
  report["t_u"] = grid.t_u;
  report["step"] = grid.step;
  report["fields"] = resampled.size();
  report["filled_gaps"] = filled_gaps;
  report["dropped"] = dropped;
  report["labeled_fields_without_rows"] = stats.labeled_fields_without_rows;
  write_file(fs::path(a.out_dir) / "report.json", report.dump(2) + "\n");
  write_manifest(a.out_dir, "preprocess", sub);
  std::cout << "wrote " << resampled.size() << " processed field-years, grid [" << grid.t_l
            << ", " << grid.t_u << "] step " << grid.step << "\n";
  return 0;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  std::string input;
  std::string out_dir;
  WarpOptions warp;
  int train_year = 0;
  int test_year = 0;
  int k = 50;
  int replications = 100;
  std::uint64_t seed = 0;
  std::string mode = "nearest_neighbor";
  int window_start = -1;
  int window_end = -1;
  std::string window_json;
  int threads = 1;
};

int cmd_classify(const ClassifyArgs& a, CLI::App* sub) {
  fs::create_directories(a.out_dir);
  auto data = load_processed(a.input);

  cropwarp::ExperimentConfig cfg;
  cfg.warp = a.warp.to_config();
  cfg.train_year = a.train_year;
  cfg.test_year = a.test_year == 0 ? a.train_year : a.test_year;
  cfg.samples_per_class = a.k;
  cfg.replications = a.replications;
  cfg.seed = a.seed;
  cfg.mode = cropwarp::classifier_mode_from_string(a.mode);
  cfg.threads = a.threads;
  if (!a.window_json.empty()) {
    json w = json::parse(read_file(a.window_json));
    cfg.window = std::make_pair(w.at("o1").get<int>(), w.at("o2").get<int>());
  } else if (a.window_start >= 0 && a.window_end >= 0) {
    cfg.window = std::make_pair(a.window_start, a.window_end);
  }

  cropwarp::ExperimentResult res = cropwarp::run_experiment(cfg, data);
  write_file(fs::path(a.out_dir) / "metrics.json", cropwarp::metrics_to_json(res.report));
  write_file(fs::path(a.out_dir) / "confusion.csv",
             cropwarp::confusion_to_csv(res.mean_confusion));
  write_manifest(a.out_dir, "classify", sub);
  std::cout << "overall_accuracy " << res.report.overall_accuracy << " kappa "
            << res.report.kappa << "\n";
  return 0;
}

// ------------------------------------------------------------ select-window

struct WindowArgs {
  std::string input;
  std::string out_dir;
  WarpOptions warp;
  int year = 0;
  std::string policy = "min_length";
  double eps1 = std::numeric_limits<double>::quiet_NaN();
  double eps2 = std::numeric_limits<double>::quiet_NaN();
  int smoothing_width = 3;
  int stability_run = 3;
};

int cmd_select_window(const WindowArgs& a, CLI::App* sub) {
  fs::create_directories(a.out_dir);
  auto data = load_processed(a.input);

  std::map<std::string, std::vector<cropwarp::FieldSample>> by_class;
  for (auto& fsamp : data) {
    if (fsamp.year == a.year && fsamp.has_label()) by_class[fsamp.label].push_back(fsamp);
  }
  if (by_class.size() < 2) {
    throw cropwarp::ValidationError("window selection needs at least 2 labeled classes in year " +
                                    std::to_string(a.year));
  }

  cropwarp::TimeGrid grid = grid_of(by_class.begin()->second.front().series);
  std::map<std::string, cropwarp::Series> profiles;
  for (const auto& [label, members] : by_class) {
    profiles[label] = cropwarp::median_profile(members, grid);
  }

  cropwarp::WindowPolicy policy;
  policy.kind = cropwarp::window_policy_from_string(a.policy);
  policy.eps1 = a.eps1;
  policy.eps2 = a.eps2;
  policy.smoothing_width = a.smoothing_width;
  policy.stability_run = a.stability_run;

  cropwarp::WindowResult result =
      cropwarp::multiclass_window(profiles, policy, a.warp.to_config());

  json j;
  j["pivot"] = result.pivot;
  j["o1"] = result.o1;
  j["o2"] = result.o2;
  j["policy"] = a.policy;
  j["no_plateau"] = result.no_plateau;
  json pairs;
  for (const auto& [key, w] : result.per_pair) {
    pairs[key.first + "|" + key.second] = {
        {"o1", w.o1}, {"o2", w.o2}, {"pivot", w.pivot}, {"no_plateau", w.no_plateau}};
  }
  j["per_pair"] = pairs;
  write_file(fs::path(a.out_dir) / "window.json", j.dump(2) + "\n");
  write_file(fs::path(a.out_dir) / "score_curve.csv", cropwarp::score_curve_csv(result.scores));
  write_manifest(a.out_dir, "select-window", sub);
  std::cout << "window [" << result.o1 << ", " << result.o2 << "] pivot " << result.pivot
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- distance

struct DistanceArgs {
  std::string input;
  std::string id_a;
  std::string id_b;
  int year_a = 0;
  int year_b = 0;
  WarpOptions warp;
};

int cmd_distance(const DistanceArgs& a) {
  auto data = load_processed(a.input);
  auto find = [&](const std::string& id, int year) -> const cropwarp::FieldSample& {
    const cropwarp::FieldSample* hit = nullptr;
    for (const auto& fsamp : data) {
      if (fsamp.field_id != id || (year != 0 && fsamp.year != year)) continue;
      if (hit) throw cropwarp::ValidationError("field id '" + id + "' is ambiguous; pass a year");
      hit = &fsamp;
    }
    if (!hit) throw cropwarp::ValidationError("field id '" + id + "' not found");
    return *hit;
  };

  const auto& sa = find(a.id_a, a.year_a);
  const auto& sb = find(a.id_b, a.year_b);
  cropwarp::WarpConfig cfg = a.warp.to_config();
  cropwarp::CostMatrices cm = cropwarp::cost_matrices(sa.series, sb.series, cfg);

  std::cout << "measure " << cropwarp::to_string(cfg.measure) << ", series " << a.id_a << " ("
            << cm.n << " samples) vs " << a.id_b << " (" << cm.m << " samples)\n";
  print_matrix(std::cout, "local costs", cm.local);
  print_matrix(std::cout, "accumulated costs", cm.accumulated);
  std::cout.precision(12);
  if (std::isinf(cm.distance)) {
    std::cout << "no finite warping path within the band (band_days=" << cfg.band_days << ")\n";
    return 1;
  }
  std::cout << "distance " << cm.distance << "\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string predictions;
  std::string out_dir;
};

int cmd_evaluate(const EvaluateArgs& a, CLI::App* sub) {
  fs::create_directories(a.out_dir);
  std::ifstream in(a.predictions, std::ios::binary);
  if (!in) throw cropwarp::Error("cannot open " + a.predictions);

  std::string line;
  if (!std::getline(in, line)) throw cropwarp::SchemaError("empty predictions file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "predicted,observed") {
    throw cropwarp::SchemaError("predictions header must be 'predicted,observed'");
  }
  std::vector<std::string> pred, obs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    auto comma = line.find(',');
    if (comma == std::string::npos) throw cropwarp::ValidationError("bad prediction row: " + line);
    pred.push_back(line.substr(0, comma));
    obs.push_back(line.substr(comma + 1));
  }

  cropwarp::ConfusionMatrix cm = cropwarp::confusion(pred, obs);
  cropwarp::MetricsSummary summary = cropwarp::metrics(cm);
  cropwarp::MetricsReport report;
  report.classes = cm.classes();
  report.overall_accuracy = summary.overall_accuracy;
  report.kappa = summary.kappa;
  report.users_accuracy = summary.users_accuracy;
  report.producers_accuracy = summary.producers_accuracy;
  report.replication_oa = {summary.overall_accuracy};
  report.replication_kappa = {summary.kappa};

  write_file(fs::path(a.out_dir) / "metrics.json", cropwarp::metrics_to_json(report));
  write_file(fs::path(a.out_dir) / "confusion.csv", cropwarp::confusion_to_csv(cm));
  write_manifest(a.out_dir, "evaluate", sub);
  std::cout << "overall_accuracy " << summary.overall_accuracy << " kappa " << summary.kappa
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vegetation-index time-series crop classification toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  auto add_config_flag = [&config_path](CLI::App* sub) {
    sub->add_option("--config", config_path, "Flat key=value config file; flags win")
        ->configurable(false);
  };

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate two synthetic labeled years");
  add_config_flag(sim_cmd);
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--fields", sim.fields, "Fields per class")->capture_default_str();
  sim_cmd->add_option("--year-a", sim.year_a, "First year number")->capture_default_str();
  sim_cmd->add_option("--year-b", sim.year_b, "Second year number")->capture_default_str();
  sim_cmd->add_option("--grid-start", sim.grid_start, "First grid day")->capture_default_str();
  sim_cmd->add_option("--grid-end", sim.grid_end, "Last grid day")->capture_default_str();
  sim_cmd->add_option("--grid-step", sim.grid_step, "Grid step in days")->capture_default_str();
  sim_cmd->add_option("--scenario-a", sim.scenario_a, "Year-A scenario preset")
      ->capture_default_str();
  sim_cmd->add_option("--scenario-b", sim.scenario_b,
                      "Year-B scenario preset: identity|s1|s2|s3|s4")
      ->capture_default_str();
  sim_cmd->add_option("--cloud-fraction", sim.cloud_fraction,
                      "Fraction of samples flagged cloud")
      ->capture_default_str();

  PreprocessArgs pre;
  CLI::App* pre_cmd =
      app.add_subcommand("preprocess", "Fill, smooth and resample observations");
  add_config_flag(pre_cmd);
  pre_cmd->add_option("--observations", pre.observations, "Observations CSV")->required();
  pre_cmd->add_option("--labels", pre.labels, "Labels CSV");
  pre_cmd->add_option("--out-dir", pre.out_dir, "Output directory")->required();
  pre_cmd->add_option("--index", pre.index, "Vegetation index")->capture_default_str();
  pre_cmd->add_option("--smoother", pre.smoother, "Smoothing method: sg|sigmoid")
      ->capture_default_str();
  pre_cmd->add_option("--sg-window", pre.sg_window, "Savitzky-Golay window (odd samples)")
      ->capture_default_str();
  pre_cmd->add_option("--sg-order", pre.sg_order, "Savitzky-Golay polynomial order")
      ->capture_default_str();
  pre_cmd->add_option("--grid-step", pre.grid_step, "Resampling step in days")
      ->capture_default_str();

  ClassifyArgs cls;
  CLI::App* cls_cmd = app.add_subcommand("classify", "Run the replication protocol");
  add_config_flag(cls_cmd);
  cls_cmd->add_option("--input", cls.input, "Processed dataset CSV")->required();
  cls_cmd->add_option("--out-dir", cls.out_dir, "Output directory")->required();
  cls_cmd->add_option("--train-year", cls.train_year, "Training year")->required();
  cls_cmd->add_option("--test-year", cls.test_year,
                      "Test year (defaults to the training year)")
      ->capture_default_str();
  cls_cmd->add_option("--k", cls.k, "Training samples per class")->capture_default_str();
  cls_cmd->add_option("--replications", cls.replications, "Replications")->capture_default_str();
  cls_cmd->add_option("--seed", cls.seed, "Random seed")->capture_default_str();
  cls_cmd->add_option("--mode", cls.mode, "nearest_neighbor|median_template")
      ->capture_default_str();
  cls_cmd->add_option("--window-start", cls.window_start, "Restrict series to days >= this")
      ->capture_default_str();
  cls_cmd->add_option("--window-end", cls.window_end, "Restrict series to days <= this")
      ->capture_default_str();
  cls_cmd->add_option("--window-json", cls.window_json,
                      "Read the window from a select-window output file");
  cls_cmd->add_option("--threads", cls.threads, "Worker threads (never changes results)")
      ->capture_default_str();
  cls.warp.attach(cls_cmd);

  WindowArgs win;
  CLI::App* win_cmd =
      app.add_subcommand("select-window", "Find the discriminative time window");
  add_config_flag(win_cmd);
  win_cmd->add_option("--input", win.input, "Processed dataset CSV")->required();
  win_cmd->add_option("--out-dir", win.out_dir, "Output directory")->required();
  win_cmd->add_option("--year", win.year, "Year to analyze")->required();
  win_cmd->add_option("--policy", win.policy, "min_length|union")->capture_default_str();
  win_cmd->add_option("--eps1", win.eps1, "First-difference plateau threshold (default auto)");
  win_cmd->add_option("--eps2", win.eps2, "Second-difference plateau threshold (default auto)");
  win_cmd->add_option("--smoothing-width", win.smoothing_width, "Score smoothing width")
      ->capture_default_str();
  win_cmd->add_option("--stability-run", win.stability_run, "Consecutive flat samples required")
      ->capture_default_str();
  win.warp.attach(win_cmd);

  DistanceArgs dist;
  CLI::App* dist_cmd =
      app.add_subcommand("distance", "Print the cost tables for two series");
  add_config_flag(dist_cmd);
  dist_cmd->add_option("--input", dist.input, "Processed dataset CSV")->required();
  dist_cmd->add_option("--id-a", dist.id_a, "First field id")->required();
  dist_cmd->add_option("--id-b", dist.id_b, "Second field id")->required();
  dist_cmd->add_option("--year-a", dist.year_a, "Year of the first field (0 = unique match)")
      ->capture_default_str();
  dist_cmd->add_option("--year-b", dist.year_b, "Year of the second field (0 = unique match)")
      ->capture_default_str();
  dist.warp.attach(dist_cmd);

  EvaluateArgs ev;
  CLI::App* ev_cmd = app.add_subcommand("evaluate", "Metrics from a predictions file");
  add_config_flag(ev_cmd);
  ev_cmd->add_option("--predictions", ev.predictions, "CSV with header predicted,observed")
      ->required();
  ev_cmd->add_option("--out-dir", ev.out_dir, "Output directory")->required();

  make_flags_take_last(&app);

  try {
    std::vector<std::string> args = merge_config_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim, sim_cmd);
    if (pre_cmd->parsed()) return cmd_preprocess(pre, pre_cmd);
    if (cls_cmd->parsed()) return cmd_classify(cls, cls_cmd);
    if (win_cmd->parsed()) return cmd_select_window(win, win_cmd);
    if (dist_cmd->parsed()) return cmd_distance(dist);
    if (ev_cmd->parsed()) return cmd_evaluate(ev, ev_cmd);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
