#include "sddete/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "sddete/balance.hpp"
#include "sddete/errors.hpp"
#include "sddete/metrics.hpp"
#include "sddete/version.hpp"

namespace sddete {

namespace {

const std::set<std::string> kMethods{"dt", "rf", "sd_dete"};
const std::set<std::string> kSamplers{"none", "rus", "ros", "smote", "cros-ablation"};

bool cell_valid(const std::string& method, const std::string& sampler) {
  if (method == "sd_dete") return sampler == "none" || sampler == "cros-ablation";
  return sampler != "cros-ablation";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Predictions {
  std::vector<int> labels;
  std::vector<double> scores;  // positive-class score per record
};

Predictions predict_all(const PTable<LabeledPoint>& test,
                        const std::function<std::array<double, 2>(const LabeledPoint&)>& score) {
  auto scored = pmap(test, score);
  Predictions out;
  out.labels.reserve(test.size());
  out.scores.reserve(test.size());
  for (std::size_t q = 0; q < scored.partition_count(); ++q)
    for (const auto& s : scored.partition(q)) {
      out.labels.push_back(s[1] > s[0] ? 1 : 0);
      out.scores.push_back(s[1]);
    }
  return out;
}

// Forest vote disagrees with the mean-score argmax only on exact vote
// ties, so the label is computed separately from the score.
Predictions predict_all_forest(const ForestModel& model, const PTable<LabeledPoint>& test) {
  Predictions out;
  auto rows = pmap(test, [&](const LabeledPoint& r) {
    return std::pair<int, double>(predict_forest(model, r.features),
                                  predict_scores_forest(model, r.features)[1]);
  });
  out.labels.reserve(test.size());
  out.scores.reserve(test.size());
  for (std::size_t q = 0; q < rows.partition_count(); ++q)
    for (const auto& pr : rows.partition(q)) {
      out.labels.push_back(pr.first);
      out.scores.push_back(pr.second);
    }
  return out;
}

void format_metric(double v, std::string& out) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  (void)ec;
  out.append(buf, ptr);
}

nlohmann::ordered_json fold_to_json(const FoldMetrics& m) {
  nlohmann::ordered_json j;
  j["gm"] = m.gm;
  j["auc_balanced"] = m.auc_balanced;
  j["auroc"] = m.auroc;
  j["accuracy"] = m.accuracy;
  j["train_seconds"] = m.train_seconds;
  j["predict_seconds"] = m.predict_seconds;
  return j;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["datasets"] = nlohmann::ordered_json::array();
  for (const auto& d : c.datasets) {
    nlohmann::ordered_json dj;
    dj["path"] = d.path;
    dj["name"] = d.name;
    dj["format"] = d.format;
    dj["label_column"] = d.label_column;
    dj["positive_label"] = d.positive_label;
    j["datasets"].push_back(std::move(dj));
  }
  j["methods"] = c.methods;
  j["samplers"] = c.samplers;
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["smote_k"] = c.smote_k;
  j["dt"] = {{"max_depth", c.dt.max_depth}, {"max_bins", c.dt.max_bins}};
  j["rf"] = {{"n_trees", c.rf.n_trees},
             {"max_depth", c.rf.tree.max_depth},
             {"max_bins", c.rf.tree.max_bins}};
  j["sd_dete"] = {{"iter", c.dete.iter},
                  {"cuts", c.dete.cuts},
                  {"max_clust", c.dete.max_clust},
                  {"tree_depth", c.dete.tree_depth}};
  return j;
}

}  // namespace

ExperimentConfig validate_config(ExperimentConfig config) {
  if (config.datasets.empty()) throw ParameterError("config: datasets must not be empty");
  for (auto& d : config.datasets) {
    if (d.path.empty()) throw ParameterError("config: dataset path must not be empty");
    if (d.name.empty()) d.name = std::filesystem::path(d.path).stem().string();
    if (d.format != "csv" && d.format != "libsvm")
      throw ParameterError("config: unknown dataset format '" + d.format + "'");
  }
  if (config.methods.empty()) throw ParameterError("config: methods must not be empty");
  for (const auto& m : config.methods)
    if (!kMethods.count(m)) throw ParameterError("config: unknown method '" + m + "'");
  if (config.samplers.empty()) throw ParameterError("config: samplers must not be empty");
  for (const auto& s : config.samplers)
    if (!kSamplers.count(s)) throw ParameterError("config: unknown sampler '" + s + "'");
  if (config.folds < 2) throw ParameterError("config: folds must be at least 2");
  if (config.smote_k < 1) throw ParameterError("config: smote_k must be positive");
  for (const auto& m : config.methods) {
    bool any = std::any_of(config.samplers.begin(), config.samplers.end(),
                           [&](const std::string& s) { return cell_valid(m, s); });
    if (!any)
      throw ParameterError("config: method '" + m +
                           "' has no valid sampler in the requested grid (sd_dete pairs "
                           "with none or cros-ablation, dt/rf with none, rus, ros or smote)");
  }
  return config;
}

ExperimentReport run_cv(const ExperimentConfig& raw) {
  ExperimentConfig config = validate_config(raw);
  ExperimentReport report;
  report.tool_version = kVersion;
  report.config = config;

  for (std::size_t di = 0; di < config.datasets.size(); ++di) {
    const DatasetSpec& ds = config.datasets[di];
    PTable<LabeledPoint> data = ds.format == "libsvm"
                                    ? load_libsvm(ds.path, ds.positive_label)
                                    : load_csv(ds.path, ds.label_column, ds.positive_label);
    FoldSpec folds = stratified_kfold(data, config.folds,
                                      derive_seed(config.seed, di, "folds"));

    for (const auto& method : config.methods) {
      for (const auto& sampler : config.samplers) {
        if (!cell_valid(method, sampler)) continue;
        CellResult cell;
        cell.dataset = ds.name;
        cell.method = method;
        cell.sampler = sampler;
        std::uint64_t cell_seed =
            derive_seed(config.seed, fnv1a64(ds.name + "|" + method + "|" + sampler), "cell");
        try {
          for (int f = 0; f < config.folds; ++f) {
            auto [train, test] = split_fold(data, folds, f);
            ClassStats test_before = class_stats(test);
            ClassStats train_stats = class_stats(train);

            auto t0 = std::chrono::steady_clock::now();
            PTable<LabeledPoint> fitted_on = train;
            if (method != "sd_dete" && sampler != "none") {
              RngStream srng = substream(cell_seed, static_cast<std::uint64_t>(f), "sampler");
              if (sampler == "ros")
                fitted_on = ros(train, srng);
              else if (sampler == "rus")
                fitted_on = rus(train, srng);
              else
                fitted_on = smote(train, config.smote_k, srng);
            }

            FoldMetrics fm;
            Predictions pred;
            if (method == "dt") {
              TreeModel model = fit_tree(fitted_on, config.dt);
              fm.train_seconds = seconds_since(t0);
              auto t1 = std::chrono::steady_clock::now();
              pred = predict_all(test, [&](const LabeledPoint& r) {
                return predict_scores_tree(model, r.features);
              });
              fm.predict_seconds = seconds_since(t1);
            } else if (method == "rf") {
              RngStream trng = substream(cell_seed, static_cast<std::uint64_t>(f), "train");
              ForestModel model = fit_random_forest(fitted_on, config.rf, trng);
              fm.train_seconds = seconds_since(t0);
              auto t1 = std::chrono::steady_clock::now();
              pred = predict_all_forest(model, test);
              fm.predict_seconds = seconds_since(t1);
            } else {
              DeteParams dp = config.dete;
              dp.seed = derive_seed(cell_seed, static_cast<std::uint64_t>(f), "train");
              dp.balancer = sampler == "cros-ablation" ? DeteParams::Balancer::plain_ros
                                                       : DeteParams::Balancer::cluster_ros;
              DeteModel model = fit_sd_dete(fitted_on, dp);
              fm.train_seconds = seconds_since(t0);
              auto t1 = std::chrono::steady_clock::now();
              pred = predict_all(test, [&](const LabeledPoint& r) {
                return predict_scores(model, r.features);
              });
              fm.predict_seconds = seconds_since(t1);
            }

            // The test fold must reach metrics exactly as it was split, and
            // the sampler must have seen only the training fold: resampled
            // sizes are pinned to the training fold's class counts.
            ClassStats test_after = class_stats(test);
            if (test_after.count(0) != test_before.count(0) ||
                test_after.count(1) != test_before.count(1))
              throw Error("cv: test fold changed during training");
            if (method != "sd_dete") {
              std::size_t expect = train.size();
              if (sampler == "ros" || sampler == "smote")
                expect = 2 * train_stats.count(train_stats.majority);
              else if (sampler == "rus")
                expect = 2 * train_stats.count(train_stats.minority);
              if (fitted_on.size() != expect)
                throw Error("cv: sampled training fold has unexpected size");
            }

            std::vector<int> actual;
            actual.reserve(test.size());
            std::vector<ScoredPrediction> scored;
            scored.reserve(test.size());
            {
              std::size_t i = 0;
              for (std::size_t q = 0; q < test.partition_count(); ++q)
                for (const auto& r : test.partition(q)) {
                  actual.push_back(r.label);
                  scored.push_back({pred.scores[i], r.label});
                  ++i;
                }
            }
            ConfusionMatrix cm = confusion(pred.labels, actual);
            fm.gm = gm(cm);
            fm.auc_balanced = auc_balanced(cm);
            fm.auroc = auroc(scored);
            fm.accuracy = accuracy(cm);
            cell.folds.push_back(fm);
          }
          for (const auto& fm : cell.folds) {
            cell.mean.gm += fm.gm;
            cell.mean.auc_balanced += fm.auc_balanced;
            cell.mean.auroc += fm.auroc;
            cell.mean.accuracy += fm.accuracy;
            cell.mean.train_seconds += fm.train_seconds;
            cell.mean.predict_seconds += fm.predict_seconds;
          }
          double k = static_cast<double>(cell.folds.size());
          cell.mean.gm /= k;
          cell.mean.auc_balanced /= k;
          cell.mean.auroc /= k;
          cell.mean.accuracy /= k;
          cell.mean.train_seconds /= k;
          cell.mean.predict_seconds /= k;
        } catch (const Error& e) {
          cell.failed = true;
          cell.error = e.what();
          cell.folds.clear();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  std::string text =
      "dataset,method,sampler,fold,gm,auc_balanced,auroc,accuracy,train_seconds,"
      "predict_seconds\n";
  auto row = [&text](const CellResult& cell, const std::string& fold, const FoldMetrics& m) {
    text += cell.dataset;
    text += ',';
    text += cell.method;
    text += ',';
    text += cell.sampler;
    text += ',';
    text += fold;
    for (double v : {m.gm, m.auc_balanced, m.auroc, m.accuracy, m.train_seconds,
                     m.predict_seconds}) {
      text += ',';
      format_metric(v, text);
    }
    text += '\n';
  };
  for (const auto& cell : report.cells) {
    if (cell.failed) {
      text += cell.dataset + ',' + cell.method + ',' + cell.sampler + ",error,,,,,,\n";
      continue;
    }
    for (std::size_t f = 0; f < cell.folds.size(); ++f)
      row(cell, std::to_string(f), cell.folds[f]);
    row(cell, "mean", cell.mean);
  }
  out << text;
}

void write_report_json(const ExperimentReport& report, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["tool_version"] = report.tool_version;
  doc["config"] = config_to_json(report.config);
  doc["cells"] = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    nlohmann::ordered_json cj;
    cj["dataset"] = cell.dataset;
    cj["method"] = cell.method;
    cj["sampler"] = cell.sampler;
    if (cell.failed) {
      cj["error"] = cell.error;
    } else {
      cj["folds"] = nlohmann::ordered_json::array();
      for (const auto& fm : cell.folds) cj["folds"].push_back(fold_to_json(fm));
      cj["mean"] = fold_to_json(cell.mean);
    }
    doc["cells"].push_back(std::move(cj));
  }
  out << doc.dump(2) << '\n';
}

void apply_config_json(ExperimentConfig& config, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParameterError("config file: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "datasets") {
        config.datasets.clear();
        for (const auto& dj : value) {
          DatasetSpec d;
          d.path = dj.at("path").get<std::string>();
          if (dj.contains("name")) d.name = dj["name"].get<std::string>();
          if (dj.contains("format")) d.format = dj["format"].get<std::string>();
          if (dj.contains("label_column"))
            d.label_column = dj["label_column"].get<std::string>();
          if (dj.contains("positive_label"))
            d.positive_label = dj["positive_label"].get<std::string>();
          config.datasets.push_back(std::move(d));
        }
      } else if (key == "methods") {
        config.methods = value.get<std::vector<std::string>>();
      } else if (key == "samplers") {
        config.samplers = value.get<std::vector<std::string>>();
      } else if (key == "folds") {
        config.folds = value.get<int>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "smote_k") {
        config.smote_k = value.get<int>();
      } else if (key == "dt") {
        if (value.contains("max_depth")) config.dt.max_depth = value["max_depth"].get<int>();
        if (value.contains("max_bins")) config.dt.max_bins = value["max_bins"].get<int>();
      } else if (key == "rf") {
        if (value.contains("n_trees")) config.rf.n_trees = value["n_trees"].get<int>();
        if (value.contains("max_depth"))
          config.rf.tree.max_depth = value["max_depth"].get<int>();
        if (value.contains("max_bins")) config.rf.tree.max_bins = value["max_bins"].get<int>();
      } else if (key == "sd_dete") {
        if (value.contains("iter")) config.dete.iter = value["iter"].get<int>();
        if (value.contains("cuts")) config.dete.cuts = value["cuts"].get<int>();
        if (value.contains("max_clust"))
          config.dete.max_clust = value["max_clust"].get<int>();
        if (value.contains("tree_depth"))
          config.dete.tree_depth = value["tree_depth"].get<int>();
      } else if (key == "workers" || key == "report") {
        // handled by the command line layer
      } else {
        throw ParameterError("config file: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("config file: bad value for '" + key + "': " + e.what());
    }
  }
}

}  // namespace sddete
