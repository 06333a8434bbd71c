#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sddete/ensemble.hpp"
#include "sddete/tree.hpp"

namespace sddete {

struct DatasetSpec {
  std::string path;
  std::string name;           // defaults to the file stem
  std::string format = "csv";  // "csv" or "libsvm"
  std::string label_column = "label";
  std::string positive_label = "1";
};

// Grid evaluation config. Valid cells are dt/rf crossed with
// none/rus/ros/smote, and sd_dete with none (its balancing is built in) or
// cros-ablation (clustering replaced by plain oversampling).
struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<std::string> methods{"dt", "rf", "sd_dete"};
  std::vector<std::string> samplers{"none", "rus", "ros", "smote"};
  int folds = 5;
  std::uint64_t seed = 0;
  int smote_k = 5;
  TreeParams dt;
  ForestParams rf;
  DeteParams dete;
};

struct FoldMetrics {
  double gm = 0.0;
  double auc_balanced = 0.0;
  double auroc = 0.0;
  double accuracy = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct CellResult {
  std::string dataset;
  std::string method;
  std::string sampler;
  std::vector<FoldMetrics> folds;
  FoldMetrics mean;
  bool failed = false;
  std::string error;
};

struct ExperimentReport {
  std::string tool_version;
  ExperimentConfig config;
  std::vector<CellResult> cells;
};

// Checks names, ranges and dataset entries; fills in default names.
// Throws ParameterError with the offending field in the message.
ExperimentConfig validate_config(ExperimentConfig config);

// Loads each dataset once, derives one stratified fold assignment per
// dataset shared by every cell, and runs the grid. A failing cell is
// recorded with its error and the run continues. All randomness is derived
// from config.seed, so two runs produce identical metric values.
ExperimentReport run_cv(const ExperimentConfig& config);

// dataset,method,sampler,fold,gm,auc_balanced,auroc,accuracy,
// train_seconds,predict_seconds; one row per fold plus a mean row, in
// grid order. Failed cells emit one row with fold=error and empty metrics.
void write_report_csv(const ExperimentReport& report, std::ostream& out);

void write_report_json(const ExperimentReport& report, std::ostream& out);

// Applies keys present in a JSON document onto the config; unknown keys
// are an error.
void apply_config_json(ExperimentConfig& config, const nlohmann::json& doc);

}  // namespace sddete
