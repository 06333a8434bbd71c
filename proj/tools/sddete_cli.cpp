// Command line front end: dataset generation, resampling, training,
// prediction, inspection, and cross-validated grid evaluation.

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sddete/balance.hpp"
#include "sddete/cluster.hpp"
#include "sddete/data.hpp"
#include "sddete/ensemble.hpp"
#include "sddete/errors.hpp"
#include "sddete/experiment.hpp"
#include "sddete/parallel.hpp"
#include "sddete/persist.hpp"
#include "sddete/version.hpp"

namespace {

using namespace sddete;

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string report = "csv";
  std::string config_path;
};

struct GenOpts {
  std::string out;
  std::size_t n = 20000;
  double ir = 50.0;
  std::size_t dims = 10;
  double separation = 1.8;
  std::size_t minority_modes = 1;
  double mode_spread = 6.0;
};

struct BalanceOpts {
  std::string in, out;
  std::string method = "ros";
  std::string label_column = "label";
  std::string positive = "1";
  int smote_k = 5;
  int clusters = 10;
};

struct TrainOpts {
  std::string in, out;
  std::string method = "sd_dete";
  std::string label_column = "label";
  std::string positive = "1";
  std::string sampler = "none";
  int smote_k = 5;
  int max_depth = 0;  // 0 = method default
  int max_bins = 32;
  int trees = 200;
  int iter = 10;
  int cuts = 5;
  int max_clust = 10;
  int tree_depth = 10;
  bool ablation_plain_ros = false;
};

struct PredictOpts {
  std::string model, in, out;
  std::string label_column = "label";
  std::string positive = "1";
  bool unlabeled = false;
};

struct EvaluateOpts {
  std::vector<std::string> data;
  std::string format = "csv";
  std::string label_column = "label";
  std::string positive = "1";
  std::vector<std::string> methods{"dt", "rf", "sd_dete"};
  std::vector<std::string> samplers{"none", "rus", "ros", "smote"};
  int folds = 5;
  int smote_k = 5;
  int dt_max_depth = 5;
  int rf_trees = 200;
  int rf_max_depth = 4;
  int iter = 10;
  int cuts = 5;
  int max_clust = 10;
  int tree_depth = 10;
  std::string out;  // empty = stdout
};

struct InspectOpts {
  std::string model;
};

void shortest(double v, std::string& out) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

int run_gen(const GlobalOpts& g, const GenOpts& o) {
  PTable<LabeledPoint> data =
      o.minority_modes > 1
          ? synth_clustered_minority(o.n, o.ir, o.dims, o.separation, o.minority_modes,
                                     o.mode_spread, g.seed)
          : synth_two_gaussian(o.n, o.ir, o.dims, o.separation, g.seed);
  write_csv(data, o.out);
  ClassStats s = class_stats(data);
  std::cerr << "wrote " << s.total() << " records (" << s.count(0) << " majority, "
            << s.count(1) << " minority, ir " << s.ir << ") to " << o.out << "\n";
  return 0;
}

int run_balance(const GlobalOpts& g, const BalanceOpts& o) {
  PTable<LabeledPoint> data = load_csv(o.in, o.label_column, o.positive);
  RngStream rng = substream(g.seed, 0, "balance");
  SamplerReport report;
  PTable<LabeledPoint> out;
  if (o.method == "ros") {
    out = ros(data, rng, &report);
  } else if (o.method == "rus") {
    out = rus(data, rng, &report);
  } else if (o.method == "smote") {
    out = smote(data, o.smote_k, rng, &report);
  } else if (o.method == "cros") {
    auto features = pmap(data, [](const LabeledPoint& r) { return r.features; });
    RngStream km = substream(g.seed, 0, "balance-kmeans");
    ClusterModel cm = fit_bisecting_kmeans(features, o.clusters, km);
    out = cros(data, assign_clusters(cm, features), rng, &report);
  } else {
    throw ParameterError("balance: unknown method '" + o.method + "'");
  }
  write_csv(out, o.out);
  std::cerr << "before: " << report.before.count(0) << "/" << report.before.count(1)
            << "  after: " << report.after.count(0) << "/" << report.after.count(1) << "\n";
  return 0;
}

int run_train(const GlobalOpts& g, const TrainOpts& o) {
  PTable<LabeledPoint> data = load_csv(o.in, o.label_column, o.positive);
  if (o.method == "sd_dete" && o.sampler != "none")
    throw ParameterError("train: sd_dete balances internally; --sampler must be none");

  PTable<LabeledPoint> fitted_on = data;
  if (o.sampler != "none") {
    RngStream srng = substream(g.seed, 0, "sampler");
    if (o.sampler == "ros")
      fitted_on = ros(data, srng);
    else if (o.sampler == "rus")
      fitted_on = rus(data, srng);
    else if (o.sampler == "smote")
      fitted_on = smote(data, o.smote_k, srng);
    else
      throw ParameterError("train: unknown sampler '" + o.sampler + "'");
  }

  if (o.method == "dt") {
    TreeParams p;
    p.max_depth = o.max_depth > 0 ? o.max_depth : 5;
    p.max_bins = o.max_bins;
    save_tree_model(fit_tree(fitted_on, p), o.out);
  } else if (o.method == "rf") {
    ForestParams p;
    p.n_trees = o.trees;
    p.tree.max_depth = o.max_depth > 0 ? o.max_depth : 4;
    p.tree.max_bins = o.max_bins;
    RngStream rng = substream(g.seed, 0, "train");
    save_forest_model(fit_random_forest(fitted_on, p, rng), o.out);
  } else if (o.method == "sd_dete") {
    DeteParams p;
    p.iter = o.iter;
    p.cuts = o.cuts;
    p.max_clust = o.max_clust;
    p.tree_depth = o.tree_depth;
    p.max_bins = o.max_bins;
    p.seed = derive_seed(g.seed, 0, "train");
    p.balancer = o.ablation_plain_ros ? DeteParams::Balancer::plain_ros
                                      : DeteParams::Balancer::cluster_ros;
    save_model(fit_sd_dete(fitted_on, p), o.out);
  } else {
    throw ParameterError("train: unknown method '" + o.method + "'");
  }
  std::cerr << "wrote model to " << o.out << "\n";
  return 0;
}

int run_predict(const PredictOpts& o) {
  PTable<LabeledPoint> data = o.unlabeled
                                  ? load_csv_features(o.in)
                                  : load_csv(o.in, o.label_column, o.positive);
  ModelKind kind = peek_model_kind(o.model);

  std::string text = o.unlabeled ? "predicted,score_positive\n"
                                 : "predicted,score_positive,actual\n";
  auto emit = [&](int label, double score, const LabeledPoint& r) {
    text += std::to_string(label);
    text += ',';
    shortest(score, text);
    if (!o.unlabeled) {
      text += ',';
      text += std::to_string(r.label);
    }
    text += '\n';
  };

  if (kind == ModelKind::decision_tree) {
    TreeModel model = load_tree_model(o.model);
    for (const auto& r : data.to_records())
      emit(predict_tree(model, r.features), predict_scores_tree(model, r.features)[1], r);
  } else if (kind == ModelKind::random_forest) {
    ForestModel model = load_forest_model(o.model);
    for (const auto& r : data.to_records())
      emit(predict_forest(model, r.features), predict_scores_forest(model, r.features)[1], r);
  } else {
    DeteModel model = load_model(o.model);
    for (const auto& r : data.to_records()) {
      auto s = predict_scores(model, r.features);
      emit(s[1] > s[0] ? 1 : 0, s[1] / static_cast<double>(model.iter), r);
    }
  }

  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw PersistenceError("cannot open for writing: " + o.out);
  f << text;
  if (!f) throw PersistenceError("write failed: " + o.out);
  std::cerr << "wrote " << data.size() << " predictions to " << o.out << "\n";
  return 0;
}

int run_inspect(const InspectOpts& o) {
  ModelKind kind = peek_model_kind(o.model);
  if (kind == ModelKind::decision_tree) {
    TreeModel m = load_tree_model(o.model);
    std::cout << "decision tree\n"
              << "  arity: " << m.arity << "\n"
              << "  nodes: " << m.nodes.size() << " (" << m.leaf_count() << " leaves)\n"
              << "  depth: " << m.depth() << " (max " << m.params.max_depth << ")\n";
  } else if (kind == ModelKind::random_forest) {
    ForestModel m = load_forest_model(o.model);
    std::size_t nodes = 0;
    for (const auto& t : m.trees) nodes += t.nodes.size();
    std::cout << "random forest\n"
              << "  arity: " << m.arity << "\n"
              << "  trees: " << m.trees.size() << "\n"
              << "  total nodes: " << nodes << "\n"
              << "  max depth: " << m.params.tree.max_depth << "\n";
  } else {
    DeteModel m = load_model(o.model);
    std::cout << "smart data tree ensemble\n"
              << "  arity: " << m.arity() << "\n"
              << "  iterations: " << m.iter << "\n"
              << "  classes: " << m.num_classes << "\n";
    for (std::size_t i = 0; i < m.iterations.size(); ++i) {
      const auto& it = m.iterations[i];
      std::cout << "  iteration " << i << ": cuts " << it.rd.cuts << ", components "
                << it.pca.k() << ", tree depth " << it.tree.depth() << ", "
                << it.tree.leaf_count() << " leaves\n";
    }
  }
  return 0;
}

int run_evaluate(const GlobalOpts& g, const EvaluateOpts& o,
                 const nlohmann::json* config_doc) {
  ExperimentConfig config;
  for (const auto& path : o.data) {
    DatasetSpec d;
    d.path = path;
    d.format = o.format;
    d.label_column = o.label_column;
    d.positive_label = o.positive;
    config.datasets.push_back(std::move(d));
  }
  config.methods = o.methods;
  config.samplers = o.samplers;
  config.folds = o.folds;
  config.seed = g.seed;
  config.smote_k = o.smote_k;
  config.dt.max_depth = o.dt_max_depth;
  config.rf.n_trees = o.rf_trees;
  config.rf.tree.max_depth = o.rf_max_depth;
  config.dete.iter = o.iter;
  config.dete.cuts = o.cuts;
  config.dete.max_clust = o.max_clust;
  config.dete.tree_depth = o.tree_depth;
  if (config_doc) apply_config_json(config, *config_doc);

  ExperimentReport report = run_cv(config);

  auto write = [&](std::ostream& os) {
    if (g.report == "json")
      write_report_json(report, os);
    else
      write_report_csv(report, os);
  };
  if (o.out.empty()) {
    write(std::cout);
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw PersistenceError("cannot open for writing: " + o.out);
    write(f);
    if (!f) throw PersistenceError("write failed: " + o.out);
    std::cerr << "wrote report to " << o.out << "\n";
  }

  bool all_failed = !report.cells.empty();
  for (const auto& cell : report.cells) {
    if (cell.failed)
      std::cerr << "cell " << cell.dataset << "/" << cell.method << "/" << cell.sampler
                << " failed: " << cell.error << "\n";
    else
      all_failed = false;
  }
  return all_failed ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smart-data tree ensemble toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master random seed");
  app.add_option("--workers", g.workers, "worker threads for partition operations");
  app.add_option("--report", g.report, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--config", g.config_path, "JSON config; its values override flags");

  GenOpts gen;
  auto* cgen = app.add_subcommand("gen", "generate a synthetic imbalanced dataset");
  cgen->add_option("--out", gen.out, "output CSV path")->required();
  cgen->add_option("--n", gen.n, "total records");
  cgen->add_option("--ir", gen.ir, "imbalance ratio (majority/minority)");
  cgen->add_option("--dims", gen.dims, "feature count");
  cgen->add_option("--separation", gen.separation, "distance between class means");
  cgen->add_option("--minority-modes", gen.minority_modes, "minority sub-clusters");
  cgen->add_option("--mode-spread", gen.mode_spread, "spacing between minority modes");

  BalanceOpts bal;
  auto* cbal = app.add_subcommand("balance", "resample a CSV dataset");
  cbal->add_option("--in", bal.in, "input CSV path")->required();
  cbal->add_option("--out", bal.out, "output CSV path")->required();
  cbal->add_option("--method", bal.method, "ros, rus, smote or cros")
      ->check(CLI::IsMember({"ros", "rus", "smote", "cros"}));
  cbal->add_option("--label-column", bal.label_column, "label column name or index");
  cbal->add_option("--positive", bal.positive, "positive (minority) label value");
  cbal->add_option("--smote-k", bal.smote_k, "neighbors for smote");
  cbal->add_option("--clusters", bal.clusters, "clusters for cros");

  TrainOpts tr;
  auto* ctr = app.add_subcommand("train", "fit a model and write it to JSON");
  ctr->add_option("--in", tr.in, "input CSV path")->required();
  ctr->add_option("--out", tr.out, "output model path")->required();
  ctr->add_option("--method", tr.method, "dt, rf or sd_dete")
      ->check(CLI::IsMember({"dt", "rf", "sd_dete"}));
  ctr->add_option("--label-column", tr.label_column, "label column name or index");
  ctr->add_option("--positive", tr.positive, "positive (minority) label value");
  ctr->add_option("--sampler", tr.sampler, "resampler before dt/rf training")
      ->check(CLI::IsMember({"none", "ros", "rus", "smote"}));
  ctr->add_option("--smote-k", tr.smote_k, "neighbors for smote");
  ctr->add_option("--max-depth", tr.max_depth, "tree depth for dt/rf");
  ctr->add_option("--max-bins", tr.max_bins, "split candidate cap per feature");
  ctr->add_option("--trees", tr.trees, "trees for rf");
  ctr->add_option("--iter", tr.iter, "ensemble iterations for sd_dete");
  ctr->add_option("--cuts", tr.cuts, "discretization buckets for sd_dete");
  ctr->add_option("--max-clust", tr.max_clust, "cluster cap for sd_dete");
  ctr->add_option("--tree-depth", tr.tree_depth, "tree depth for sd_dete");
  ctr->add_flag("--ablation-plain-ros", tr.ablation_plain_ros,
                "replace cluster-wise balancing with plain oversampling");

  PredictOpts pr;
  auto* cpr = app.add_subcommand("predict", "score a CSV with a saved model");
  cpr->add_option("--model", pr.model, "model path")->required();
  cpr->add_option("--in", pr.in, "input CSV path")->required();
  cpr->add_option("--out", pr.out, "output predictions CSV")->required();
  cpr->add_option("--label-column", pr.label_column, "label column name or index");
  cpr->add_option("--positive", pr.positive, "positive (minority) label value");
  cpr->add_flag("--unlabeled", pr.unlabeled, "input has no label column");

  EvaluateOpts ev;
  auto* cev = app.add_subcommand("evaluate", "cross-validated method/sampler grid");
  cev->add_option("--data", ev.data, "dataset path (repeatable)");
  cev->add_option("--format", ev.format, "csv or libsvm")
      ->check(CLI::IsMember({"csv", "libsvm"}));
  cev->add_option("--label-column", ev.label_column, "label column name or index");
  cev->add_option("--positive", ev.positive, "positive (minority) label value");
  cev->add_option("--methods", ev.methods, "methods to evaluate")->delimiter(',');
  cev->add_option("--samplers", ev.samplers, "samplers to cross with")->delimiter(',');
  cev->add_option("--folds", ev.folds, "cross-validation folds");
  cev->add_option("--smote-k", ev.smote_k, "neighbors for smote");
  cev->add_option("--dt-max-depth", ev.dt_max_depth, "dt depth");
  cev->add_option("--rf-trees", ev.rf_trees, "rf tree count");
  cev->add_option("--rf-max-depth", ev.rf_max_depth, "rf depth");
  cev->add_option("--iter", ev.iter, "sd_dete iterations");
  cev->add_option("--cuts", ev.cuts, "sd_dete discretization buckets");
  cev->add_option("--max-clust", ev.max_clust, "sd_dete cluster cap");
  cev->add_option("--tree-depth", ev.tree_depth, "sd_dete tree depth");
  cev->add_option("--out", ev.out, "report path (default: stdout)");

  InspectOpts in;
  auto* cin = app.add_subcommand("inspect", "summarize a saved model");
  cin->add_option("--model", in.model, "model path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    nlohmann::json config_doc;
    bool have_config = false;
    if (!g.config_path.empty()) {
      std::ifstream f(g.config_path);
      if (!f) throw ParameterError("cannot open config file: " + g.config_path);
      try {
        f >> config_doc;
      } catch (const nlohmann::json::exception& e) {
        throw ParameterError("bad config file " + g.config_path + ": " + e.what());
      }
      if (!config_doc.is_object())
        throw ParameterError("config file: top level must be an object");
      have_config = true;
      if (config_doc.contains("seed")) g.seed = config_doc["seed"].get<std::uint64_t>();
      if (config_doc.contains("workers"))
        g.workers = config_doc["workers"].get<std::size_t>();
      if (config_doc.contains("report")) {
        g.report = config_doc["report"].get<std::string>();
        if (g.report != "csv" && g.report != "json")
          throw ParameterError("config file: report must be csv or json");
      }
    }
    parallel::set_worker_count(g.workers);

    if (app.got_subcommand(cgen)) return run_gen(g, gen);
    if (app.got_subcommand(cbal)) return run_balance(g, bal);
    if (app.got_subcommand(ctr)) return run_train(g, tr);
    if (app.got_subcommand(cpr)) return run_predict(pr);
    if (app.got_subcommand(cev))
      return run_evaluate(g, ev, have_config ? &config_doc : nullptr);
    if (app.got_subcommand(cin)) return run_inspect(in);
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const PersistenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
