// rc: command-line front end for the clustering toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rc/cluster.hpp"
#include "rc/datagen.hpp"
#include "rc/eval.hpp"
#include "rc/explain.hpp"
#include "rc/io.hpp"
#include "rc/parallel.hpp"
#include "rc/pipeline.hpp"
#include "rc/predict.hpp"
#include "rc/sankey.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kBadFlag = 2, kIo = 3, kContract = 4 };

void header(const std::string& command, const ojson& params) {
  std::cerr << "rc " << rc::kVersion << " " << command << " threads=" << rc::thread_count()
            << " params=" << params.dump() << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto out = rc::detail::open_out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw rc::IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  auto in = rc::detail::open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw rc::IoError(path.string() + ": malformed JSON: " + e.what());
  }
}

rc::PointSet read_points(const fs::path& path, bool has_header) {
  const auto fmt = rc::guess_point_format(path);
  return rc::load_points(path, fmt, rc::CsvOptions{has_header, ','});
}

// -- cluster ---------------------------------------------------------------

struct ClusterArgs {
  std::string input;
  bool header = false;
  std::size_t min_cluster_size = 5;
  std::optional<std::size_t> min_samples, k, nlist, nprobe;
  std::string mode = "exact";
  std::uint64_t seed = 0;
  bool allow_single = false;
  std::string out, tree_out, edges_out;
  bool timing = false;
};

int run_cluster(const ClusterArgs& a) {
  rc::ClusterParams p;
  p.min_cluster_size = a.min_cluster_size;
  p.min_samples = a.min_samples;
  p.k = a.k;
  p.mode = a.mode == "ivf" ? rc::KnnMode::ivf : rc::KnnMode::exact;
  p.nlist = a.nlist;
  p.nprobe = a.nprobe;
  p.seed = a.seed;
  p.allow_single_cluster = a.allow_single;
  header("cluster", rc::to_json(p));

  const auto points = read_points(a.input, a.header);
  const auto res = rc::cluster(points, p);

  ojson j;
  j["version"] = std::string(rc::kVersion);
  j["input"] = a.input;
  j["input_header"] = a.header;
  j["n"] = points.size();
  j["dim"] = points.dim();
  j["parameters"] = rc::to_json(res.params);
  j["num_clusters"] = res.assignment.num_clusters();
  j["noise_count"] = res.assignment.noise_count();
  j["knn_components"] = res.knn_components;
  j["labels"] = res.assignment.labels;
  j["strengths"] = res.assignment.strengths;
  if (a.timing) {
    ojson t = ojson::object();
    for (const auto& s : res.timings) t[s.stage] = s.ms;
    j["timing_ms"] = std::move(t);
  }
  write_json(a.out, j);
  if (!a.tree_out.empty()) write_json(a.tree_out, rc::condensed_tree_json(res.tree, &res.scores));
  if (!a.edges_out.empty()) rc::write_edges_csv(a.edges_out, res.spanning_edges);
  std::cout << "clusters " << res.assignment.num_clusters() << " noise "
            << res.assignment.noise_count() << "\n";
  return kOk;
}

// -- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string model, queries, train, out;
  bool header = false;
  std::size_t k_assign = 5;
};

int run_predict(const PredictArgs& a) {
  header("predict", {{"model", a.model}, {"queries", a.queries}, {"k_assign", a.k_assign}});
  const auto model_json = read_json(a.model);
  if (!model_json.contains("labels") || !model_json.contains("strengths")) {
    throw rc::IoError(a.model + ": not a cluster run (labels/strengths missing)");
  }
  fs::path train = a.train;
  bool train_header = a.header;
  if (train.empty()) {
    train = model_json.at("input").get<std::string>();
    train_header = model_json.value("input_header", false);
    if (train.is_relative() && !fs::exists(train)) train = fs::path(a.model).parent_path() / train;
  }
  rc::ClusterAssignment labels;
  labels.labels = model_json.at("labels").get<std::vector<rc::Label>>();
  labels.strengths = model_json.at("strengths").get<std::vector<double>>();
  labels.validate();
  rc::InductiveModel model{read_points(train, train_header), std::move(labels), a.k_assign};
  const auto queries = read_points(a.queries, a.header);
  const auto res = rc::assign_new_points(model, queries);

  ojson j;
  j["version"] = std::string(rc::kVersion);
  j["model"] = a.model;
  j["queries"] = a.queries;
  j["k_assign"] = a.k_assign;
  j["labels"] = res.labels;
  j["strengths"] = res.strengths;
  if (a.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(a.out, j);
  }
  return kOk;
}

// -- gen -------------------------------------------------------------------

struct GenArgs {
  std::string shape = "blobs";
  std::string suite;
  std::size_t n = 300, dim = 2, centers = 3;
  double noise = 0.05, cluster_std = 1.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string prefix;
  bool binary = false;
  // fraud stream
  std::size_t snapshots = 4, per_snapshot = 500;
};

ojson write_dataset(const fs::path& dir, const std::string& stem, const rc::SyntheticSpec& spec,
                    bool binary) {
  const auto ds = rc::generate(spec);
  const auto points = dir / (stem + (binary ? "points.bin" : "points.csv"));
  const auto truth = dir / (stem + "truth.csv");
  rc::write_points(points, ds.points, binary ? rc::PointFormat::binary : rc::PointFormat::csv);
  rc::write_labels_csv(truth, ds.truth);
  ojson e;
  e["spec"] = rc::to_json(spec);
  e["points"] = points.filename().string();
  e["truth"] = truth.filename().string();
  return e;
}

int run_gen(const GenArgs& a) {
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  ojson manifest;
  manifest["version"] = std::string(rc::kVersion);
  manifest["prng"] = std::string(rc::Rng::kAlgorithm);

  if (a.suite == "benchmark") {
    header("gen", {{"suite", a.suite}});
    auto entries = ojson::array();
    for (const auto& b : rc::benchmark_manifest()) {
      auto e = write_dataset(dir, b.name + "_", b.spec, a.binary);
      e["name"] = b.name;
      e["classes"] = b.classes;
      e["min_cluster_size"] = b.min_cluster_size;
      entries.push_back(std::move(e));
    }
    manifest["datasets"] = std::move(entries);
  } else if (a.suite == "fraud") {
    rc::FraudStreamSpec spec;
    spec.snapshots = a.snapshots;
    spec.per_snapshot = a.per_snapshot;
    spec.seed = a.seed;
    header("gen", {{"suite", a.suite}, {"seed", a.seed}, {"snapshots", a.snapshots},
                   {"per_snapshot", a.per_snapshot}});
    const auto stream = rc::generate_fraud_stream(spec);
    rc::write_transactions(dir / (a.prefix + "transactions.ndjson"), stream.records);
    rc::write_labels_csv(dir / (a.prefix + "blobs.csv"), stream.blob);
    manifest["transactions"] = a.prefix + "transactions.ndjson";
    manifest["blobs"] = a.prefix + "blobs.csv";
    manifest["planted_blob"] = spec.planted_blob;
    manifest["records"] = stream.records.size();
  } else if (!a.suite.empty()) {
    throw CLI::ValidationError("--suite", "must be benchmark or fraud");
  } else {
    const auto shape = rc::parse_shape(a.shape);
    if (!shape) throw CLI::ValidationError("--shape", "unknown shape '" + a.shape + "'");
    rc::SyntheticSpec spec;
    spec.shape = *shape;
    spec.n = a.n;
    spec.dim = a.dim;
    spec.noise = a.noise;
    spec.seed = a.seed;
    spec.centers = a.centers;
    spec.cluster_std = a.cluster_std;
    header("gen", rc::to_json(spec));
    manifest["datasets"] = ojson::array({write_dataset(dir, a.prefix, spec, a.binary)});
  }
  write_json(dir / (a.prefix + "manifest.json"), manifest);
  return kOk;
}

// -- ari -------------------------------------------------------------------

int run_ari(const std::string& a, const std::string& b) {
  header("ari", {{"a", a}, {"b", b}});
  const auto la = rc::load_labels(a);
  const auto lb = rc::load_labels(b);
  std::cout << rc::detail::format_double(rc::adjusted_rand_index(la, lb)) << "\n";
  return kOk;
}

// -- experiment --------------------------------------------------------------

int run_experiment_cmd(const std::string& config, const std::string& data,
                       const std::string& out_dir) {
  const auto spec = rc::experiment_spec_from_json(read_json(config));
  header("experiment", rc::to_json(spec));
  const auto records = rc::load_transactions(data);
  const auto res = rc::run_experiment(spec, records);

  const fs::path dir = out_dir;
  fs::create_directories(dir);
  std::string csv = "id,window,cluster,strength,predicted_fraud,actual_fraud\n";
  for (const auto& p : res.predictions) {
    csv += records[p.record].id + "," + std::to_string(p.window) + "," +
           std::to_string(p.cluster) + "," + rc::detail::format_double(p.strength) + "," +
           (p.predicted_fraud ? "1" : "0") + "," + (p.actual_fraud ? "1" : "0") + "\n";
  }
  write_text(dir / "labels.csv", csv);
  write_json(dir / "cluster_stats.json", rc::cluster_stats_json(res));
  ojson report = rc::to_json(res.report);
  report["config"] = rc::to_json(spec);
  report["feature_names"] = res.feature_names;
  write_json(dir / "report.json", report);
  std::cout << rc::to_table(res.report);
  return kOk;
}

// -- explain ---------------------------------------------------------------

struct ExplainArgs {
  std::string features, target, config, out, text_out;
  std::optional<rc::Label> positive_label;
};

int run_explain(const ExplainArgs& a) {
  rc::ExplainConfig cfg;
  if (!a.config.empty()) cfg = rc::explain_config_from_json(read_json(a.config));
  header("explain", {{"features", a.features},
                     {"target", a.target},
                     {"n_estimators", cfg.n_estimators},
                     {"max_depth", cfg.max_depth},
                     {"min_precision", cfg.min_precision},
                     {"min_recall", cfg.min_recall},
                     {"n_bootstrap_rounds", cfg.n_bootstrap_rounds},
                     {"dedup_similarity", cfg.dedup_similarity},
                     {"negative_ratio", cfg.negative_ratio},
                     {"seed", cfg.seed}});
  const auto fm = rc::load_feature_matrix(a.features);
  const auto labels = rc::load_labels(a.target);
  std::vector<bool> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = a.positive_label ? labels[i] == *a.positive_label : labels[i] != 0;
  }
  const auto rules = rc::fit_rules(fm, y, cfg);
  ojson j;
  j["version"] = std::string(rc::kVersion);
  auto arr = ojson::array();
  std::string text;
  for (const auto& r : rules) {
    arr.push_back(rc::to_json(r));
    text += r.to_string() + "\n";
  }
  j["rules"] = std::move(arr);
  if (!a.out.empty()) write_json(a.out, j);
  if (!a.text_out.empty()) write_text(a.text_out, text);
  std::cout << text;
  return kOk;
}

// -- sankey ----------------------------------------------------------------

int run_sankey(const std::string& data, const std::string& labels_path, rc::Label cluster,
               const std::string& out) {
  header("sankey", {{"data", data}, {"labels", labels_path}, {"cluster", cluster}});
  const auto records = rc::load_transactions(data);
  const auto labels = rc::load_labels(labels_path);
  const auto flow = rc::page_flow(records, labels, cluster);
  write_json(out, rc::flow_json(flow, cluster));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-based clustering toolkit with a fraud-detection harness", "rc"};
  app.set_version_flag("--version", std::string(rc::kVersion));
  app.require_subcommand(1);
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "Worker thread cap (default: RC_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  std::function<int()> action;

  ClusterArgs ca;
  auto* cl = app.add_subcommand("cluster", "Cluster a point set");
  cl->add_option("--input", ca.input, "Points (.csv or .bin)")->required();
  cl->add_flag("--header", ca.header, "CSV has a header row");
  cl->add_option("--min-cluster-size", ca.min_cluster_size)->required();
  cl->add_option("--min-samples", ca.min_samples);
  cl->add_option("--k", ca.k, "Neighbors per point (default: min-samples)");
  cl->add_option("--mode", ca.mode)->check(CLI::IsMember({"exact", "ivf"}));
  cl->add_option("--nlist", ca.nlist);
  cl->add_option("--nprobe", ca.nprobe);
  cl->add_option("--seed", ca.seed);
  cl->add_flag("--allow-single-cluster", ca.allow_single);
  cl->add_option("--out", ca.out, "labels.json")->required();
  cl->add_option("--tree-out", ca.tree_out, "Condensed tree JSON");
  cl->add_option("--edges-out", ca.edges_out, "Spanning edges CSV");
  cl->add_flag("--timing", ca.timing, "Record per-stage timing in labels.json");
  cl->callback([&] { action = [&] { return run_cluster(ca); }; });

  PredictArgs pa;
  auto* pr = app.add_subcommand("predict", "Assign new points to clusters of a previous run");
  pr->add_option("--model", pa.model, "labels.json from cluster")->required();
  pr->add_option("--queries", pa.queries)->required();
  pr->add_option("--train", pa.train, "Override training points path");
  pr->add_flag("--header", pa.header, "CSV inputs have a header row");
  pr->add_option("--k-assign", pa.k_assign)->check(CLI::PositiveNumber);
  pr->add_option("--out", pa.out);
  pr->callback([&] { action = [&] { return run_predict(pa); }; });

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate synthetic datasets");
  gen->add_option("--shape", ga.shape);
  gen->add_option("--suite", ga.suite, "benchmark | fraud");
  gen->add_option("--n", ga.n)->check(CLI::PositiveNumber);
  gen->add_option("--dim", ga.dim)->check(CLI::PositiveNumber);
  gen->add_option("--centers", ga.centers)->check(CLI::PositiveNumber);
  gen->add_option("--noise", ga.noise)->check(CLI::NonNegativeNumber);
  gen->add_option("--cluster-std", ga.cluster_std)->check(CLI::PositiveNumber);
  gen->add_option("--seed", ga.seed);
  gen->add_option("--out-dir", ga.out_dir);
  gen->add_option("--prefix", ga.prefix);
  gen->add_flag("--binary", ga.binary, "Write RCPT binary points");
  gen->add_option("--snapshots", ga.snapshots)->check(CLI::PositiveNumber);
  gen->add_option("--per-snapshot", ga.per_snapshot)->check(CLI::PositiveNumber);
  gen->callback([&] { action = [&] { return run_gen(ga); }; });

  std::string ari_a, ari_b;
  auto* ari = app.add_subcommand("ari", "Adjusted Rand Index of two label files");
  ari->add_option("--a", ari_a)->required();
  ari->add_option("--b", ari_b)->required();
  ari->callback([&] { action = [&] { return run_ari(ari_a, ari_b); }; });

  std::string ex_config, ex_data, ex_out = ".";
  auto* exp = app.add_subcommand("experiment", "Inductive or transductive fraud experiment");
  exp->add_option("--config", ex_config)->required();
  exp->add_option("--data", ex_data)->required();
  exp->add_option("--out-dir", ex_out);
  exp->callback([&] { action = [&] { return run_experiment_cmd(ex_config, ex_data, ex_out); }; });

  ExplainArgs ea;
  auto* expl = app.add_subcommand("explain", "Learn rules describing a target set");
  expl->add_option("--features", ea.features, "CSV with a header row")->required();
  expl->add_option("--target", ea.target, "0/1 labels, or cluster labels with --positive-label")
      ->required()
      ;
  expl->add_option("--positive-label", ea.positive_label);
  expl->add_option("--config", ea.config);
  expl->add_option("--out", ea.out, "Rules JSON");
  expl->add_option("--text-out", ea.text_out, "Rules as text, one per line");
  expl->callback([&] { action = [&] { return run_explain(ea); }; });

  std::string sk_data, sk_labels, sk_out;
  rc::Label sk_cluster = 0;
  auto* sk = app.add_subcommand("sankey", "Page-transition flow of one cluster");
  sk->add_option("--data", sk_data)->required();
  sk->add_option("--labels", sk_labels)->required();
  sk->add_option("--cluster", sk_cluster)->required();
  sk->add_option("--out", sk_out)->required();
  sk->callback([&] { action = [&] { return run_sankey(sk_data, sk_labels, sk_cluster, sk_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: bad flag: " << e.what() << "\n";
    return kBadFlag;
  }

  try {
    if (threads) rc::set_thread_count(*threads);
    return action();
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: bad flag: " << e.what() << "\n";
    return kBadFlag;
  } catch (const rc::IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return kIo;
  } catch (const rc::ContractError& e) {
    std::cerr << "error: contract: " << e.what() << "\n";
    return kContract;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: io: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kInternal;
  }
  return kIo;
}
