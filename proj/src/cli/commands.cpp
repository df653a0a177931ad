// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "hinrank/ablation.hpp"
#include "hinrank/cli.hpp"
#include "hinrank/errors.hpp"
#include "hinrank/evaluate.hpp"
#include "hinrank/synthgen.hpp"
#include "hinrank/trainer.hpp"

namespace hinrank::cli {
namespace fs = std::filesystem;
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Flags shared by train and ablate; unset flags leave the config file value.
struct TrainFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  bool parallel = false;
  std::optional<std::string> schemas;
  std::optional<std::string> treatment;
  std::optional<std::size_t> dim;
  std::optional<double> omega;
  std::optional<double> margin;
  std::optional<double> lambda;
  std::optional<std::size_t> epochs;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Training config file (key = value)");
    app->add_option("--seed", seed, "Random seed");
    app->add_flag("--deterministic", deterministic, "Single-threaded reference mode (default)");
    app->add_flag("--parallel", parallel, "OpenMP training kernels");
    app->add_option("--schemas", schemas, "Comma list of path labels, or none");
    app->add_option("--treatment", treatment, "Treatment node subset: all, none, or list of diag,pres,proc");
    app->add_option("--dim", dim, "Embedding dimension");
    app->add_option("--omega", omega, "Probability of the unsupervised branch");
    app->add_option("--margin", margin, "Hinge margin");
    app->add_option("--lambda", lambda, "L2 regularization weight");
    app->add_option("--epochs", epochs, "Training epochs");
  }

  KeyValueConfig merged() const {
    KeyValueConfig kv = config.empty() ? KeyValueConfig{} : KeyValueConfig::load(config);
    auto real = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    if (seed) kv.set("seed", std::to_string(*seed));
    if (deterministic && parallel) throw ConfigError("--deterministic and --parallel are exclusive");
    if (deterministic) kv.set("deterministic", "true");
    if (parallel) kv.set("deterministic", "false");
    if (schemas) {
      validate_schema_labels(*schemas);
      kv.set("schemas", *schemas);
    }
    if (treatment) kv.set("treatment", *treatment);
    if (dim) kv.set("dim", std::to_string(*dim));
    if (omega) kv.set("omega", real(*omega));
    if (margin) kv.set("margin", real(*margin));
    if (lambda) kv.set("lambda", real(*lambda));
    if (epochs) kv.set("epochs", std::to_string(*epochs));
    return kv;
  }

  TrainConfig train_config() const { return TrainConfig::from_config(merged()); }

  static void validate_schema_labels(const std::string& list) {
    if (to_lower(trim(list)) == "none") return;
    std::vector<std::string> known;
    for (const auto& p : simple_link_schemas()) known.push_back(p.label);
    for (const auto& p : candidate_metapaths()) known.push_back(p.label);
    for (const auto& label : split_list(list, ',')) {
      std::string canonical;
      try {
        canonical = PathSchema::parse(label).label;
      } catch (const ConfigError&) {
      }
      if (std::find(known.begin(), known.end(), canonical) == known.end()) {
        std::string msg = "unknown path label '" + label + "'; expected one of:";
        for (const auto& k : known) msg += " " + k;
        throw ConfigError(msg);
      }
    }
  }
};

struct CohortFlags {
  bool cohorts = false;
  std::string table_file;

  void attach(CLI::App* app, bool mode) {
    if (mode) app->add_flag("--cohorts", cohorts, "Collapse diagnoses onto cohort labels");
    app->add_option("--cohort-table", table_file, "Cohort table file (default: built-in ICD-9 groups)");
  }
  CohortTable table() const {
    return table_file.empty() ? CohortTable::standard() : CohortTable::load(table_file);
  }
  MappingOptions mapping() const { return cohorts ? cohort_mapping(table()) : MappingOptions{}; }
};

fs::path dataset_file(const fs::path& dataset, const char* name) {
  const fs::path p = dataset / name;
  if (!fs::exists(p)) throw DataError("dataset file not found: " + p.string());
  return p;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  for (const auto& item : split_list(text, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      ks.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("invalid cutoff '" + item + "'");
    }
  }
  if (ks.empty()) throw ConfigError("no cutoff given");
  return ks;
}

// ---------------------------------------------------------------------------

struct Context {
  std::ostream& out;
  std::ostream& err;
};

void cmd_generate(Context& ctx, const std::string& out_dir, const std::string& config,
                  std::optional<std::uint64_t> seed, std::optional<std::size_t> patients,
                  std::optional<std::size_t> clusters, std::optional<double> beta) {
  const auto t0 = Clock::now();
  SynthSpec spec = config.empty() ? SynthSpec{} : SynthSpec::from_config(KeyValueConfig::load(config));
  if (seed) spec.seed = *seed;
  if (patients) spec.patients = *patients;
  if (clusters) spec.clusters = *clusters;
  if (beta) spec.beta = *beta;
  const SynthData data = generate(spec);
  write_tables(out_dir, data);
  {
    std::ofstream f(fs::path(out_dir) / "synth.cfg");
    spec.to_config().write(f);
  }
  RunManifest m;
  m.command = "generate";
  m.seed = spec.seed;
  m.config = spec.to_config();
  if (!config.empty()) m.add_input(config);
  for (const char* f : {"patients.csv", "labevents.csv", "microbiologyevents.csv", "symptoms.csv",
                        "prescriptions.csv", "procedures_icd.csv", "diagnoses_icd.csv", "truth.csv",
                        "synth.cfg"}) {
    m.artifacts.push_back((fs::path(out_dir) / f).string());
  }
  m.wall_clock_seconds = seconds_since(t0);
  m.write(fs::path(out_dir) / "manifest.txt");
  ctx.out << "generated " << data.stays.size() << " stays in " << out_dir << '\n';
}

void cmd_ingest(Context& ctx, const std::string& data_dir, const std::string& tables,
                const std::string& out_dir, double test_fraction, std::uint64_t seed) {
  const auto t0 = Clock::now();
  const TableSpec spec = tables.empty() ? TableSpec::standard() : TableSpec::load(tables);
  LoadResult loaded = load_tables(data_dir, spec);
  const std::size_t total = loaded.stays.size();
  Split parts = split(std::move(loaded.stays), test_fraction, seed);
  fs::create_directories(out_dir);
  const fs::path train_path = fs::path(out_dir) / "train.tsv";
  const fs::path test_path = fs::path(out_dir) / "test.tsv";
  const fs::path report_path = fs::path(out_dir) / "report.txt";
  write_events_file(train_path, parts.train);
  write_events_file(test_path, parts.test);

  const LoadReport& r = loaded.report;
  std::ostringstream report;
  report << "stays = " << total << '\n'
         << "train_stays = " << parts.train.size() << '\n'
         << "test_stays = " << parts.test.size() << '\n'
         << "rows_read = " << r.rows_read << '\n'
         << "rows_accepted = " << r.rows_accepted << '\n'
         << "rows_rejected = " << r.rows_rejected << '\n'
         << "rows_malformed = " << r.rows_malformed << '\n'
         << "rows_duplicate = " << r.rows_duplicate << '\n'
         << "rows_excluded = " << r.rows_excluded << '\n'
         << "stays_excluded = " << r.stays_excluded << '\n';
  {
    std::ofstream f(report_path);
    f << report.str();
  }
  ctx.out << report.str();

  RunManifest m;
  m.command = "ingest";
  m.seed = seed;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", test_fraction);
  m.config.set("test_fraction", buf);
  m.config.set("seed", std::to_string(seed));
  if (!tables.empty()) m.add_input(tables);
  std::vector<std::string> files;
  for (const auto& src : spec.sources) {
    if (std::find(files.begin(), files.end(), src.file) == files.end()) files.push_back(src.file);
  }
  for (const auto& f : files) m.add_input(fs::path(data_dir) / f);
  m.artifacts = {train_path.string(), test_path.string(), report_path.string()};
  m.wall_clock_seconds = seconds_since(t0);
  m.write(fs::path(out_dir) / "manifest.txt");
}

void cmd_graph(Context& ctx, const std::string& dataset, const std::string& dump,
               const CohortFlags& cf) {
  const fs::path train_path = dataset_file(dataset, "train.tsv");
  const auto stays = read_events_file(train_path);
  const HeteroGraph g = HeteroGraph::build(stays, NetworkSchema::standard(), cf.mapping());
  ctx.out << "nodes = " << g.node_count() << '\n';
  ctx.out << "edges = " << g.edge_count() << '\n';
  ctx.out << "skipped_events = " << g.skipped_events() << '\n';
  for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
    const auto nt = static_cast<NodeType>(t);
    ctx.out << "nodes." << type_tag(nt) << " = " << g.nodes_of_type(nt).size() << '\n';
  }
  for (const auto& p : simple_link_schemas()) {
    ctx.out << "instances." << p.label << " = " << count_path_instances(g, p) << '\n';
  }
  for (const auto& p : candidate_metapaths()) {
    ctx.out << "instances." << p.label << " = " << count_path_instances(g, p) << '\n';
  }
  if (!dump.empty()) {
    std::ofstream f(dump);
    if (!f) throw DataError("cannot write " + dump);
    g.dump(f);
  }
}

void cmd_train(Context& ctx, const std::string& dataset, const std::string& out_model,
               const TrainFlags& tf, const CohortFlags& cf, bool binary) {
  const auto t0 = Clock::now();
  const TrainConfig cfg = tf.train_config();
  const fs::path train_path = dataset_file(dataset, "train.tsv");
  const auto stays = read_events_file(train_path);
  const HeteroGraph g = HeteroGraph::build(stays, NetworkSchema::standard(), cf.mapping());
  TrainResult r = train(g, cfg, cfg.log_every ? &ctx.err : nullptr);
  for (const auto& n : r.notices) ctx.err << "notice: " << n << '\n';
  r.model.save(out_model, binary);

  RunManifest m;
  m.command = "train";
  m.seed = cfg.seed;
  m.config = cfg.to_config();
  m.config.set("cohorts", cf.cohorts ? "true" : "false");
  m.add_input(train_path);
  if (!tf.config.empty()) m.add_input(tf.config);
  if (!cf.table_file.empty()) m.add_input(cf.table_file);
  m.artifacts = {out_model};
  m.wall_clock_seconds = seconds_since(t0);
  m.write(out_model + ".manifest");
  ctx.out << "trained " << r.model.node_count() << " nodes, " << r.stats.steps << " steps ("
          << r.stats.unsup_steps << " unsupervised, " << r.stats.sup_steps << " supervised)\n";
}

void cmd_predict(Context& ctx, const std::string& model_path, const std::string& events,
                 std::size_t k, const std::string& out_path) {
  const EmbeddingModel model = EmbeddingModel::load(model_path);
  const auto stays = read_events_file(events);
  // Any treatment event anywhere aborts before output is produced.
  for (const auto& s : stays) {
    for (const auto& e : s.events) {
      if (!is_diagnostic(e.type)) {
        throw LeakageError("stay '" + s.stay_id + "' contains treatment event '" +
                           std::string(type_tag(e.type)) + ":" + e.name + "'");
      }
    }
  }
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw DataError("cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? ctx.out : file;
  // One line per ranked diagnosis: stay_id, rank, diagnosis, score.
  std::size_t cold = 0;
  char buf[64];
  for (const auto& s : stays) {
    try {
      const auto fp = compose_patient(model, s.events);
      const auto ranked = rank_diagnoses(model, fp, k);
      std::size_t rank = 0;
      for (const auto& [id, score] : ranked.items) {
        std::snprintf(buf, sizeof buf, "%.6f", score);
        out << s.stay_id << '\t' << ++rank << '\t' << model.keys()[id].identity << '\t' << buf << '\n';
      }
    } catch (const ColdPatientError&) {
      ++cold;
      ctx.err << "notice: stay '" << s.stay_id << "' has no known event; no ranking\n";
    }
  }
  if (cold) ctx.err << "notice: " << cold << " cold stays left unranked\n";
}

void cmd_evaluate(Context& ctx, const std::string& model_path, const std::string& dataset,
                  const std::string& ks, const CohortFlags& cf, const std::string& denominator,
                  bool baseline, bool parallel) {
  const EmbeddingModel model = EmbeddingModel::load(model_path);
  const auto test = read_events_file(dataset_file(dataset, "test.tsv"));
  const CohortTable table = cf.table();
  if (cf.cohorts) {
    const auto pred = predict_cohorts(model, test, table);
    write_cohort_metrics(ctx.out, pred);
    return;
  }
  EvalOptions opt;
  opt.ks = parse_ks(ks);
  opt.parallel = parallel;
  if (denominator == "hits") {
    opt.denominator = ApDenominator::hits;
  } else if (denominator == "min") {
    opt.denominator = ApDenominator::min_k_truth;
  } else {
    throw ConfigError("--denominator must be 'hits' or 'min'");
  }
  const Evaluation ev = evaluate(model, test, opt);
  write_metrics(ctx.out, ev);
  if (!ev.stay_ids.empty()) {
    ctx.out << "top1_cohort_accuracy = " << top1_cohort_accuracy(model, ev, test, table) << '\n';
  }
  if (baseline) {
    const auto train_stays = read_events_file(dataset_file(dataset, "train.tsv"));
    const HeteroGraph g = HeteroGraph::build(train_stays);
    const Evaluation base = evaluate_degree_baseline(model, g, test, opt);
    for (const auto& [k, v] : base.map) ctx.out << "baseline.map@" << k << " = " << v << '\n';
  }
}

void cmd_ablate(Context& ctx, const std::string& dataset, const TrainFlags& tf, std::size_t k,
                std::size_t permutations, const std::string& only, const std::string& out_path) {
  const auto t0 = Clock::now();
  const TrainConfig cfg = tf.train_config();
  const fs::path train_path = dataset_file(dataset, "train.tsv");
  const fs::path test_path = dataset_file(dataset, "test.tsv");
  const auto train_stays = read_events_file(train_path);
  const auto test_stays = read_events_file(test_path);
  AblationOptions opt;
  opt.k = k;
  opt.permutations = permutations;
  if (only == "treatment") {
    opt.metapath_study = false;
  } else if (only == "metapath") {
    opt.treatment_study = false;
  } else if (!only.empty()) {
    throw ConfigError("--only must be 'treatment' or 'metapath'");
  }
  const AblationReport report = run_ablation(train_stays, test_stays, cfg, opt, &ctx.err);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw DataError("cannot write " + out_path);
    write_ablation(file, report, k);
    RunManifest m;
    m.command = "ablate";
    m.seed = cfg.seed;
    m.config = cfg.to_config();
    m.add_input(train_path);
    m.add_input(test_path);
    m.artifacts = {out_path};
    m.wall_clock_seconds = seconds_since(t0);
    m.write(out_path + ".manifest");
  }
  write_ablation(ctx.out, report, k);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diagnosis ranking with heterogeneous network embeddings", "hinrank"};
  app.require_subcommand(1);
  Context ctx{out, err};

  // generate
  std::string gen_out, gen_config;
  std::optional<std::uint64_t> gen_seed;
  std::optional<std::size_t> gen_patients, gen_clusters;
  std::optional<double> gen_beta;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset in the ingest table format");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--config", gen_config, "Generator spec file");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--patients", gen_patients);
  gen->add_option("--clusters", gen_clusters);
  gen->add_option("--beta", gen_beta, "Cluster signal strength in [0, 1]");

  // ingest
  std::string ing_data, ing_tables, ing_out;
  double ing_fraction = 0.2;
  std::uint64_t ing_seed = 1;
  auto* ing = app.add_subcommand("ingest", "Load clinical tables and split into train/test");
  ing->add_option("--data", ing_data, "Directory with the input tables")->required();
  ing->add_option("--tables", ing_tables, "Table spec file");
  ing->add_option("--out", ing_out, "Dataset directory")->required();
  ing->add_option("--test-fraction", ing_fraction)->capture_default_str();
  ing->add_option("--seed", ing_seed)->capture_default_str();

  // graph
  std::string gr_dataset, gr_dump;
  CohortFlags gr_cf;
  auto* gr = app.add_subcommand("graph", "Print training-graph statistics");
  gr->add_option("--dataset", gr_dataset)->required();
  gr->add_option("--dump", gr_dump, "Write the graph in text form");
  gr_cf.attach(gr, true);

  // train
  std::string tr_dataset, tr_out;
  bool tr_binary = false;
  TrainFlags tr_flags;
  CohortFlags tr_cf;
  auto* tr = app.add_subcommand("train", "Train an embedding model");
  tr->add_option("--dataset", tr_dataset)->required();
  tr->add_option("--out", tr_out, "Model file")->required();
  tr->add_flag("--binary", tr_binary, "Write the binary model format");
  tr_flags.attach(tr);
  tr_cf.attach(tr, true);

  // predict
  std::string pr_model, pr_events, pr_out;
  std::size_t pr_k = 10;
  auto* pr = app.add_subcommand("predict", "Rank diagnoses for patients given diagnostic events");
  pr->add_option("--model", pr_model)->required();
  pr->add_option("--events", pr_events, "Events file (stay_id, type, name, value)")->required();
  pr->add_option("--k", pr_k)->capture_default_str();
  pr->add_option("--out", pr_out);

  // evaluate
  std::string ev_model, ev_dataset, ev_ks = "3,5,10", ev_denominator = "hits";
  bool ev_baseline = false, ev_parallel = false;
  CohortFlags ev_cf;
  auto* ev = app.add_subcommand("evaluate", "MAP@k (or cohort AUROC) on the test split");
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--dataset", ev_dataset)->required();
  ev->add_option("--k", ev_ks, "Comma list of cutoffs")->capture_default_str();
  ev->add_option("--denominator", ev_denominator, "AP@k denominator: hits or min")->capture_default_str();
  ev->add_flag("--baseline", ev_baseline, "Also report the degree-ranked baseline");
  ev->add_flag("--parallel", ev_parallel, "Score with the OpenMP kernels");
  ev_cf.attach(ev, true);

  // ablate
  std::string ab_dataset, ab_only, ab_out;
  std::size_t ab_k = 3, ab_perm = 2000;
  TrainFlags ab_flags;
  auto* ab = app.add_subcommand("ablate", "Treatment-node and metapath ablation");
  ab->add_option("--dataset", ab_dataset)->required();
  ab->add_option("--k", ab_k)->capture_default_str();
  ab->add_option("--permutations", ab_perm)->capture_default_str();
  ab->add_option("--only", ab_only, "treatment or metapath");
  ab->add_option("--out", ab_out, "Report file");
  ab_flags.attach(ab);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (*gen) cmd_generate(ctx, gen_out, gen_config, gen_seed, gen_patients, gen_clusters, gen_beta);
  if (*ing) cmd_ingest(ctx, ing_data, ing_tables, ing_out, ing_fraction, ing_seed);
  if (*gr) cmd_graph(ctx, gr_dataset, gr_dump, gr_cf);
  if (*tr) cmd_train(ctx, tr_dataset, tr_out, tr_flags, tr_cf, tr_binary);
  if (*pr) cmd_predict(ctx, pr_model, pr_events, pr_k, pr_out);
  if (*ev) cmd_evaluate(ctx, ev_model, ev_dataset, ev_ks, ev_cf, ev_denominator, ev_baseline, ev_parallel);
  if (*ab) cmd_ablate(ctx, ab_dataset, ab_flags, ab_k, ab_perm, ab_only, ab_out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const LeakageError& e) {
    err << "leakage error: " << e.what() << '\n';
    return kLeakageError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hinrank::cli
