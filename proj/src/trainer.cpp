// SPDX-License-Identifier: Apache-2.0
#include "hinrank/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hinrank/errors.hpp"
#include "hinrank/kernels.hpp"

namespace hinrank {

void TrainConfig::validate() const {
  if (!(omega >= 0.0 && omega <= 1.0)) throw ConfigError("omega must lie in [0, 1]");
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (sup_negatives < 1 || unsup_negatives < 1 || batch < 1 || dim < 1 || epochs < 1) {
    throw ConfigError("negatives, batch, dim and epochs must be at least 1");
  }
  if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (lr0 * lambda >= 1.0) throw ConfigError("lr0 * lambda must be below 1");
  for (const auto& label : schemas) PathSchema::parse(label);
}

std::vector<EventType> parse_treatment_list(std::string_view text) {
  const std::string lowered = to_lower(trim(text));
  if (lowered == "all") return {EventType::diagnosis, EventType::prescription, EventType::procedure};
  if (lowered == "none" || lowered.empty()) return {};
  std::vector<EventType> out;
  for (const auto& item : split_list(lowered, ',')) {
    auto t = parse_event_type(item);
    if (!t || is_diagnostic(*t)) {
      throw ConfigError("treatment subset accepts proc, pres, diag; got '" + item + "'");
    }
    if (std::find(out.begin(), out.end(), *t) == out.end()) out.push_back(*t);
  }
  return out;
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& kv, TrainConfig c) {
  static const char* kKnown[] = {"omega", "margin", "lambda", "negatives", "unsup_negatives",
                                 "batch", "dim", "lr0", "epochs", "seed", "alpha",
                                 "schema_selection", "schemas", "treatment", "simple_links",
                                 "deterministic", "threads", "log_every"};
  for (const auto& [key, value] : kv.entries()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return key == k; }) == std::end(kKnown)) {
      throw ConfigError("unknown training config key '" + key + "'");
    }
  }
  c.omega = kv.get_double("omega", c.omega);
  c.margin = kv.get_double("margin", c.margin);
  c.lambda = kv.get_double("lambda", c.lambda);
  c.sup_negatives = kv.get_uint("negatives", c.sup_negatives);
  c.unsup_negatives = kv.get_uint("unsup_negatives", c.unsup_negatives);
  c.batch = kv.get_uint("batch", c.batch);
  c.dim = kv.get_uint("dim", c.dim);
  c.lr0 = kv.get_double("lr0", c.lr0);
  c.epochs = kv.get_uint("epochs", c.epochs);
  c.seed = kv.get_uint("seed", c.seed);
  c.alpha = kv.get_double("alpha", c.alpha);
  if (auto sel = kv.get("schema_selection")) {
    if (*sel == "uniform") {
      c.selection = SchemaSelection::uniform;
    } else if (*sel == "proportional") {
      c.selection = SchemaSelection::proportional;
    } else {
      throw ConfigError("schema_selection must be 'uniform' or 'proportional'");
    }
  }
  if (auto s = kv.get("schemas")) {
    c.schemas = to_lower(trim(*s)) == "none" ? std::vector<std::string>{} : split_list(*s, ',');
  }
  if (auto t = kv.get("treatment")) c.treatment = parse_treatment_list(*t);
  c.simple_links = kv.get_bool("simple_links", c.simple_links);
  c.deterministic = kv.get_bool("deterministic", c.deterministic);
  c.threads = static_cast<int>(kv.get_uint("threads", static_cast<std::uint64_t>(c.threads)));
  c.log_every = kv.get_uint("log_every", c.log_every);
  c.validate();
  return c;
}

KeyValueConfig TrainConfig::to_config() const {
  KeyValueConfig kv;
  auto real = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  kv.set("omega", real(omega));
  kv.set("margin", real(margin));
  kv.set("lambda", real(lambda));
  kv.set("negatives", std::to_string(sup_negatives));
  kv.set("unsup_negatives", std::to_string(unsup_negatives));
  kv.set("batch", std::to_string(batch));
  kv.set("dim", std::to_string(dim));
  kv.set("lr0", real(lr0));
  kv.set("epochs", std::to_string(epochs));
  kv.set("seed", std::to_string(seed));
  kv.set("alpha", real(alpha));
  kv.set("schema_selection", selection == SchemaSelection::uniform ? "uniform" : "proportional");
  std::string joined;
  for (const auto& s : schemas) joined += (joined.empty() ? "" : ",") + s;
  kv.set("schemas", joined.empty() ? "none" : joined);
  std::string treat;
  for (EventType t : treatment) treat += (treat.empty() ? "" : ",") + std::string(type_tag(t));
  kv.set("treatment", treat.empty() ? "none" : treat);
  kv.set("simple_links", simple_links ? "true" : "false");
  kv.set("deterministic", deterministic ? "true" : "false");
  kv.set("threads", std::to_string(threads));
  kv.set("log_every", std::to_string(log_every));
  return kv;
}

std::vector<PathSchema> active_schemas(const TrainConfig& cfg, std::vector<std::string>* dropped) {
  auto included = [&](NodeType t) {
    auto e = to_event_type(t);
    if (!e || is_diagnostic(*e)) return true;
    return std::find(cfg.treatment.begin(), cfg.treatment.end(), *e) != cfg.treatment.end();
  };
  std::vector<PathSchema> out;
  auto add = [&](PathSchema path) {
    for (NodeType t : path.types) {
      if (!included(t)) {
        if (dropped) dropped->push_back(path.label);
        return;
      }
    }
    for (const auto& existing : out) {
      if (existing.types == path.types) return;
    }
    out.push_back(std::move(path));
  };
  if (cfg.simple_links) {
    for (auto& path : simple_link_schemas()) {
      // Excluded treatment links are simply absent, not reported.
      bool ok = true;
      for (NodeType t : path.types) ok = ok && included(t);
      if (ok) out.push_back(std::move(path));
    }
  }
  for (const auto& label : cfg.schemas) add(PathSchema::parse(label));
  return out;
}

void compose_from_graph(const EmbeddingModel& model, const HeteroGraph& g, NodeId p,
                        std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  bool any = false;
  for (EventType t : kDiagnosticTypes) {
    const auto nbrs = g.neighbors(p, to_node_type(t));
    if (nbrs.empty()) continue;
    any = true;
    const double scale = model.type_weight(t) / static_cast<double>(nbrs.size());
    for (NodeId n : nbrs) {
      const auto fn = model.vec(n);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * fn[i];
    }
  }
  if (!any) {
    throw UndefinedPatientError("patient '" + g.key(p).identity + "' has no diagnostic events");
  }
}

double sup_score(const EmbeddingModel& model, const HeteroGraph& g, NodeId p, NodeId d) {
  std::vector<double> fp(model.dim());
  compose_from_graph(model, g, p, fp);
  return dot(model.vec(d), fp);
}

double sup_loss(const EmbeddingModel& model, const HeteroGraph& g, NodeId p, NodeId d_pos,
                std::span<const NodeId> d_negs, double margin) {
  std::vector<double> fp(model.dim());
  compose_from_graph(model, g, p, fp);
  const double s_pos = dot(model.vec(d_pos), fp);
  double loss = 0;
  for (NodeId neg : d_negs) loss += hinge_loss(s_pos, dot(model.vec(neg), fp), margin);
  return loss;
}

double sup_step(EmbeddingModel& model, const HeteroGraph& g, NodeId p, NodeId d_pos,
                std::span<const NodeId> d_negs, double lr, double margin) {
  const std::size_t d = model.dim();
  thread_local std::vector<double> type_mean;  // kDiagnosticTypeCount x d
  thread_local std::vector<double> fp;
  thread_local std::vector<double> diff;
  thread_local std::vector<unsigned char> violated;
  type_mean.assign(kDiagnosticTypeCount * d, 0.0);
  fp.assign(d, 0.0);
  diff.assign(d, 0.0);
  violated.assign(d_negs.size(), 0);

  bool any = false;
  for (EventType t : kDiagnosticTypes) {
    const auto nbrs = g.neighbors(p, to_node_type(t));
    if (nbrs.empty()) continue;
    any = true;
    double* mean = type_mean.data() + index_of(t) * d;
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (NodeId n : nbrs) {
      const auto fn = model.vec(n);
      for (std::size_t i = 0; i < d; ++i) mean[i] += inv * fn[i];
    }
    const double w = model.type_weight(t);
    for (std::size_t i = 0; i < d; ++i) fp[i] += w * mean[i];
  }
  if (!any) {
    throw UndefinedPatientError("patient '" + g.key(p).identity + "' has no diagnostic events");
  }

  // For each violated triple: d/df(d_pos) = -f(p), d/df(neg) = f(p),
  // d/df_t(p) = w_t (f(neg) - f(d_pos)), d/dw_t = (f(neg) - f(d_pos)) . f_t(p).
  const auto f_pos = model.vec(d_pos);
  const double s_pos = dot(f_pos, fp);
  double loss = 0;
  std::size_t n_violated = 0;
  for (std::size_t l = 0; l < d_negs.size(); ++l) {
    const auto f_neg = model.vec(d_negs[l]);
    const double h = hinge_loss(s_pos, dot(f_neg, fp), margin);
    if (h <= 0) continue;
    loss += h;
    violated[l] = 1;
    ++n_violated;
    for (std::size_t i = 0; i < d; ++i) diff[i] += f_neg[i] - f_pos[i];
  }
  if (n_violated == 0) return 0.0;

  std::array<double, kDiagnosticTypeCount> weight_grad{};
  for (EventType t : kDiagnosticTypes) {
    const auto nbrs = g.neighbors(p, to_node_type(t));
    if (nbrs.empty()) continue;
    const double* mean = type_mean.data() + index_of(t) * d;
    weight_grad[index_of(t)] = dot(diff, std::span<const double>(mean, d));
    const double scale = lr * model.type_weight(t) / static_cast<double>(nbrs.size());
    for (NodeId n : nbrs) {
      auto fn = model.vec(n);
      for (std::size_t i = 0; i < d; ++i) fn[i] -= scale * diff[i];
    }
  }
  for (std::size_t l = 0; l < d_negs.size(); ++l) {
    if (!violated[l]) continue;
    auto f_neg = model.vec(d_negs[l]);
    for (std::size_t i = 0; i < d; ++i) f_neg[i] -= lr * fp[i];
  }
  {
    auto fpos = model.vec(d_pos);
    const double k = static_cast<double>(n_violated);
    for (std::size_t i = 0; i < d; ++i) fpos[i] += lr * k * fp[i];
  }
  for (EventType t : kDiagnosticTypes) {
    auto& w = model.type_weights()[index_of(t)];
    w -= lr * weight_grad[index_of(t)];
  }
  return loss;
}

SupervisedPool SupervisedPool::build(const HeteroGraph& g) {
  SupervisedPool pool;
  for (NodeId p : g.nodes_of_type(NodeType::patient)) {
    const auto diags = g.neighbors(p, NodeType::diagnosis);
    if (diags.empty()) continue;
    bool has_diagnostic = false;
    for (EventType t : kDiagnosticTypes) {
      has_diagnostic = has_diagnostic || !g.neighbors(p, to_node_type(t)).empty();
    }
    if (!has_diagnostic) continue;
    pool.patients.push_back(p);
    std::vector<NodeId> sorted(diags.begin(), diags.end());
    std::sort(sorted.begin(), sorted.end());
    pool.diagnoses.push_back(std::move(sorted));
  }
  return pool;
}

TrainResult train(const HeteroGraph& g, const TrainConfig& cfg, std::ostream* log) {
  cfg.validate();
  TrainResult result;
  std::vector<std::string> dropped;
  const auto schemas = active_schemas(cfg, &dropped);
  for (const auto& label : dropped) {
    result.notices.push_back("schema " + label + " dropped: uses an excluded treatment type");
  }

  result.model = EmbeddingModel::for_graph(g, cfg.dim, derive_seed(cfg.seed, 0));
  const SamplerSet samplers(g, schemas, cfg.alpha, cfg.selection);
  for (const auto& n : samplers.notices()) result.notices.push_back(n);
  if (cfg.omega > 0 && samplers.schemas().empty()) {
    throw ConfigError("no active path schema has path instances");
  }
  const SupervisedPool pool = SupervisedPool::build(g);
  if (cfg.omega < 1) {
    if (g.nodes_of_type(NodeType::diagnosis).size() < 2) {
      throw DataError("supervised training needs at least two diagnosis nodes");
    }
    if (pool.patients.empty()) {
      throw DataError("no training patient has both diagnostic events and diagnoses");
    }
  }

  const std::size_t n_patients = std::max<std::size_t>(1, g.nodes_of_type(NodeType::patient).size());
  const std::size_t steps_per_epoch = (n_patients + cfg.batch - 1) / cfg.batch;
  const std::size_t total_steps = cfg.epochs * steps_per_epoch;

  Rng branch_rng(derive_seed(cfg.seed, 1));
  std::vector<Rng> worker_rngs;
  const int workers = cfg.deterministic ? 1 : std::max(cfg.threads, kernels::omp::max_threads());
  for (int w = 0; w < workers; ++w) {
    worker_rngs.emplace_back(derive_seed(cfg.seed, 2 + static_cast<std::uint64_t>(w)));
  }

  TrainStats& stats = result.stats;
  double unsup_loss_acc = 0, sup_loss_acc = 0;
  std::size_t unsup_n = 0, sup_n = 0;
  for (std::size_t step = 0; step < total_steps; ++step) {
    const double progress =
        total_steps > 1 ? static_cast<double>(step) / static_cast<double>(total_steps - 1) : 0.0;
    const double lr = cfg.lr0 * (1.0 - 0.99 * progress);
    const kernels::BatchContext ctx{result.model, g, samplers, pool, cfg, lr};
    const bool unsupervised = branch_rng.bernoulli(cfg.omega);
    kernels::BatchResult br;
    if (unsupervised) {
      br = cfg.deterministic ? kernels::serial::unsup_batch(ctx, worker_rngs[0])
                             : kernels::omp::unsup_batch(ctx, worker_rngs);
      ++stats.unsup_steps;
      stats.unsup_samples += br.samples;
      stats.last_unsup_loss = br.samples ? br.loss_sum / static_cast<double>(br.samples) : 0.0;
      unsup_loss_acc += br.loss_sum;
      unsup_n += br.samples;
    } else {
      br = cfg.deterministic ? kernels::serial::sup_batch(ctx, worker_rngs[0])
                             : kernels::omp::sup_batch(ctx, worker_rngs);
      ++stats.sup_steps;
      stats.sup_samples += br.samples;
      stats.last_sup_loss = br.samples ? br.loss_sum / static_cast<double>(br.samples) : 0.0;
      sup_loss_acc += br.loss_sum;
      sup_n += br.samples;
    }
    ++stats.steps;
    if (log && cfg.log_every > 0 && stats.steps % cfg.log_every == 0) {
      *log << "step " << stats.steps << " unsup " << stats.unsup_steps << " sup "
           << stats.sup_steps << " unsup_loss "
           << (unsup_n ? unsup_loss_acc / static_cast<double>(unsup_n) : 0.0) << " sup_loss "
           << (sup_n ? sup_loss_acc / static_cast<double>(sup_n) : 0.0) << '\n';
      unsup_loss_acc = sup_loss_acc = 0;
      unsup_n = sup_n = 0;
    }
  }
  stats.positive_draws = samplers.positive_draws();
  return result;
}

}  // namespace hinrank
