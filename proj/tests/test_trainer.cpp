// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hinrank/errors.hpp"
#include "hinrank/trainer.hpp"
#include "oracles.hpp"

using namespace hinrank;

namespace {

HeteroGraph random_graph(std::uint64_t seed, std::size_t patients = 20, std::size_t vocab = 6) {
  Rng rng(seed);
  return HeteroGraph::build(oracle::random_stays(rng, patients, vocab));
}

EmbeddingModel scaled_model(const HeteroGraph& g, std::size_t d, std::uint64_t seed) {
  auto m = EmbeddingModel::for_graph(g, d, seed);
  Rng rng(seed + 7);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (double& x : m.vec(v)) x = rng.uniform(-0.8, 0.8);
  }
  for (EventType t : kDiagnosticTypes) m.set_type_weight(t, rng.uniform(0.2, 1.5));
  return m;
}

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 8;
  c.batch = 5;
  c.epochs = 3;
  c.sup_negatives = 4;
  return c;
}

}  // namespace

TEST_CASE("config keys, validation and round-trip") {
  std::istringstream in("omega = 0.5\nnegatives = 7\nschemas = lab-diag, symp-diag\n"
                        "treatment = diag,pres\nschema_selection = proportional\n");
  const auto c = TrainConfig::from_config(KeyValueConfig::parse(in));
  CHECK(c.omega == 0.5);
  CHECK(c.sup_negatives == 7);
  CHECK(c.schemas == std::vector<std::string>{"lab-diag", "symp-diag"});
  CHECK(c.treatment == std::vector<EventType>{EventType::diagnosis, EventType::prescription});
  CHECK(c.selection == SchemaSelection::proportional);

  const auto back = TrainConfig::from_config(c.to_config());
  CHECK(back.to_config().entries() == c.to_config().entries());

  std::istringstream unknown("omegaa = 0.5\n");
  CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse(unknown)), ConfigError);
  TrainConfig bad;
  bad.omega = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = TrainConfig{};
  bad.dim = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("treatment subsets") {
  CHECK(parse_treatment_list("none").empty());
  CHECK(parse_treatment_list("all").size() == 3);
  CHECK(parse_treatment_list("proc").front() == EventType::procedure);
  CHECK_THROWS_AS(parse_treatment_list("lab"), ConfigError);

  TrainConfig c;
  c.treatment.clear();
  std::vector<std::string> dropped;
  const auto active = active_schemas(c, &dropped);
  // Six diagnostic simple links; lab-diag, symp-diag and lab-pres drop out.
  CHECK(active.size() == 6 + 1);
  CHECK(active.back().label == "lab-symp");
  CHECK(dropped.size() == 3);
  for (const auto& p : active) {
    for (NodeType t : p.types) {
      const auto e = to_event_type(t);
      CHECK((!e || is_diagnostic(*e)));
    }
  }
  c = TrainConfig{};
  c.simple_links = false;
  CHECK(active_schemas(c).size() == 4);
}

TEST_CASE("graph composition by hand") {
  const std::vector<PatientStay> stays = {
      {"p", {{EventType::laboratory, "a", std::string("normal")},
             {EventType::laboratory, "b", std::string("normal")},
             {EventType::symptom, "s", std::nullopt},
             {EventType::diagnosis, "401", std::nullopt}}}};
  const auto g = HeteroGraph::build(stays);
  auto m = scaled_model(g, 3, 1);
  m.set_type_weight(EventType::laboratory, 2.0);
  m.set_type_weight(EventType::symptom, 1.0);
  const NodeId p = *g.find({NodeType::patient, "p"});
  const NodeId a = *g.find({NodeType::laboratory, "a:normal"});
  const NodeId b = *g.find({NodeType::laboratory, "b:normal"});
  const NodeId s = *g.find({NodeType::symptom, "s"});
  std::vector<double> fp(3);
  compose_from_graph(m, g, p, fp);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(fp[i] == doctest::Approx(m.vec(a)[i] + m.vec(b)[i] + m.vec(s)[i]));
  }
  const NodeId d = *g.find({NodeType::diagnosis, "401"});
  CHECK_THROWS_AS(compose_from_graph(m, g, d, fp), UndefinedPatientError);
}

TEST_CASE("supervised gradient matches finite differences") {
  const auto g = random_graph(31);
  const auto pool = SupervisedPool::build(g);
  const auto diags = g.nodes_of_type(NodeType::diagnosis);
  Rng rng(32);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    const auto start = scaled_model(g, 5, 500 + trial);
    const std::size_t slot = rng.below(pool.patients.size());
    const NodeId p = pool.patients[slot];
    const auto& truth = pool.diagnoses[slot];
    const NodeId pos = truth[rng.below(truth.size())];
    std::vector<NodeId> negs;
    while (negs.size() < 4) {
      const NodeId u = diags[rng.below(diags.size())];
      if (!std::binary_search(truth.begin(), truth.end(), u)) negs.push_back(u);
    }
    const double margin = 1.0;
    const double s_pos = sup_score(start, g, p, pos);
    bool near_kink = false;
    for (NodeId u : negs) near_kink |= std::fabs(sup_score(start, g, p, u) - s_pos + margin) < 1e-4;
    if (near_kink || sup_loss(start, g, p, pos, negs, margin) == 0) continue;
    ++checked;

    auto stepped = start;
    CHECK(sup_step(stepped, g, p, pos, negs, 1.0, margin) ==
          doctest::Approx(sup_loss(start, g, p, pos, negs, margin)));
    auto probe = start;
    auto loss = [&] { return sup_loss(probe, g, p, pos, negs, margin); };
    double max_diff = 0, max_grad = 0;
    auto compare = [&](double analytic, double* x) {
      const double numeric = oracle::central_difference(x, loss, 1e-6);
      max_diff = std::max(max_diff, std::fabs(analytic - numeric));
      max_grad = std::max({max_grad, std::fabs(analytic), std::fabs(numeric)});
    };
    std::vector<NodeId> ids(negs.begin(), negs.end());
    ids.push_back(pos);
    for (EventType t : kDiagnosticTypes) {
      for (NodeId n : g.neighbors(p, to_node_type(t))) ids.push_back(n);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (NodeId id : ids) {
      for (std::size_t i = 0; i < start.dim(); ++i) {
        compare(start.vec(id)[i] - stepped.vec(id)[i], &probe.vec(id)[i]);
      }
    }
    for (std::size_t t = 0; t < kDiagnosticTypeCount; ++t) {
      compare(start.type_weights()[t] - stepped.type_weights()[t], &probe.type_weights()[t]);
    }
    CHECK(max_diff / max_grad < 1e-5);
  }
  CHECK(checked == 40);
}

TEST_CASE("satisfied margins leave the model unchanged") {
  const auto g = random_graph(41);
  const auto pool = SupervisedPool::build(g);
  auto m = scaled_model(g, 4, 1);
  const NodeId p = pool.patients[0];
  const NodeId pos = pool.diagnoses[0][0];
  std::vector<double> fp(4);
  compose_from_graph(m, g, p, fp);
  for (std::size_t i = 0; i < 4; ++i) m.vec(pos)[i] = 100 * fp[i];
  const auto before = m;
  CHECK(sup_step(m, g, p, pos, std::vector<NodeId>{}, 0.1, 1.0) == 0.0);
  CHECK(m == before);
}

TEST_CASE("omega = 1 never touches type weights") {
  const auto g = random_graph(51);
  auto c = small_config();
  c.omega = 1.0;
  const auto r = train(g, c);
  const auto init = EmbeddingModel::for_graph(g, c.dim, derive_seed(c.seed, 0));
  CHECK(r.model.type_weights() == init.type_weights());
  CHECK(r.stats.sup_steps == 0);
  CHECK_FALSE(r.model == init);
}

TEST_CASE("omega = 0 never draws positive pairs") {
  const auto g = random_graph(52);
  auto c = small_config();
  c.omega = 0.0;
  const auto r = train(g, c);
  CHECK(r.stats.positive_draws == 0);
  CHECK(r.stats.unsup_steps == 0);
  CHECK(r.stats.sup_steps == r.stats.steps);
}

TEST_CASE("branch frequency follows omega") {
  const auto g = random_graph(53, 10, 4);
  auto c = small_config();
  c.batch = 1;
  c.dim = 2;
  c.sup_negatives = 1;
  c.unsup_negatives = 1;
  c.epochs = 4000;  // 10 patients -> 10 steps per epoch
  c.omega = 0.8;
  const auto r = train(g, c);
  REQUIRE(r.stats.steps == 40000);
  CHECK(std::fabs(static_cast<double>(r.stats.unsup_steps) / r.stats.steps - 0.8) < 0.01);
}

TEST_CASE("deterministic training is reproducible") {
  const auto g = random_graph(54);
  const auto c = small_config();
  CHECK(train(g, c).model == train(g, c).model);
  auto other = c;
  other.seed = 2;
  CHECK_FALSE(train(g, c).model == train(g, other).model);
}

TEST_CASE("training rejects graphs it cannot learn from") {
  const std::vector<PatientStay> stays = {{"p", {{EventType::symptom, "s", std::nullopt},
                                                 {EventType::diagnosis, "401", std::nullopt}}}};
  const auto g = HeteroGraph::build(stays);
  auto c = small_config();
  c.omega = 0.0;
  CHECK_THROWS_AS(train(g, c), DataError);
}

TEST_CASE("progress log") {
  const auto g = random_graph(55);
  auto c = small_config();
  c.log_every = 2;
  std::ostringstream log;
  const auto r = train(g, c, &log);
  std::size_t lines = 0;
  for (char ch : log.str()) lines += ch == '\n';
  CHECK(lines == r.stats.steps / 2);
  CHECK(log.str().rfind("step 2 unsup ", 0) == 0);
}
