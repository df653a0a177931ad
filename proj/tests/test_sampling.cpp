// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <map>

#include "hinrank/errors.hpp"
#include "hinrank/sampling.hpp"
#include "oracles.hpp"

using namespace hinrank;

namespace {

// Two diagnosis nodes with degrees 3 and 1.
std::vector<PatientStay> degree_fixture() {
  auto stay = [](std::string id, std::vector<std::string> diags) {
    PatientStay s{std::move(id), {{EventType::symptom, "fever", std::nullopt}}};
    for (auto& d : diags) s.events.push_back({EventType::diagnosis, d, std::nullopt});
    return s;
  };
  return {stay("p1", {"401"}), stay("p2", {"401"}), stay("p3", {"401", "250"})};
}

}  // namespace

TEST_CASE("alias table reproduces weights") {
  const std::vector<double> w = {1, 0, 3, 6, 0.5};
  AliasTable t(w);
  CHECK(t.total_weight() == doctest::Approx(10.5));
  Rng rng(1);
  std::vector<double> counts(w.size());
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[t.sample(rng)] += 1;
  CHECK(counts[1] == 0);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(counts[i] / n == doctest::Approx(w[i] / 10.5).epsilon(0.02));
  CHECK_THROWS_AS(AliasTable(std::vector<double>{}), ConfigError);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{0, 0}), ConfigError);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{1, -1}), ConfigError);
}

TEST_CASE("uniform schema selection") {
  const auto paths = default_metapaths();
  Rng rng(2);
  std::vector<int> counts(paths.size());
  for (int i = 0; i < 40000; ++i) counts[sample_schema(paths, rng)] += 1;
  for (int c : counts) CHECK(std::fabs(c / 40000.0 - 0.25) < 0.01);
}

TEST_CASE("proportional schema selection follows instance counts") {
  Rng data(9);
  const auto g = HeteroGraph::build(oracle::random_stays(data, 20, 5));
  const std::vector<PathSchema> paths = {PathSchema::parse("pati-symp"), PathSchema::parse("symp-diag")};
  SamplerSet s(g, paths, 1.0, SchemaSelection::proportional);
  const double a = static_cast<double>(count_path_instances(g, paths[0]));
  const double b = static_cast<double>(count_path_instances(g, paths[1]));
  Rng rng(3);
  int first = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) first += s.sample_schema(rng) == 0;
  CHECK(std::fabs(first / static_cast<double>(n) - a / (a + b)) < 0.01);
}

TEST_CASE("positive pairs follow path multiplicities") {
  Rng data(4);
  const auto g = HeteroGraph::build(oracle::random_stays(data, 8, 4));
  std::vector<PathSchema> paths = {PathSchema::parse("pati-lab"), PathSchema::parse("symp-diag"),
                                   PathSchema::parse("lab-symp"), PathSchema::parse("symp-symp")};
  SamplerSet s(g, paths);
  REQUIRE(s.schemas().size() == paths.size());
  Rng rng(5);
  const int n = 50000;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    oracle::PairDist got;
    const bool same = paths[k].is_metapath() && paths[k].types[0] == paths[k].types[2];
    for (int i = 0; i < n; ++i) {
      auto [v, c] = s.sample_positive_pair(k, rng);
      CHECK(g.type(v) == paths[k].source());
      CHECK(g.type(c) == paths[k].destination());
      if (same) {
        CHECK(v != c);
        if (c < v) std::swap(v, c);
      }
      got[{v, c}] += 1.0 / n;
    }
    CHECK(oracle::total_variation(got, oracle::path_pair_distribution(g, paths[k])) < 0.03);
  }
  CHECK(s.positive_draws() == static_cast<std::uint64_t>(n) * paths.size());
}

TEST_CASE("negatives follow degree^alpha") {
  const auto g = HeteroGraph::build(degree_fixture());
  const NodeId d401 = *g.find({NodeType::diagnosis, "401"});
  const NodeId d250 = *g.find({NodeType::diagnosis, "250"});
  const NodeId fever = *g.find({NodeType::symptom, "fever"});
  std::vector<NodeId> out;
  Rng rng(6);

  SamplerSet s1(g, {PathSchema::parse("symp-diag")}, 1.0);
  s1.sample_negatives(NodeType::diagnosis, fever, 10000, rng, out);
  const double f401 = static_cast<double>(std::count(out.begin(), out.end(), d401)) / out.size();
  CHECK(std::fabs(f401 - 0.75) < 0.02);

  SamplerSet s0(g, {PathSchema::parse("symp-diag")}, 0.0);
  s0.sample_negatives(NodeType::diagnosis, fever, 10000, rng, out);
  const double u401 = static_cast<double>(std::count(out.begin(), out.end(), d401)) / out.size();
  CHECK(std::fabs(u401 - 0.5) < 0.02);

  s1.sample_negatives(NodeType::diagnosis, d401, 100, rng, out);
  CHECK(std::all_of(out.begin(), out.end(), [&](NodeId u) { return u == d250; }));

  const std::vector<NodeId> both = {std::min(d401, d250), std::max(d401, d250)};
  CHECK_FALSE(s1.sample_negatives_excluding(NodeType::diagnosis, both, 5, rng, out));
  CHECK(out.empty());
  const std::vector<NodeId> one = {d250};
  CHECK(s1.sample_negatives_excluding(NodeType::diagnosis, one, 5, rng, out));
  CHECK(out == std::vector<NodeId>(5, d401));
  CHECK(s1.negative_weight(d401) == doctest::Approx(3.0));
}

TEST_CASE("schemas without instances or negatives are deactivated") {
  const auto g = HeteroGraph::build(degree_fixture());
  // Single symptom node: symp destination has fewer than two nodes.
  SamplerSet s(g, {PathSchema::parse("diag-symp"), PathSchema::parse("lab-diag"),
                   PathSchema::parse("symp-diag")});
  CHECK(s.schemas().size() == 1);
  CHECK(s.schemas()[0].label == "symp-diag");
  CHECK(s.notices().size() == 2);
}
