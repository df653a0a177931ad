// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "hinrank/errors.hpp"
#include "hinrank/hin.hpp"
#include "oracles.hpp"

using namespace hinrank;

namespace {

std::vector<PatientStay> tiny_stays() {
  return {
      {"p1",
       {{EventType::symptom, "fever", std::nullopt},
        {EventType::symptom, "cough", std::nullopt},
        {EventType::laboratory, "glucose", std::string("abnormal")},
        {EventType::diagnosis, "4019", std::nullopt}}},
      {"p2",
       {{EventType::symptom, "fever", std::nullopt},
        {EventType::diagnosis, "4019", std::nullopt},
        {EventType::diagnosis, "25000", std::nullopt},
        {EventType::diagnosis, "bad!", std::nullopt}}},
  };
}

}  // namespace

TEST_CASE("path schema labels") {
  const auto a = PathSchema::parse("lab-diag");
  CHECK(a.types == std::vector<NodeType>{NodeType::laboratory, NodeType::patient, NodeType::diagnosis});
  CHECK(a.label == "lab-diag");
  CHECK(PathSchema::parse("lab-pati-diag").label == "lab-diag");
  const auto s = PathSchema::parse("pati-symp");
  CHECK_FALSE(s.is_metapath());
  CHECK(s.destination() == NodeType::symptom);
  CHECK_THROWS_AS(PathSchema::parse("lab-vitals"), ConfigError);
  CHECK_THROWS_AS(PathSchema::parse("lab-symp-diag"), ConfigError);
  CHECK(simple_link_schemas().size() == 9);
  CHECK(candidate_metapaths().size() == 9);
  CHECK(default_metapaths().size() == 4);
  for (const auto& p : candidate_metapaths()) CHECK_NOTHROW(validate(p, NetworkSchema::standard()));
}

TEST_CASE("build interns nodes and skips unmappable events") {
  const auto g = HeteroGraph::build(tiny_stays());
  CHECK(g.nodes_of_type(NodeType::patient).size() == 2);
  CHECK(g.nodes_of_type(NodeType::symptom).size() == 2);
  CHECK(g.nodes_of_type(NodeType::diagnosis).size() == 2);
  CHECK(g.skipped_events() == 1);
  CHECK(g.edge_count() == 7);
  CHECK(g.edge_count(LinkType::of(NodeType::patient, NodeType::diagnosis)) == 3);
  const auto fever = g.find({NodeType::symptom, "fever"});
  REQUIRE(fever);
  CHECK(g.degree(*fever) == 2);
  CHECK(g.neighbors(*fever, NodeType::patient).size() == 2);
  CHECK(g.neighbors(*fever, NodeType::diagnosis).empty());
  // Patients are first seen, so they get the lowest ids in stay order.
  CHECK(g.key(0).identity == "p1");
}

TEST_CASE("network schema restricts event types") {
  const NetworkSchema diag_only({NodeType::patient, NodeType::symptom, NodeType::diagnosis},
                                {LinkType::of(NodeType::patient, NodeType::symptom),
                                 LinkType::of(NodeType::patient, NodeType::diagnosis)});
  CHECK_THROWS_AS(HeteroGraph::build(tiny_stays(), diag_only), ConfigError);
  CHECK_THROWS_AS(validate(PathSchema::parse("lab-diag"), diag_only), ConfigError);
}

TEST_CASE("adjacency is symmetric") {
  Rng rng(3);
  const auto g = HeteroGraph::build(oracle::random_stays(rng, 30, 6));
  std::size_t half_edges = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
      for (NodeId u : g.neighbors(v, static_cast<NodeType>(t))) {
        ++half_edges;
        const auto back = g.neighbors(u, g.type(v));
        CHECK(std::find(back.begin(), back.end(), v) != back.end());
      }
    }
  }
  CHECK(half_edges == 2 * g.edge_count());
}

TEST_CASE("path instance counts and pairs match pair-centric enumeration") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = HeteroGraph::build(oracle::random_stays(rng, 12, 5));
    std::vector<PathSchema> paths = simple_link_schemas();
    for (const auto& p : candidate_metapaths()) paths.push_back(p);
    paths.push_back(PathSchema::parse("symp-symp"));
    for (const auto& path : paths) {
      const auto pairs = enumerate_path_pairs(g, path);
      std::uint64_t total = 0;
      for (const auto& pp : pairs) total += pp.multiplicity;
      CHECK(total == count_path_instances(g, path));

      const auto expected = oracle::path_pair_distribution(g, path);
      REQUIRE(expected.size() == pairs.size());
      for (const auto& pp : pairs) {
        const auto it = expected.find({pp.source, pp.destination});
        REQUIRE(it != expected.end());
        CHECK(it->second == doctest::Approx(static_cast<double>(pp.multiplicity) / total));
      }
    }
  }
}

TEST_CASE("same-type metapath counts unordered distinct pairs") {
  const auto g = HeteroGraph::build(tiny_stays());
  // p1 has two symptoms, p2 one.
  CHECK(count_path_instances(g, PathSchema::parse("symp-symp")) == 1);
}

TEST_CASE("graph dump round-trip") {
  Rng rng(5);
  const auto g = HeteroGraph::build(oracle::random_stays(rng, 20, 4));
  std::stringstream io;
  g.dump(io);
  const auto back = HeteroGraph::load(io);
  REQUIRE(back.node_count() == g.node_count());
  CHECK(back.edge_count() == g.edge_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    CHECK(back.key(v) == g.key(v));
    for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
      const auto a = g.neighbors(v, static_cast<NodeType>(t));
      const auto b = back.neighbors(v, static_cast<NodeType>(t));
      CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
  }
  std::stringstream again;
  back.dump(again);
  CHECK(again.str() == io.str());
}
