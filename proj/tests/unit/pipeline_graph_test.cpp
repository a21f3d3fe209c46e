/*
 * Copyright 2026 The smartmlops Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "smartmlops/error.hpp"
#include "smartmlops/pipeline_graph.hpp"
#include "test_support.hpp"

using namespace smartmlops;
using namespace smartmlops::pipeline;

namespace {

StepNode cmd(const std::string& id) {
  StepNode n;
  n.id = id;
  n.kind = StepKind::kCommand;
  n.command = "true";
  return n;
}

PipelineSpec graph(std::vector<std::string> ids, std::vector<Edge> edges) {
  PipelineSpec s;
  s.name = "g";
  for (const auto& id : ids) s.nodes.push_back(cmd(id));
  s.edges = std::move(edges);
  return s;
}

bool has_kind(const std::vector<GraphError>& errors, GraphErrorKind kind) {
  return std::any_of(errors.begin(), errors.end(), [&](const auto& e) { return e.kind == kind; });
}

// Longest path from any source, by repeated relaxation (Bellman-Ford style).
std::map<std::string, std::size_t> oracle_levels(const PipelineSpec& spec) {
  std::map<std::string, std::size_t> level;
  for (const auto& n : spec.nodes) level[n.id] = 0;
  const auto edges = effective_edges(spec);
  for (std::size_t round = 0; round < spec.nodes.size(); ++round) {
    for (const auto& e : edges) level[e.to] = std::max(level[e.to], level[e.from] + 1);
  }
  return level;
}

}  // namespace

TEST(ValidateGraph, EmptyPipelineIsValid) { EXPECT_TRUE(validate_graph(PipelineSpec{}).empty()); }

TEST(ValidateGraph, TwoCycleNamesBothNodes) {
  const auto errors = validate_graph(graph({"A", "B"}, {{"A", "B"}, {"B", "A"}}));
  ASSERT_TRUE(has_kind(errors, GraphErrorKind::kCycle));
  for (const auto& e : errors) {
    if (e.kind == GraphErrorKind::kCycle) {
      EXPECT_EQ(e.nodes, (std::vector<std::string>{"A", "B"}));
    }
  }
}

TEST(ValidateGraph, CycleErrorKeepsOnlyUneliminatedNodes) {
  const auto errors = validate_graph(graph({"S", "A", "B", "C", "T"}, {{"S", "A"}, {"A", "B"}, {"B", "C"}, {"C", "A"}, {"C", "T"}}));
  for (const auto& e : errors) {
    if (e.kind == GraphErrorKind::kCycle) {
      EXPECT_EQ(e.nodes, (std::vector<std::string>{"A", "B", "C", "T"}));
    }
  }
}

TEST(ValidateGraph, DanglingEdgeNamesMissingNode) {
  const auto errors = validate_graph(graph({"A"}, {{"A", "X"}}));
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].kind, GraphErrorKind::kDanglingEdge);
  EXPECT_NE(std::find(errors[0].nodes.begin(), errors[0].nodes.end(), "X"), errors[0].nodes.end());
}

TEST(ValidateGraph, DuplicateEmptyAndSelf) {
  EXPECT_TRUE(has_kind(validate_graph(graph({"A", "A"}, {})), GraphErrorKind::kDuplicateId));
  EXPECT_TRUE(has_kind(validate_graph(graph({""}, {})), GraphErrorKind::kEmptyId));
  EXPECT_TRUE(has_kind(validate_graph(graph({"A"}, {{"A", "A"}})), GraphErrorKind::kSelfEdge));
}

TEST(ValidateGraph, DuplicateProducerIsRejected) {
  auto s = graph({"A", "B"}, {});
  s.nodes[0].outputs = {"x.csv"};
  s.nodes[1].outputs = {"x.csv"};
  EXPECT_TRUE(has_kind(validate_graph(s), GraphErrorKind::kDuplicateProducer));
}

TEST(ValidateGraph, KindRules) {
  PipelineSpec s;
  StepNode ingest;
  ingest.id = "i";
  ingest.kind = StepKind::kIngest;
  ingest.outputs = {"raw.csv"};
  s.nodes.push_back(ingest);
  EXPECT_TRUE(has_kind(validate_graph(s), GraphErrorKind::kMissingParam));
  s.nodes[0].params["dataset"] = "d.csv";
  EXPECT_TRUE(validate_graph(s).empty());
  StepNode reg;
  reg.id = "r";
  reg.kind = StepKind::kRegister;
  reg.params["model_name"] = "m";
  reg.inputs = {"raw.csv"};
  reg.outputs = {"reg.json"};
  s.nodes.push_back(reg);
  EXPECT_TRUE(has_kind(validate_graph(s), GraphErrorKind::kBadArity));
  auto c = graph({"c"}, {});
  c.nodes[0].command.clear();
  EXPECT_TRUE(has_kind(validate_graph(c), GraphErrorKind::kMissingParam));
}

TEST(ValidateGraph, ArtifactEdgesCanCloseACycle) {
  auto s = graph({"A", "B"}, {{"A", "B"}});
  s.nodes[1].outputs = {"b.out"};
  s.nodes[0].inputs = {"b.out"};
  EXPECT_TRUE(has_kind(validate_graph(s), GraphErrorKind::kCycle));
}

TEST(TopoSchedule, Diamond) {
  const auto s = topo_schedule(graph({"D", "C", "B", "A"}, {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}}));
  EXPECT_EQ(s.layers, (std::vector<std::vector<std::string>>{{"A"}, {"B", "C"}, {"D"}}));
}

TEST(TopoSchedule, ChainAndIsolated) {
  EXPECT_EQ(topo_schedule(graph({"C", "B", "A"}, {{"A", "B"}, {"B", "C"}})).layers,
            (std::vector<std::vector<std::string>>{{"A"}, {"B"}, {"C"}}));
  EXPECT_EQ(topo_schedule(graph({"B", "A"}, {})).layers, (std::vector<std::vector<std::string>>{{"A", "B"}}));
  EXPECT_TRUE(topo_schedule(PipelineSpec{}).layers.empty());
}

TEST(TopoSchedule, LongestPathNotShortest) {
  // A->D directly and A->B->C->D: D belongs in layer 3.
  const auto s = topo_schedule(graph({"A", "B", "C", "D"}, {{"A", "D"}, {"A", "B"}, {"B", "C"}, {"C", "D"}}));
  EXPECT_EQ(s.layers.back(), (std::vector<std::string>{"D"}));
  EXPECT_EQ(s.layers.size(), 4u);
}

TEST(TopoSchedule, CyclicInputThrows) {
  EXPECT_THROW(topo_schedule(graph({"A", "B"}, {{"A", "B"}, {"B", "A"}})), Error);
}

TEST(TopoSchedule, RandomDagsMatchOracle) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 300; ++t) {
    const auto spec = testkit::random_dag(rng, 40, 0.2);
    ASSERT_TRUE(validate_graph(spec).empty());
    const auto sched = topo_schedule(spec);
    const auto oracle = oracle_levels(spec);
    std::map<std::string, std::size_t> layer_of;
    std::size_t count = 0;
    for (std::size_t l = 0; l < sched.layers.size(); ++l) {
      EXPECT_TRUE(std::is_sorted(sched.layers[l].begin(), sched.layers[l].end()));
      for (const auto& id : sched.layers[l]) {
        layer_of[id] = l;
        ++count;
      }
    }
    EXPECT_EQ(count, spec.nodes.size());
    EXPECT_EQ(layer_of, oracle);
    for (const auto& e : effective_edges(spec)) EXPECT_LT(layer_of[e.from], layer_of[e.to]);
    EXPECT_EQ(topo_schedule(spec), sched);
  }
}

TEST(TopoSchedule, InjectedBackEdgeAlwaysRejected) {
  std::mt19937_64 rng(1234);
  int injected = 0;
  for (int t = 0; t < 300; ++t) {
    auto spec = testkit::random_dag(rng, 30, 0.25);
    const auto sched = topo_schedule(spec);
    if (sched.layers.size() < 2) continue;
    // Any edge from a later layer to an earlier reachable ancestor closes a cycle.
    const auto edges = effective_edges(spec);
    std::uniform_int_distribution<std::size_t> pick(0, edges.empty() ? 0 : edges.size() - 1);
    if (edges.empty()) continue;
    const auto e = edges[pick(rng)];
    spec.edges.push_back({e.to, e.from});
    EXPECT_TRUE(has_kind(validate_graph(spec), GraphErrorKind::kCycle));
    ++injected;
  }
  EXPECT_GT(injected, 100);
}

TEST(Descendants, Reachability) {
  const auto s = graph({"A", "B", "C", "D", "E"}, {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}});
  EXPECT_EQ(descendants(s, "B"), (std::vector<std::string>{"D"}));
  EXPECT_EQ(descendants(s, "A"), (std::vector<std::string>{"B", "C", "D"}));
  EXPECT_TRUE(descendants(s, "E").empty());
}
