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

#pragma once

#include <cstdint>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "smartmlops/executor.hpp"
#include "smartmlops/pipeline_graph.hpp"
#include "smartmlops/storage.hpp"

namespace smartmlops::testkit {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "smartmlops") {
    std::string pattern = (std::filesystem::temp_directory_path() / (tag + "-XXXXXX")).string();
    if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Random DAG over n0..n{k-1}: edge i->j (i<j) with probability `density`.
// Every node produces "<id>.out" and consumes its parents' outputs, so the
// artifact edges coincide with the explicit ones. Nodes are `command` kind
// and meant for the in-process runner below.
inline pipeline::PipelineSpec random_dag(std::mt19937_64& rng, std::size_t max_nodes, double density) {
  std::uniform_int_distribution<std::size_t> count(1, max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = count(rng);
  pipeline::PipelineSpec spec;
  spec.name = "random";
  for (std::size_t i = 0; i < n; ++i) {
    pipeline::StepNode node;
    node.id = fmt::format("n{:02}", i);
    node.kind = pipeline::StepKind::kCommand;
    node.command = "in-process";
    node.outputs = {node.id + ".out"};
    spec.nodes.push_back(node);
  }
  // Shuffle declaration order so the scheduler cannot lean on it.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (unit(rng) < density) {
        const auto from = fmt::format("n{:02}", order[i]);
        const auto to = fmt::format("n{:02}", order[j]);
        spec.edges.push_back({from, to});
        spec.find(to)->inputs.push_back(from + ".out");
      }
    }
  }
  std::shuffle(spec.nodes.begin(), spec.nodes.end(), rng);
  return spec;
}

// Writes a digest of the node id and its inputs; fails when params["fail"]=="1".
inline exec::StepRunner deterministic_runner() {
  return [](const exec::StepContext& ctx) -> nlohmann::json {
    if (ctx.node.param("fail") == "1") throw std::runtime_error("injected failure");
    std::string content = ctx.node.id;
    for (const auto& [name, path] : ctx.inputs) content += "|" + name + "=" + storage::read_file(path);
    for (const auto& out : ctx.node.outputs) {
      storage::write_file_atomic(ctx.output(out), storage::sha256_hex(content + "#" + out));
    }
    return nlohmann::json::object();
  };
}

/// Brute-force registry reference: a flat version table and an explicit list
/// of past production versions, recomputed from scratch on every query.
class ReferenceRegistry {
 public:
  enum class St { kCandidate, kProduction, kArchived };

  bool register_version() {
    stages_.push_back(St::kCandidate);
    return true;
  }
  bool promote(std::uint64_t v) {
    if (v == 0 || v > stages_.size() || stages_[v - 1] != St::kCandidate) return false;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (stages_[i] == St::kProduction) {
        stages_[i] = St::kArchived;
        past_.push_back(i + 1);
      }
    }
    stages_[v - 1] = St::kProduction;
    return true;
  }
  bool rollback(std::optional<std::uint64_t> to) {
    const auto prod = production();
    if (!prod || past_.empty()) return false;
    std::uint64_t target = to ? *to : past_.back();
    std::optional<std::size_t> where;
    for (std::size_t i = past_.size(); i-- > 0;) {
      if (past_[i] == target) {
        where = i;
        break;
      }
    }
    if (!where) return false;
    past_.erase(past_.begin() + static_cast<std::ptrdiff_t>(*where), past_.end());
    stages_[*prod - 1] = St::kArchived;
    stages_[target - 1] = St::kProduction;
    return true;
  }
  bool archive(std::uint64_t v) {
    if (v == 0 || v > stages_.size() || stages_[v - 1] != St::kCandidate) return false;
    stages_[v - 1] = St::kArchived;
    return true;
  }
  std::optional<std::uint64_t> production() const {
    std::optional<std::uint64_t> p;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (stages_[i] == St::kProduction) p = i + 1;
    }
    return p;
  }
  std::size_t production_count() const {
    return static_cast<std::size_t>(std::count(stages_.begin(), stages_.end(), St::kProduction));
  }
  const std::vector<St>& stages() const { return stages_; }
  std::size_t size() const { return stages_.size(); }
  const std::vector<std::uint64_t>& past() const { return past_; }

 private:
  std::vector<St> stages_;
  std::vector<std::uint64_t> past_;
};

inline std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  storage::write_file_atomic(path, text);
  return path;
}

}  // namespace smartmlops::testkit
