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

#include "smartmlops/executor.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstring>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "smartmlops/error.hpp"
#include "smartmlops/storage.hpp"

extern char** environ;

namespace smartmlops::exec {

namespace fs = std::filesystem;
using pipeline::PipelineSpec;
using pipeline::StepKind;
using pipeline::StepNode;

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::kSucceeded: return "succeeded";
    case NodeStatus::kFailed: return "failed";
    case NodeStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

NodeStatus parse_node_status(std::string_view text) {
  for (const auto s : {NodeStatus::kSucceeded, NodeStatus::kFailed, NodeStatus::kSkipped}) {
    if (to_string(s) == text) return s;
  }
  fail(ErrorCode::kParse, fmt::format("unknown node status '{}'", text));
}

fs::path StepContext::input(const std::string& name) const {
  const auto it = inputs.find(name);
  if (it == inputs.end()) {
    fail(ErrorCode::kInvalidArgument, fmt::format("node '{}' has no input named '{}'", node.id, name));
  }
  return it->second;
}

std::string new_run_id() {
  static std::atomic<unsigned> counter{0};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const auto stamp = format_timestamp(now());
  // 2024-01-02T03:04:05.123456789Z -> 20240102T030405-123456
  std::string compact;
  for (const char c : stamp.substr(0, 19)) {
    if (c != '-' && c != ':') compact.push_back(c);
  }
  return fmt::format("{}-{}-{:x}-{:04x}-{:06x}", compact, stamp.substr(20, 6), ::getpid(), counter++ & 0xffff,
                     rng() & 0xffffff);
}

namespace {

std::string env_name(std::string_view prefix, std::string_view name) {
  std::string out(prefix);
  for (const char c : name) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_');
  }
  return out;
}

std::string tail_of(const fs::path& path, std::size_t max_bytes) {
  if (!fs::exists(path)) return {};
  auto text = storage::read_file(path);
  if (text.size() > max_bytes) text = text.substr(text.size() - max_bytes);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

}  // namespace

StepRunner command_runner() {
  return [](const StepContext& ctx) -> nlohmann::json {
    std::vector<std::string> env;
    for (char** e = environ; *e != nullptr; ++e) env.emplace_back(*e);
    env.push_back("SMARTMLOPS_RUN_ID=" + ctx.run_id);
    env.push_back("SMARTMLOPS_WORK_DIR=" + ctx.work_dir.string());
    env.push_back("SMARTMLOPS_STORE=" + ctx.store_root.string());
    for (const auto& [name, path] : ctx.inputs) env.push_back(env_name("SMARTMLOPS_INPUT_", name) + "=" + path.string());
    for (const auto& [key, value] : ctx.node.params) env.push_back(env_name("SMARTMLOPS_PARAM_", key) + "=" + value);

    std::vector<char*> envp;
    for (auto& s : env) envp.push_back(s.data());
    envp.push_back(nullptr);
    std::string sh = "/bin/sh", dash_c = "-c", cmd = ctx.node.command;
    std::vector<char*> argv{sh.data(), dash_c.data(), cmd.data(), nullptr};

    const auto out_log = (ctx.work_dir / "stdout.log").string();
    const auto err_log = (ctx.work_dir / "stderr.log").string();
    const auto dir = ctx.work_dir.string();
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addchdir_np(&actions, dir.c_str());
    pid_t pid = 0;
    const int rc = posix_spawn(&pid, sh.c_str(), &actions, nullptr, argv.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) fail(ErrorCode::kIo, fmt::format("cannot spawn command: {}", std::strerror(rc)));

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
      if (errno != EINTR) fail(ErrorCode::kIo, "waitpid failed");
    }
    if (WIFSIGNALED(status)) {
      fail(ErrorCode::kFailedPrecondition, fmt::format("command killed by signal {}", WTERMSIG(status)));
    }
    if (WEXITSTATUS(status) != 0) {
      const auto err = tail_of(ctx.work_dir / "stderr.log", 400);
      fail(ErrorCode::kFailedPrecondition,
           err.empty() ? fmt::format("command exited with status {}", WEXITSTATUS(status))
                       : fmt::format("command exited with status {}: {}", WEXITSTATUS(status), err));
    }
    return nlohmann::json::object();
  };
}

RunRecord execute(const PipelineSpec& spec, const ExecutionOptions& options) {
  if (options.max_parallel < 1) fail(ErrorCode::kInvalidArgument, "max_parallel must be at least 1");
  if (const auto errors = pipeline::validate_graph(spec); !errors.empty()) {
    fail(ErrorCode::kInvalidArgument, pipeline::describe(errors));
  }
  const auto schedule = pipeline::topo_schedule(spec);
  const auto producers = pipeline::artifact_producers(spec);
  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& e : pipeline::effective_edges(spec)) parents[e.to].push_back(e.from);

  RunnerTable runners = builtin_runners();
  runners[StepKind::kCommand] = command_runner();
  for (const auto& [kind, runner] : options.runners) runners[kind] = runner;

  RunRecord record;
  record.run_id = options.run_id.empty() ? new_run_id() : options.run_id;
  record.pipeline = spec.name;
  record.layers = schedule.layers;
  record.started_at = now();
  const fs::path run_dir = fs::absolute(options.runs_root / record.run_id);
  if (fs::exists(run_dir / "record.json")) {
    fail(ErrorCode::kFailedPrecondition, fmt::format("run '{}' already exists", record.run_id));
  }
  fs::create_directories(run_dir);
  const fs::path store_root = fs::absolute(options.store_root);

  std::map<std::string, nlohmann::json> notes;
  std::mutex coordinator;

  for (const auto& layer : schedule.layers) {
    std::vector<const StepNode*> runnable;
    for (const auto& id : layer) {
      std::string blocked_by;
      for (const auto& p : parents[id]) {
        if (record.nodes.at(p).status != NodeStatus::kSucceeded) {
          blocked_by = p;
          break;
        }
      }
      if (!blocked_by.empty()) {
        NodeRecord skipped;
        skipped.id = id;
        skipped.status = NodeStatus::kSkipped;
        skipped.cause = fmt::format("upstream node '{}' did not succeed", blocked_by);
        record.nodes[id] = std::move(skipped);
      } else {
        runnable.push_back(spec.find(id));
      }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < runnable.size(); i = next++) {
        const StepNode& node = *runnable[i];
        NodeRecord nr;
        nr.id = node.id;
        nr.started_at = now();
        const fs::path work_dir = run_dir / storage::encode_path_component(node.id);
        try {
          fs::create_directories(work_dir);
          std::map<std::string, fs::path> inputs;
          for (const auto& name : node.inputs) {
            fs::path path;
            if (const auto it = producers.find(name); it != producers.end()) {
              path = run_dir / storage::encode_path_component(it->second) / name;
            } else if (const auto ext = options.external_inputs.find(name); ext != options.external_inputs.end()) {
              path = fs::absolute(ext->second);
            }
            if (path.empty() || !fs::exists(path)) {
              fail(ErrorCode::kNotFound, fmt::format("missing input artifact '{}'", name));
            }
            inputs[name] = path;
          }
          const auto runner = runners.find(node.kind);
          if (runner == runners.end() || !runner->second) {
            fail(ErrorCode::kInvalidArgument, fmt::format("no runner for kind '{}'", pipeline::to_string(node.kind)));
          }
          StepContext ctx{node, work_dir, std::move(inputs), store_root, record.run_id, notes};
          auto produced = runner->second(ctx);
          nr.notes = produced.is_object() ? std::move(produced) : nlohmann::json::object();
          for (const auto& name : node.outputs) {
            const auto path = work_dir / name;
            if (!fs::is_regular_file(path)) {
              fail(ErrorCode::kNotFound, fmt::format("declared output '{}' was not produced", name));
            }
            nr.artifacts[name] = storage::sha256_hex_file(path);
          }
          nr.status = NodeStatus::kSucceeded;
        } catch (const std::exception& e) {
          nr.status = NodeStatus::kFailed;
          nr.cause = e.what();
          nr.artifacts.clear();
        }
        nr.ended_at = now();
        std::lock_guard lock(coordinator);
        if (nr.status == NodeStatus::kFailed) {
          spdlog::warn("run {}: node '{}' failed: {}", record.run_id, node.id, nr.cause);
        } else {
          spdlog::debug("run {}: node '{}' succeeded", record.run_id, node.id);
        }
        record.nodes[node.id] = std::move(nr);
      }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.max_parallel), runnable.size());
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    for (const auto* node : runnable) {
      const auto& nr = record.nodes.at(node->id);
      if (nr.status == NodeStatus::kSucceeded && !nr.notes.empty()) notes[node->id] = nr.notes;
    }
  }

  record.status = NodeStatus::kSucceeded;
  for (const auto& [id, nr] : record.nodes) {
    if (nr.status != NodeStatus::kSucceeded) record.status = NodeStatus::kFailed;
  }
  record.ended_at = now();
  storage::write_file_atomic(run_dir / "record.json", to_json(record).dump(2) + "\n");
  return record;
}

bool same_outcome(const RunRecord& a, const RunRecord& b) {
  if (a.status != b.status || a.layers != b.layers || a.nodes.size() != b.nodes.size()) return false;
  for (const auto& [id, na] : a.nodes) {
    const auto it = b.nodes.find(id);
    if (it == b.nodes.end()) return false;
    if (na.status != it->second.status || na.artifacts != it->second.artifacts) return false;
  }
  return true;
}

nlohmann::json to_json(const RunRecord& r) {
  auto nodes = nlohmann::json::object();
  for (const auto& [id, n] : r.nodes) {
    nodes[id] = {{"status", to_string(n.status)},
                 {"started_at", format_timestamp(n.started_at)},
                 {"ended_at", format_timestamp(n.ended_at)},
                 {"artifacts", n.artifacts},
                 {"cause", n.cause},
                 {"notes", n.notes}};
  }
  return {{"run_id", r.run_id},
          {"pipeline", r.pipeline},
          {"status", to_string(r.status)},
          {"started_at", format_timestamp(r.started_at)},
          {"ended_at", format_timestamp(r.ended_at)},
          {"layers", r.layers},
          {"nodes", nodes}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.pipeline = j.at("pipeline").get<std::string>();
  r.status = parse_node_status(j.at("status").get<std::string>());
  r.started_at = parse_timestamp(j.at("started_at").get<std::string>());
  r.ended_at = parse_timestamp(j.at("ended_at").get<std::string>());
  r.layers = j.at("layers").get<std::vector<std::vector<std::string>>>();
  for (const auto& [id, n] : j.at("nodes").items()) {
    NodeRecord nr;
    nr.id = id;
    nr.status = parse_node_status(n.at("status").get<std::string>());
    nr.started_at = parse_timestamp(n.at("started_at").get<std::string>());
    nr.ended_at = parse_timestamp(n.at("ended_at").get<std::string>());
    nr.artifacts = n.at("artifacts").get<std::map<std::string, std::string>>();
    nr.cause = n.value("cause", std::string{});
    nr.notes = n.value("notes", nlohmann::json::object());
    r.nodes[id] = std::move(nr);
  }
  return r;
}

}  // namespace smartmlops::exec
