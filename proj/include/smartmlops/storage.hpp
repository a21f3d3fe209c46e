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

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace smartmlops::storage {

namespace fs = std::filesystem;

// Called at named points inside multi-step writes ("after-temp-write", ...).
// Tests install hooks that throw or _exit to simulate a crash at that point.
using FaultHook = std::function<void(std::string_view stage)>;

std::string read_file(const fs::path& path);

// Writes to a sibling temp file, fsyncs, then renames over `path`. Readers see
// either the old or the new content, never a torn file.
void write_file_atomic(const fs::path& path, std::string_view content,
                       const FaultHook& hook = {});

// Appends one line; repairs a torn trailing line left by an earlier crash.
void append_line(const fs::path& path, std::string_view line);

std::string sha256_hex(std::string_view bytes);
std::string sha256_hex_file(const fs::path& path);

// Percent-encodes anything outside [A-Za-z0-9._-] so user-supplied names are
// safe as single path components.
std::string encode_path_component(std::string_view name);
std::string decode_path_component(std::string_view encoded);

/// Exclusive advisory lock (flock) on a lock file; released on destruction.
class FileLock {
 public:
  explicit FileLock(const fs::path& lock_path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace smartmlops::storage
