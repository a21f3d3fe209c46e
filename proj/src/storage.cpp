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

#include "smartmlops/storage.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "smartmlops/error.hpp"

namespace smartmlops::storage {

namespace {

std::atomic<unsigned long> temp_counter{0};

[[noreturn]] void io_fail(const std::string& what, const fs::path& path) {
  fail(ErrorCode::kIo, fmt::format("{} '{}': {}", what, path.string(), std::strerror(errno)));
}

void write_all(int fd, std::string_view content, const fs::path& path) {
  const char* data = content.data();
  std::size_t left = content.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, data, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write failed for", path);
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      fail(ErrorCode::kIo, "sha256 initialisation failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_, data, size) != 1) fail(ErrorCode::kIo, "sha256 update failed");
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1) fail(ErrorCode::kIo, "sha256 final failed");
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content, const FaultHook& hook) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path temp = path.string() + fmt::format(".tmp.{}.{}", ::getpid(), temp_counter++);
  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot create", temp);
  try {
    write_all(fd, content, temp);
    if (::fsync(fd) != 0) io_fail("fsync failed for", temp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  if (hook) hook("after-temp-write");
  if (::rename(temp.c_str(), path.c_str()) != 0) io_fail("rename failed for", path);
}

void append_line(const fs::path& path, std::string_view line) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot open", path);
  try {
    const off_t size = ::lseek(fd, 0, SEEK_END);
    if (size > 0) {
      char last = 0;
      if (::pread(fd, &last, 1, size - 1) != 1) io_fail("read failed for", path);
      if (last != '\n') {
        // Torn tail from an interrupted append: cut back to the last full line.
        std::string body = read_file(path);
        const auto cut = body.rfind('\n');
        const off_t keep = cut == std::string::npos ? 0 : static_cast<off_t>(cut + 1);
        if (::ftruncate(fd, keep) != 0) io_fail("truncate failed for", path);
      }
    }
    ::lseek(fd, 0, SEEK_END);
    std::string out(line);
    out.push_back('\n');
    write_all(fd, out, path);
    if (::fsync(fd) != 0) io_fail("fsync failed for", path);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_hex_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, fmt::format("cannot hash '{}': unreadable", path.string()));
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) fail(ErrorCode::kIo, fmt::format("cannot hash '{}': read error", path.string()));
  return h.hex();
}

std::string encode_path_component(std::string_view name) {
  std::string out;
  for (const unsigned char c : name) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (safe) {
      out.push_back(static_cast<char>(c));
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  if (out == "." || out == "..") out = fmt::format("%2E{}", out.substr(1));
  return out;
}

std::string decode_path_component(std::string_view encoded) {
  std::string out;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size()) {
      out.push_back(static_cast<char>(std::stoi(std::string(encoded.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(encoded[i]);
    }
  }
  return out;
}

FileLock::FileLock(const fs::path& lock_path) {
  if (lock_path.has_parent_path()) fs::create_directories(lock_path.parent_path());
  fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) io_fail("cannot open lock file", lock_path);
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno != EINTR) {
      ::close(fd_);
      io_fail("cannot lock", lock_path);
    }
  }
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace smartmlops::storage
