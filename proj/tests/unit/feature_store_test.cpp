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

#include <sys/wait.h>
#include <unistd.h>

#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "smartmlops/error.hpp"
#include "smartmlops/feature_store.hpp"
#include "test_support.hpp"

using namespace smartmlops;
using namespace smartmlops::store;

namespace {

FeatureStatsRecord random_record(std::mt19937_64& rng, const std::string& ds, const std::string& feature) {
  std::normal_distribution<double> n(0, 3);
  std::vector<double> v(300);
  for (auto& x : v) x = n(rng);
  auto rec = compute_feature_stats(ds, data::Column::numeric(feature, v), 2 + rng() % 12);
  rec.created_at = Timestamp(std::chrono::nanoseconds(1'600'000'000'000'000'000LL + static_cast<std::int64_t>(rng() % 1'000'000'000'000'000LL)));
  return rec;
}

}  // namespace

TEST(FeatureStore, VersionsAndImmutability) {
  testkit::TempDir dir;
  FeatureStore fs_store(dir.path());
  std::mt19937_64 rng(1);
  auto r1 = random_record(rng, "ds1", "age");
  EXPECT_EQ(fs_store.put_stats(r1), 1u);
  const auto path1 = dir / "features/ds1/age/1.json";
  const auto before = storage::read_file(path1);
  EXPECT_EQ(fs_store.put_stats(random_record(rng, "ds1", "age")), 2u);
  EXPECT_EQ(storage::read_file(path1), before);
  EXPECT_EQ(fs_store.put_stats(random_record(rng, "ds1", "age")), 3u);
  EXPECT_EQ(fs_store.get_stats("ds1", "age").version, 3u);
  EXPECT_EQ(fs_store.get_stats("ds1", "age", 2).version, 2u);
  r1.version = 1;
  EXPECT_EQ(fs_store.get_stats("ds1", "age", 1), r1);
}

TEST(FeatureStore, NotFoundCases) {
  testkit::TempDir dir;
  FeatureStore fs_store(dir.path());
  try {
    fs_store.get_stats("ds", "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
  std::mt19937_64 rng(2);
  fs_store.put_stats(random_record(rng, "ds", "x"));
  EXPECT_THROW(fs_store.get_stats("ds", "x", 2), Error);
  EXPECT_TRUE(fs_store.list_stats("unknown").empty());
}

TEST(FeatureStore, RejectsInvalidProportions) {
  testkit::TempDir dir;
  FeatureStore fs_store(dir.path());
  std::mt19937_64 rng(3);
  auto r = random_record(rng, "ds", "x");
  for (auto& p : r.proportions) p *= 0.9;
  EXPECT_THROW(fs_store.put_stats(r), Error);
}

TEST(FeatureStore, ListSortedWithLatest) {
  testkit::TempDir dir;
  FeatureStore fs_store(dir.path());
  std::mt19937_64 rng(4);
  for (const auto* f : {"zeta", "alpha", "mid"}) fs_store.put_stats(random_record(rng, "ds", f));
  fs_store.put_stats(random_record(rng, "ds", "mid"));
  const auto list = fs_store.list_stats("ds");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[0].feature, "alpha");
  EXPECT_EQ(list[1].feature, "mid");
  EXPECT_EQ(list[1].latest_version, 2u);
  EXPECT_EQ(list[2].feature, "zeta");
  EXPECT_EQ(fs_store.list_datasets(), (std::vector<std::string>{"ds"}));
}

TEST(FeatureStore, CategoricalRoundTripAndOddNames) {
  testkit::TempDir dir;
  FeatureStore fs_store(dir.path());
  std::vector<std::optional<std::string>> labels{"a", "b", "a", std::nullopt, "c/d"};
  auto rec = compute_feature_stats("data set/1", data::Column::categorical("city name", labels));
  EXPECT_FALSE(rec.moments.has_value());
  EXPECT_EQ(rec.sample_count, 4u);
  const auto v = fs_store.put_stats(rec);
  rec.version = v;
  const auto back = fs_store.get_stats("data set/1", "city name");
  rec.created_at = back.created_at;
  EXPECT_EQ(back, rec);
}

TEST(FeatureStore, ConcurrentWritersNeverDuplicateVersions) {
  testkit::TempDir dir;
  std::vector<std::thread> threads;
  std::vector<std::vector<std::uint64_t>> got(4);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      FeatureStore s(dir.path());
      std::mt19937_64 rng(t);
      for (int i = 0; i < 15; ++i) got[t].push_back(s.put_stats(random_record(rng, "ds", "f")));
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::uint64_t> all;
  for (const auto& g : got) all.insert(g.begin(), g.end());
  EXPECT_EQ(all.size(), 60u);
  EXPECT_EQ(*all.rbegin(), 60u);
}

TEST(FeatureStore, CrashMidPutKeepsPreviousLatest) {
  // Crash at the first temp write (record file) and at the second (index).
  for (int crash_at = 1; crash_at <= 2; ++crash_at) {
    testkit::TempDir dir;
    std::mt19937_64 rng(9);
    FeatureStore fs_store(dir.path());
    fs_store.put_stats(random_record(rng, "ds", "f"));
    const auto latest = fs_store.get_stats("ds", "f");
    const auto next = random_record(rng, "ds", "f");

    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      FeatureStore child(dir.path());
      int seen = 0;
      child.set_fault_hook([&](std::string_view stage) {
        if (stage == "after-temp-write" && ++seen == crash_at) ::_exit(17);
      });
      child.put_stats(next);
      ::_exit(0);
    }
    int status = 0;
    ::waitpid(pid, &status, 0);
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 17);
    EXPECT_EQ(FeatureStore(dir.path()).get_stats("ds", "f"), latest);
    EXPECT_EQ(FeatureStore(dir.path()).put_stats(next), 2u);
    EXPECT_EQ(FeatureStore(dir.path()).get_stats("ds", "f").version, 2u);
  }
}
