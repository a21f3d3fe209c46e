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

#include <random>

#include <gtest/gtest.h>

#include "smartmlops/error.hpp"
#include "smartmlops/logreg.hpp"
#include "test_support.hpp"

using namespace smartmlops;
using namespace smartmlops::learn;

namespace {

data::Dataset toy(std::uint64_t seed, std::size_t n, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0, 1);
  std::vector<double> a(n), b(n), y(n);
  std::vector<std::optional<std::string>> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = nd(rng);
    b[i] = 10 + 5 * nd(rng);
    c[i] = i % 3 == 0 ? "red" : "blue";
    y[i] = (2 * a[i] - 0.2 * (b[i] - 10) + (c[i] == "red" ? 1.0 : -0.5) + noise * nd(rng)) > 0 ? 1 : 0;
  }
  data::Dataset d;
  d.add_column(data::Column::numeric("a", a));
  d.add_column(data::Column::numeric("b", b));
  d.add_column(data::Column::categorical("c", c));
  d.add_column(data::Column::numeric("y", y));
  return d;
}

}  // namespace

TEST(Encoding, OneHotAndTarget) {
  const auto enc = encode_features(toy(1, 30, 0), "y");
  EXPECT_EQ(enc.feature_names, (std::vector<std::string>{"a", "b", "c=blue", "c=red"}));
  EXPECT_EQ(enc.x.rows, 30u);
  EXPECT_EQ(enc.x.at(0, 3), 1.0);
  EXPECT_EQ(enc.x.at(1, 2), 1.0);
  const auto back = from_encoded_dataset(to_dataset(enc), "y");
  EXPECT_EQ(back.x.values, enc.x.values);
  EXPECT_EQ(back.y, enc.y);
  EXPECT_EQ(binary_target(data::Column::categorical("t", {"no", "yes", "no"})), (std::vector<double>{0, 1, 0}));
  EXPECT_THROW(binary_target(data::Column::numeric("t", {0, 2})), Error);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 1);
  const auto enc = encode_features(toy(2, 200, 0.5), "y");
  for (int point = 0; point < 20; ++point) {
    std::vector<double> w(enc.x.cols);
    for (auto& v : w) v = nd(rng);
    const double b = nd(rng), l2 = 0.01;
    const auto g = loss_and_gradient(enc.x, enc.y, w, b, l2);
    const double h = 1e-5;
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd = (loss_and_gradient(enc.x, enc.y, wp, b, l2).loss -
                         loss_and_gradient(enc.x, enc.y, wm, b, l2).loss) / (2 * h);
      EXPECT_NEAR(fd, g.grad_w[j], 1e-6);
    }
    const double fdb = (loss_and_gradient(enc.x, enc.y, w, b + h, l2).loss -
                        loss_and_gradient(enc.x, enc.y, w, b - h, l2).loss) / (2 * h);
    EXPECT_NEAR(fdb, g.grad_b, 1e-6);
  }
}

TEST(Training, LossNonincreasingAndSeparableToyLearned) {
  const auto d = toy(4, 800, 0.0);
  const auto r = builtin_train_logreg(d, "y", TrainOptions{});
  ASSERT_GE(r.loss_history.size(), 2u);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
    EXPECT_LE(r.loss_history[i], r.loss_history[i - 1] + 1e-12) << "epoch " << i;
  }
  EXPECT_GE(r.holdout_accuracy, 0.95);
  EXPECT_EQ(r.holdout_rows, 160u);
}

TEST(Training, DeterministicForSeed) {
  const auto d = toy(5, 300, 0.5);
  const auto a = builtin_train_logreg(d, "y", TrainOptions{});
  const auto b = builtin_train_logreg(d, "y", TrainOptions{});
  EXPECT_EQ(to_json(a.model), to_json(b.model));
  const auto restored = model_from_json(to_json(a.model));
  const auto x = encode_for_model(d, restored.feature_names);
  EXPECT_EQ(accuracy(restored, x, encode_features(d, "y").y), accuracy(a.model, x, encode_features(d, "y").y));
}

TEST(Training, RejectsDegenerateInput) {
  auto d = toy(6, 50, 0);
  data::Dataset single;
  single.add_column(d.at("a"));
  single.add_column(data::Column::numeric("y", std::vector<double>(50, 1.0)));
  EXPECT_THROW(builtin_train_logreg(single, "y", TrainOptions{}), Error);
  EXPECT_THROW(train_model("resnet", encode_features(d, "y"), TrainOptions{}), Error);
  const auto m = builtin_train_logreg(d, "y", TrainOptions{}).model;
  data::Dataset missing;
  missing.add_column(d.at("a"));
  EXPECT_THROW(encode_for_model(missing, m.feature_names), Error);
}

TEST(Split, SeededAndSized) {
  const auto a = holdout_split(100, 0.2, 9);
  EXPECT_EQ(a.holdout.size(), 20u);
  EXPECT_EQ(a.train.size(), 80u);
  EXPECT_EQ(holdout_split(100, 0.2, 9).holdout, a.holdout);
  EXPECT_NE(holdout_split(100, 0.2, 10).holdout, a.holdout);
}
