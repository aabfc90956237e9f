#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "confreg/model.hpp"
#include "confreg/prob.hpp"
#include "confreg/rng.hpp"
#include "confreg/train.hpp"
#include "support/checks.hpp"

using namespace confreg;

namespace {

// Two Gaussian blobs far apart in 2-D.
TrainingSet blobs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  TrainingSet t;
  t.num_classes = 2;
  t.x = FeatureTable(2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = i % 2;
    const double cx = y == 0 ? -2.0 : 2.0;
    const std::vector<double> row{cx + 0.5 * rng.normal(), cx + 0.5 * rng.normal()};
    t.x.push_back(row);
    t.labels.push_back(y);
    t.ids.push_back("b" + std::to_string(i));
    t.subsets.emplace_back();
  }
  return t;
}

// Straight-line logistic-regression SGD with the same shuffle stream, used as
// an oracle for train() on a model without hidden layers.
std::vector<double> reference_logistic(const Model& init, const TrainingSet& data, const TrainSchedule& s) {
  const std::size_t d = data.x.dim(), k = data.num_classes;
  std::vector<double> w(init.params().begin(), init.params().begin() + d * k);
  std::vector<double> b(init.params().begin() + d * k, init.params().end());
  Rng rng(s.seed);
  for (std::size_t e = 0; e < s.epochs; ++e) {
    const auto order = rng.permutation(data.size());
    for (std::size_t start = 0; start < order.size(); start += s.batch_size) {
      const std::size_t end = std::min(order.size(), start + s.batch_size);
      const double m = static_cast<double>(end - start);
      std::vector<double> gw(d * k, 0.0), gb(k, 0.0);
      for (std::size_t t = start; t < end; ++t) {
        const std::size_t i = order[t];
        const auto x = data.x.row(i);
        std::vector<double> z(k);
        for (std::size_t j = 0; j < k; ++j) {
          z[j] = b[j];
          for (std::size_t a = 0; a < d; ++a) z[j] += x[a] * w[a * k + j];
        }
        double zmax = z[0];
        for (double v : z) zmax = std::max(zmax, v);
        double sum = 0.0;
        for (double& v : z) sum += (v = std::exp(v - zmax));
        for (std::size_t j = 0; j < k; ++j) {
          const double err = z[j] / sum - (j == data.labels[i] ? 1.0 : 0.0);
          gb[j] += err / m;
          for (std::size_t a = 0; a < d; ++a) gw[a * k + j] += x[a] * err / m;
        }
      }
      for (std::size_t q = 0; q < w.size(); ++q) w[q] -= s.learning_rate * gw[q];
      for (std::size_t q = 0; q < b.size(); ++q) b[q] -= s.learning_rate * gb[q];
    }
  }
  w.insert(w.end(), b.begin(), b.end());
  return w;
}

}  // namespace

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, PermutationIsAPermutation) {
  Rng rng(3);
  auto p = rng.permutation(50);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(p[i], i);
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(ProbDist, RejectsInvalid) {
  EXPECT_THROW(ProbDist({1.0}), InputError);
  EXPECT_THROW(ProbDist({0.6, 0.6}), InputError);
  EXPECT_THROW(ProbDist({-0.1, 1.1}), InputError);
  EXPECT_NO_THROW(ProbDist({0.25, 0.75}));
}

TEST(Softmax, Examples) {
  const std::vector<double> z0{0.0, 0.0};
  const ProbDist p0 = softmax(z0);
  EXPECT_DOUBLE_EQ(p0[0], 0.5);
  EXPECT_DOUBLE_EQ(p0[1], 0.5);

  const std::vector<double> z1{std::log(2.0), 0.0};
  const ProbDist p1 = softmax(z1);
  EXPECT_NEAR(p1[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p1[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, ShiftInvariant) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const double a = rng.normal() * 5, b = rng.normal() * 5, c = rng.normal() * 100;
    const std::vector<double> base{a, b}, shifted{a + c, b + c};
    const ProbDist p = softmax(base), q = softmax(shifted);
    EXPECT_NEAR(p[0], q[0], 1e-12);
    EXPECT_NEAR(p[1], q[1], 1e-12);
  }
}

TEST(Softmax, ValidForLargeLogits) {
  Rng rng(6);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> z(2 + rng.below(6));
    for (auto& v : z) v = rng.uniform(-700.0, 700.0);
    EXPECT_NO_THROW({
      const ProbDist p = softmax(z);
      EXPECT_EQ(p.argmax(), argmax(z));
    });
  }
}

TEST(Softmax, NonFiniteThrows) {
  const std::vector<double> nan{0.0, std::numeric_limits<double>::quiet_NaN()};
  const std::vector<double> inf{std::numeric_limits<double>::infinity(), 0.0};
  EXPECT_THROW(softmax(nan), NumericError);
  EXPECT_THROW(softmax(inf), NumericError);
}

TEST(Argmax, TiesGoToLowestIndex) {
  const std::vector<double> v{0.2, 0.4, 0.4};
  EXPECT_EQ(argmax(v), 1u);
}

TEST(InitModel, DeterministicBytes) {
  const Layout l = Layout::make(2, {}, 2);
  const Model a = Model::init(l, 7), b = Model::init(l, 7);
  ASSERT_EQ(a.params().size(), b.params().size());
  EXPECT_EQ(std::memcmp(a.params().data(), b.params().data(), a.params().size() * sizeof(double)), 0);
  EXPECT_FALSE(Model::init(l, 8) == a);
}

TEST(InitModel, SingleClassIsConfigError) {
  EXPECT_THROW(Model::init(Layout::make(2, {}, 1), 1), ConfigError);
  EXPECT_THROW(Model::init(Layout::make(2, {0}, 3), 1), ConfigError);
}

TEST(InitModel, FirstLayerWithinGlorotBound) {
  const Model m = Model::init(Layout::make(4, {8}, 3), 1);
  const double bound = std::sqrt(6.0 / 12.0);
  const std::size_t first_layer = 4 * 8 + 8;
  for (std::size_t i = 0; i < first_layer; ++i) EXPECT_LE(std::abs(m.params()[i]), bound);
  const double bound2 = std::sqrt(6.0 / 11.0);
  for (std::size_t i = first_layer; i < m.params().size(); ++i) EXPECT_LE(std::abs(m.params()[i]), bound2);
}

TEST(Forward, ZeroParamsGiveZeroLogits) {
  const Layout l = Layout::make(3, {4}, 3);
  const Model m(l, 0, std::vector<double>(l.param_count(), 0.0));
  const std::vector<double> x{1.0, -2.0, 0.5};
  for (double z : forward(m, x)) EXPECT_EQ(z, 0.0);
}

TEST(Forward, DimensionMismatch) {
  const Model m = Model::init(Layout::make(3, {}, 2), 1);
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(forward(m, x), InputError);
}

TEST(Forward, IdentityWeights) {
  const Model m(Layout::make(2, {}, 2), 0, {1.0, 0.0, 0.0, 1.0, 0.0, 0.0});
  const std::vector<double> x{3.0, -1.0};
  const auto z = forward(m, x);
  EXPECT_EQ(z[0], 3.0);
  EXPECT_EQ(z[1], -1.0);
}

TEST(Forward, ReluClipsNegatives) {
  // 1 -> 1 (relu) -> 2, hidden pre-activation -1.
  const Model m(Layout::make(1, {1}, 2, Activation::relu), 0, {1.0, -2.0, 1.0, 1.0, 0.5, 0.0});
  const std::vector<double> x{1.0};
  const auto z = forward(m, x);
  EXPECT_EQ(z[0], 0.5);
  EXPECT_EQ(z[1], 0.0);
}

TEST(Checkpoint, RoundTrip) {
  const Model m = Model::init(Layout::make(5, {4, 3}, 3, Activation::relu), 11);
  const Model back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  EXPECT_TRUE(back == m);
}

TEST(Train, SeparableBlobsMatchReferenceTrainer) {
  const TrainingSet data = blobs(200, 1);
  const Model init = Model::init(Layout::make(2, {}, 2), 4);
  const TrainSchedule sched{500, 16, 0.1, 99};
  const TrainResult r = train(init, data, LossSpec::hard(), sched);
  const std::vector<double> ref = reference_logistic(init, data, sched);
  ASSERT_EQ(ref.size(), r.model.params().size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(r.model.params()[i], ref[i], 1e-9);
  EXPECT_GE(classification_accuracy(r.model, data), 0.99);
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const TrainingSet data = blobs(40, 2);
  const Model init = Model::init(Layout::make(2, {3}, 2), 5);
  const TrainResult r = train(init, data, LossSpec::hard(), {5, 8, 0.0, 1});
  EXPECT_TRUE(r.model == init);
  ASSERT_EQ(r.history.epochs.size(), 5u);
  // Shuffled summation order only.
  for (const auto& e : r.history.epochs) EXPECT_NEAR(e.mean_loss, r.history.epochs.front().mean_loss, 1e-12);
}

TEST(Train, SameSeedsSameHistory) {
  const TrainingSet data = blobs(60, 3);
  const Model init = Model::init(Layout::make(2, {4}, 2), 6);
  const TrainSchedule s{10, 7, 0.2, 3};
  const auto a = train(init, data, LossSpec::hard(), s, &data);
  const auto b = train(init, data, LossSpec::hard(), s, &data);
  EXPECT_EQ(a.history.to_json().dump(), b.history.to_json().dump());
  EXPECT_TRUE(a.model == b.model);
}

TEST(Train, SoftSpecWithoutTargetsIsConfigError) {
  const TrainingSet data = blobs(10, 4);
  const Model init = Model::init(Layout::make(2, {}, 2), 1);
  LossSpec spec;
  spec.kind = LossKind::soft_ce;
  EXPECT_THROW(train(init, data, spec, {1, 4, 0.1, 0}), ConfigError);
}

TEST(Train, ScheduleValidation) {
  EXPECT_THROW(TrainSchedule({0, 1, 0.1, 0}).validate(), ConfigError);
  EXPECT_THROW(TrainSchedule({1, 0, 0.1, 0}).validate(), ConfigError);
  EXPECT_THROW(TrainSchedule({1, 1, -0.1, 0}).validate(), ConfigError);
}

TEST(Train, HistoryRecordsBestAndFinal) {
  const TrainingSet data = blobs(60, 5);
  const auto r = train(Model::init(Layout::make(2, {}, 2), 2), data, LossSpec::hard(), {6, 8, 0.1, 1}, &data);
  const auto j = r.history.to_json();
  EXPECT_EQ(j.at("selected"), "final");
  EXPECT_TRUE(j.contains("best_epoch"));
  EXPECT_EQ(j.at("epochs").size(), 6u);
}
