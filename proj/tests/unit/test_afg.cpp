#include "dfs/afg.hpp"
#include "dfs/error.hpp"

#include "../support/fixtures.hpp"
#include "../support/logging_dataset.hpp"
#include "../support/small_config.hpp"

#include <doctest.h>

#include <cmath>

using namespace dfs;

namespace {

double mean_pair_da(const AfgModel& m, const FeatureDataset& data) {
  double sum = 0.0;
  const auto idx = train_indices(data);
  for (std::size_t i : idx)
    sum += da_loss(m.encode_semantic(data.semantic(data.label(i))), m.encode_visual(data.visual(i)));
  return sum / static_cast<double>(idx.size());
}

}  // namespace

TEST_CASE("zero epochs returns the initialization bitwise") {
  const FeatureDataset data = tiny_benchmark(1);
  AfgConfig c = small_train_config().afg;
  c.epochs = 0;
  const AfgModel trained = train_afg(data, c);
  const AfgModel init = init_afg(data.semantic_dim(), data.visual_dim(), c);
  CHECK(trained.nets() == init.nets());
  CHECK(trained.parameter_hash() == init.parameter_hash());
  CHECK(trained.history().empty());
  CHECK(trained.trained());
}

TEST_CASE("training lowers the total loss and the paired alignment distance") {
  const FeatureDataset data = tiny_benchmark(2);
  const AfgConfig c = small_train_config(60).afg;
  const AfgModel init = init_afg(data.semantic_dim(), data.visual_dim(), c);
  const AfgModel m = train_afg(data, c);
  REQUIRE(m.history().size() == 60);
  CHECK(m.history().back().total < m.history().front().total);
  CHECK(mean_pair_da(m, data) < mean_pair_da(init, data));
}

TEST_CASE("same seed and config give identical parameters") {
  const FeatureDataset data = tiny_benchmark(3);
  const AfgConfig c = small_train_config(5).afg;
  const AfgModel a = train_afg(data, c);
  const AfgModel b = train_afg(data, c);
  CHECK(a.nets() == b.nets());
  AfgConfig other = c;
  other.seed = c.seed + 1;
  CHECK_FALSE(train_afg(data, other).nets() == a.nets());
}

TEST_CASE("history recomposes from its components") {
  const FeatureDataset data = tiny_benchmark(4);
  AfgConfig c = small_train_config(8).afg;
  c.weights.eta.warmup = WarmUp{0, 4};
  const AfgModel m = train_afg(data, c);
  for (const LossBreakdown& b : m.history()) {
    const double sum = b.weighted_sum();
    CHECK(std::abs(b.total - sum) <= 1e-6 * std::max(1.0, std::abs(sum)));
  }
  CHECK(m.history()[0].weight("da") == 0.0);
  CHECK(m.history()[7].weight("da") == doctest::Approx(c.weights.eta.value));
}

TEST_CASE("encoders report aligned_dim for both halves") {
  const FeatureDataset data = tiny_benchmark(5);
  const AfgConfig c = small_train_config().afg;
  const AfgModel m = init_afg(data.semantic_dim(), data.visual_dim(), c);
  const GaussianParams s = m.encode_semantic(data.semantic(0));
  const GaussianParams v = m.encode_visual(data.visual(0));
  CHECK(s.mean.size() == 4);
  CHECK(s.log_var.size() == 4);
  CHECK(v.mean.size() == 4);
  CHECK(v.log_var.size() == 4);
  CHECK_THROWS_AS(m.encode_semantic(Vector(Vector::Zero(3))), Error);
  CHECK_THROWS_AS(m.encode_visual(Vector(Vector::Zero(3))), Error);
}

TEST_CASE("zero-weight encoders return the bias slice for any input") {
  const FeatureDataset data = tiny_benchmark(6);
  AfgModel m = init_afg(data.semantic_dim(), data.visual_dim(), small_train_config().afg);
  for (MlpNet* net : {&m.mutable_nets().e_sem, &m.mutable_nets().e_vis}) {
    for (std::size_t l = 0; l < net->num_layers(); ++l) net->layer(l).weight.setZero();
  }
  const Vector b_sem = m.nets().e_sem.layer(m.nets().e_sem.num_layers() - 1).bias;
  const Vector b_vis = m.nets().e_vis.layer(m.nets().e_vis.num_layers() - 1).bias;
  RngStream rng(7);
  for (int i = 0; i < 5; ++i) {
    CHECK(m.encode_semantic(rng.normal_vector(5)).mean == b_sem.head(4));
    CHECK(m.encode_visual(rng.normal_vector(8)).mean == b_vis.head(4));
  }
}

TEST_CASE("distinct class embeddings map to distinct means after training") {
  const FeatureDataset data = tiny_benchmark(7);
  const AfgModel m = train_afg(data, small_train_config(30).afg);
  for (std::size_t i = 0; i < data.num_classes(); ++i)
    for (std::size_t j = i + 1; j < data.num_classes(); ++j) {
      const Vector a = m.encode_semantic(data.semantic(static_cast<int>(i))).mean;
      const Vector b = m.encode_semantic(data.semantic(static_cast<int>(j))).mean;
      CHECK((a - b).norm() > 0.0);
    }
}

TEST_CASE("training reads only seen TRAIN visual features") {
  const FeatureDataset data = tiny_benchmark(8);
  const LoggingDataset log(data);
  train_afg(log, small_train_config(3).afg);
  CHECK(log.visual_read_count() > 0);
  CHECK(log.unseen_visual_reads() == 0);
  CHECK(log.test_visual_reads() == 0);
}

TEST_CASE("configuration errors") {
  const FeatureDataset data = tiny_benchmark(9);
  AfgConfig c = small_train_config().afg;
  c.aligned_dim = 0;
  CHECK_THROWS_AS(train_afg(data, c), Error);
  c = small_train_config().afg;
  c.epochs = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  FeatureDataset no_seen = data;
  for (std::size_t i = 0; i < no_seen.splits.size(); ++i) no_seen.splits[i] = Split::kTest;
  no_seen.unseen.insert(no_seen.unseen.end(), no_seen.seen.begin(), no_seen.seen.end());
  no_seen.seen.clear();
  CHECK_THROWS_AS(train_afg(no_seen, small_train_config().afg), Error);
}

TEST_CASE("diverging training aborts with a numeric error naming the epoch") {
  const FeatureDataset data = tiny_benchmark(10);
  AfgConfig c = small_train_config(3).afg;
  c.optimizer.learning_rate = 1e300;
  try {
    train_afg(data, c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}
