#include "dfs/classifier.hpp"
#include "dfs/error.hpp"

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "../support/small_config.hpp"
#include "../support/temp_dir.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace dfs;

namespace {

SynthesizedSet two_blobs(std::uint64_t seed, std::size_t per_class) {
  RngStream rng(seed);
  SynthesizedSet s;
  const Eigen::Index n = static_cast<Eigen::Index>(2 * per_class);
  s.features = rng.normal_matrix(n, 8);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = i < n / 2 ? 0 : 1;
    // Means at +-5 along the first axis, 5 sigma from the boundary.
    s.features(i, 0) += label == 0 ? -5.0 : 5.0;
    s.labels.push_back(label);
  }
  s.provenance.assign(s.labels.size(), Provenance::kSeenPosterior);
  return s;
}

// Classifier whose argmax is the nearest of the given class centres.
LinearClassifier nearest_centre(const std::map<int, Vector>& centres) {
  const std::size_t dim = static_cast<std::size_t>(centres.begin()->second.size());
  MlpNet net({dim, centres.size()});
  std::vector<int> ids;
  Eigen::Index k = 0;
  for (const auto& [c, mu] : centres) {
    net.layer(0).weight.row(k) = mu.transpose();
    net.layer(0).bias(k) = -0.5 * mu.squaredNorm();
    ids.push_back(c);
    ++k;
  }
  return {std::move(net), ids};
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("separable blobs are classified perfectly") {
    const SynthesizedSet s = two_blobs(1, 100);
    for (std::size_t i = 0; i < s.size(); ++i)
      REQUIRE((s.features(static_cast<Eigen::Index>(i), 0) > 0.0) == (s.labels[i] == 1));
    ClassifierConfig c;
    c.epochs = 200;
    const LinearClassifier clf = train_linear_classifier(s, c);
    const ClassAccuracy acc = per_class_accuracy(clf, s.features, s.labels, {0, 1});
    CHECK(acc.mean == 1.0);
  }

  TEST_CASE("zero epochs returns the initialization and seeds repeat") {
    const SynthesizedSet s = two_blobs(2, 10);
    ClassifierConfig c;
    c.epochs = 0;
    const LinearClassifier a = train_linear_classifier(s, c);
    CHECK(a.net() == train_linear_classifier(s, c).net());
    RngStream rng = RngStream::derive(c.seed, 30);
    MlpNet init = MlpNet::uniform_init({8, 2}, rng);
    init.round_parameters_to_float();
    CHECK(a.net() == init);
    c.epochs = 5;
    CHECK(train_linear_classifier(s, c).net() == train_linear_classifier(s, c).net());
  }

  TEST_CASE("a single class is rejected") {
    SynthesizedSet s = two_blobs(3, 5);
    std::fill(s.labels.begin(), s.labels.end(), 0);
    CHECK_THROWS_AS(train_linear_classifier(s, {}), Error);
  }

  TEST_CASE("argmax ties go to the lowest class id") {
    MlpNet net({2, 3});
    const LinearClassifier clf(net, {2, 5, 9});
    CHECK(clf.predict(Matrix::Ones(3, 2)) == std::vector<int>{2, 2, 2});
  }

  TEST_CASE("class ids must be ascending and unique") {
    CHECK_THROWS_AS(LinearClassifier(MlpNet({2, 2}), {3, 1}), Error);
    CHECK_THROWS_AS(LinearClassifier(MlpNet({2, 2}), {1, 1}), Error);
    CHECK_THROWS_AS(LinearClassifier(MlpNet({2, 3}), {0, 1}), Error);
  }
}

TEST_SUITE("per-class accuracy") {
  TEST_CASE("perfect predictor") {
    const std::vector<int> t{0, 1, 1, 2};
    CHECK(per_class_accuracy(t, t, {0, 1, 2}).mean == 1.0);
  }

  TEST_CASE("unequal class sizes do not weight the mean") {
    // class 0: 1 of 2 correct; class 1: 6 of 6 correct
    const std::vector<int> truth{0, 0, 1, 1, 1, 1, 1, 1};
    const std::vector<int> pred{0, 1, 1, 1, 1, 1, 1, 1};
    const ClassAccuracy a = per_class_accuracy(pred, truth, {0, 1});
    CHECK(a.mean == 0.75);
    CHECK(a.per_class.at(0) == 0.5);
    CHECK(a.per_class.at(1) == 1.0);
    CHECK(a.mean == doctest::Approx(oracle::per_class_mean(pred, truth, {0, 1})).epsilon(1e-15));
  }

  TEST_CASE("constant predictor") {
    const std::vector<int> truth{0, 1, 2, 2};
    const ClassAccuracy a = per_class_accuracy({2, 2, 2, 2}, truth, {0, 1, 2});
    CHECK(a.per_class.at(2) == 1.0);
    CHECK(a.per_class.at(0) == 0.0);
    CHECK(a.per_class.at(1) == 0.0);
  }

  TEST_CASE("k-fold duplication of one class leaves the mean unchanged") {
    RngStream rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> truth, pred;
      for (int i = 0; i < 40; ++i) {
        truth.push_back(static_cast<int>(rng.index(4)));
        pred.push_back(static_cast<int>(rng.index(4)));
      }
      for (int c = 0; c < 4; ++c) {
        truth.push_back(c);
        pred.push_back(c);
      }
      const double base = per_class_accuracy(pred, truth, {0, 1, 2, 3}).mean;
      const int dup = static_cast<int>(rng.index(4));
      const std::size_t k = 2 + rng.index(5);
      std::vector<int> t2 = truth, p2 = pred;
      for (std::size_t rep = 1; rep < k; ++rep)
        for (std::size_t i = 0; i < truth.size(); ++i)
          if (truth[i] == dup) {
            t2.push_back(truth[i]);
            p2.push_back(pred[i]);
          }
      CHECK(std::abs(per_class_accuracy(p2, t2, {0, 1, 2, 3}).mean - base) <= 1e-12);
    }
  }

  TEST_CASE("a class with no samples is rejected") {
    CHECK_THROWS_AS(per_class_accuracy({0}, {0}, {0, 1}), Error);
  }
}

TEST_SUITE("harmonic mean") {
  TEST_CASE("table inputs") {
    // 2 * 0.75 * 0.558 / 1.308; the printed table value is 0.639.
    CHECK(harmonic_mean(0.750, 0.558) == doctest::Approx(0.837 / 1.308).epsilon(1e-14));
  }

  TEST_CASE("identities") {
    for (double x : {0.0, 0.1, 0.5, 1.0}) {
      CHECK(harmonic_mean(x, x) == doctest::Approx(x).epsilon(1e-15));
      CHECK(harmonic_mean(x, 0.0) == 0.0);
    }
  }

  TEST_CASE("bounded by its arguments and symmetric") {
    RngStream rng(6);
    for (int i = 0; i < 1000; ++i) {
      const double a = rng.uniform(), b = rng.uniform();
      const double h = harmonic_mean(a, b);
      CHECK(h >= std::min(a, b) - 1e-15);
      CHECK(h <= std::max(a, b) + 1e-15);
      CHECK(h == harmonic_mean(b, a));
    }
  }

  TEST_CASE("out-of-range inputs are rejected") {
    CHECK_THROWS_AS(harmonic_mean(1.1, 0.5), Error);
    CHECK_THROWS_AS(harmonic_mean(0.5, -0.1), Error);
    CHECK_THROWS_AS(harmonic_mean(std::nan(""), 0.5), Error);
  }
}

TEST_SUITE("evaluation") {
  TEST_CASE("oracle classifier scores 1 everywhere") {
    const FeatureDataset data = tiny_benchmark(7);
    const AfgModel afg = train_afg(data, small_train_config(2).afg);
    // Nearest-centre on the class means of the test posterior means, with
    // well-separated centres replaced by one-hot markers.
    std::vector<int> all = data.seen;
    all.insert(all.end(), data.unseen.begin(), data.unseen.end());
    std::sort(all.begin(), all.end());
    const auto test = test_indices(data);
    Matrix feats(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(all.size()));
    std::vector<int> labels;
    std::map<int, Vector> centres;
    for (std::size_t k = 0; k < all.size(); ++k) {
      Vector e = Vector::Zero(static_cast<Eigen::Index>(all.size()));
      e(static_cast<Eigen::Index>(k)) = 1.0;
      centres[all[k]] = e;
    }
    for (std::size_t r = 0; r < test.size(); ++r) {
      labels.push_back(data.label(test[r]));
      feats.row(static_cast<Eigen::Index>(r)) = centres[labels.back()].transpose();
    }
    const LinearClassifier clf = nearest_centre(centres);
    const EvalReport rep = assemble_report(clf.predict(feats), labels, data.seen, data.unseen);
    CHECK(rep.acc_s == 1.0);
    CHECK(rep.acc_u == 1.0);
    CHECK(rep.acc_h == 1.0);
  }

  TEST_CASE("a seen-only predictor gives zero unseen and harmonic accuracy") {
    const FeatureDataset data = tiny_benchmark(8);
    const TrainConfig tc = small_train_config(5);
    const AfgModel afg = train_afg(data, tc.afg);
    MlpNet net({4, data.num_classes()});
    // Unseen rows get a large negative bias so they never win.
    std::vector<int> ids(data.num_classes());
    for (std::size_t c = 0; c < ids.size(); ++c) {
      ids[c] = static_cast<int>(c);
      if (is_unseen(data, ids[c])) net.layer(0).bias(static_cast<Eigen::Index>(c)) = -1e6;
    }
    const EvalReport rep = evaluate_gzsl(LinearClassifier(net, ids), afg, data);
    CHECK(rep.acc_u == 0.0);
    CHECK(rep.acc_h == 0.0);
    CHECK(rep.acc_s > 0.0);
  }

  TEST_CASE("evaluation is pure and uses posterior means") {
    const FeatureDataset data = tiny_benchmark(9);
    const AfgModel afg = train_afg(data, small_train_config(5).afg);
    const LinearClassifier clf = nearest_centre([&] {
      std::map<int, Vector> m;
      for (std::size_t c = 0; c < data.num_classes(); ++c)
        m[static_cast<int>(c)] = afg.encode_semantic(data.semantic(static_cast<int>(c))).mean;
      return m;
    }());
    const EvalReport a = evaluate_gzsl(clf, afg, data);
    const EvalReport b = evaluate_gzsl(clf, afg, data);
    CHECK(a.acc_h == b.acc_h);
    CHECK(a.per_class_accuracy == b.per_class_accuracy);
    const auto test = test_indices(data);
    std::vector<int> labels;
    Matrix mu(static_cast<Eigen::Index>(test.size()), 4);
    for (std::size_t r = 0; r < test.size(); ++r) {
      labels.push_back(data.label(test[r]));
      mu.row(static_cast<Eigen::Index>(r)) = afg.encode_visual(data.visual(test[r])).mean.transpose();
    }
    const EvalReport manual = assemble_report(clf.predict(mu), labels, data.seen, data.unseen);
    CHECK(manual.acc_s == a.acc_s);
    CHECK(manual.acc_u == a.acc_u);
    CHECK(a.acc_h == doctest::Approx(harmonic_mean(a.acc_s, a.acc_u)).epsilon(1e-15));
  }

  TEST_CASE("labels outside the classifier are rejected") {
    const FeatureDataset data = tiny_benchmark(10);
    const AfgModel afg = train_afg(data, small_train_config(1).afg);
    const LinearClassifier clf(MlpNet({4, 2}), {0, 1});
    CHECK_THROWS_AS(evaluate_gzsl(clf, afg, data), Error);
  }

  TEST_CASE("report files round-trip the headline numbers") {
    EvalReport r = assemble_report({0, 1, 1, 2}, {0, 1, 2, 2}, {0, 1}, {2});
    r.generator = "dfs";
    r.config_fingerprint = "abc123";
    r.diversity = {{2, 1.5}};
    TempDir dir;
    write_report(r, dir / "r.txt", dir / "r.csv");
    const auto kv = read_report_values(dir / "r.txt");
    CHECK(std::stod(kv.at("acc_s")) == doctest::Approx(r.acc_s).epsilon(1e-9));
    CHECK(std::stod(kv.at("acc_u")) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::stod(kv.at("acc_h")) == doctest::Approx(r.acc_h).epsilon(1e-9));
    CHECK(kv.at("generator") == "dfs");
    CHECK(kv.at("config_fingerprint") == "abc123");
    const std::string csv = read_file(dir / "r.csv");
    CHECK(csv.rfind("class_id,group,test_samples,accuracy,diversity\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  }
}
