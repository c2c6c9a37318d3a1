#include "dfs/error.hpp"
#include "dfs/synthesis.hpp"

#include "../support/fixtures.hpp"
#include "../support/logging_dataset.hpp"
#include "../support/small_config.hpp"
#include "../support/temp_dir.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace dfs;

namespace {

struct Models {
  FeatureDataset data;
  AfgModel afg;
  SfgModel sfg;
};

const Models& models() {
  static const Models m = [] {
    Models out{tiny_benchmark(3), {}, {}};
    const TrainConfig c = small_train_config(10, 10);
    out.afg = train_afg(out.data, c.afg);
    out.sfg = train_sfg(out.data, out.afg, c.sfg);
    return out;
  }();
  return m;
}

SynthesisPlan small_plan(std::uint64_t seed = 1) {
  SynthesisPlan p;
  p.per_seen_class_count = 20;
  p.per_unseen_class_count = 30;
  p.seed = seed;
  return p;
}

SynthesizedSet make_set(std::initializer_list<std::initializer_list<double>> rows,
                        std::vector<int> labels, Provenance p) {
  SynthesizedSet s;
  s.features.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) s.features(i, j++) = v;
    ++i;
  }
  s.labels = std::move(labels);
  s.provenance.assign(s.labels.size(), p);
  return s;
}

std::multiset<int> label_multiset(const SynthesizedSet& s) {
  return {s.labels.begin(), s.labels.end()};
}

}  // namespace

TEST_SUITE("seen") {
  TEST_CASE("one class with one sample gives exactly one posterior row") {
    FeatureDataset d;
    d.visual_features = RowMatrix::Zero(2, 3);
    d.visual_features(0, 0) = 1.0;
    d.labels = {0, 1};
    d.splits = {Split::kTrain, Split::kTest};
    d.semantic_features = RowMatrix::Identity(2, 2);
    d.seen = {0};
    d.unseen = {1};
    d.validate();
    AfgConfig c = small_train_config(1).afg;
    const AfgModel afg = train_afg(d, c);
    SynthesisPlan p;
    p.per_seen_class_count = 1;
    const SynthesizedSet s = synthesize_seen(afg, d, p);
    REQUIRE(s.size() == 1);
    CHECK(s.dim() == 4);
    CHECK(s.labels[0] == 0);
    CHECK(s.provenance[0] == Provenance::kSeenPosterior);
  }

  TEST_CASE("counts, labels and reproducibility") {
    const Models& m = models();
    const SynthesizedSet a = synthesize_seen(m.afg, m.data, small_plan());
    CHECK(a.size() == 60);
    for (int c : m.data.seen_classes())
      CHECK(std::count(a.labels.begin(), a.labels.end(), c) == 20);
    CHECK(std::is_sorted(a.labels.begin(), a.labels.end()));
    const SynthesizedSet b = synthesize_seen(m.afg, m.data, small_plan());
    CHECK(a.features == b.features);
    CHECK_FALSE(synthesize_seen(m.afg, m.data, small_plan(2)).features == a.features);
  }

  TEST_CASE("near-zero variance collapses rows onto encoded means") {
    AfgModel afg = models().afg;
    MlpNet& e = afg.mutable_nets().e_vis;
    DenseLayer& last = e.layer(e.num_layers() - 1);
    last.weight.bottomRows(4).setZero();
    last.bias.tail(4).setConstant(-20.0);
    const FeatureDataset& data = models().data;
    const SynthesizedSet s = synthesize_seen(afg, data, small_plan());
    std::map<int, std::vector<Vector>> means;
    for (std::size_t i : train_indices(data))
      means[data.label(i)].push_back(afg.encode_visual(data.visual(i)).mean);
    // sigma = exp(-10) ~ 4.5e-5, so 1e-4 is about two sigma per coordinate: the
    // row-average deviation is held to 1e-4 and each entry to eight sigma.
    const double sigma = std::exp(-10.0);
    for (std::size_t r = 0; r < s.size(); ++r) {
      const Vector row = s.features.row(static_cast<Eigen::Index>(r)).transpose();
      double best_mean = 1e300, best_max = 1e300;
      for (const Vector& mu : means[s.labels[r]]) {
        const Vector dev = (row - mu).cwiseAbs();
        if (dev.mean() < best_mean) {
          best_mean = dev.mean();
          best_max = dev.maxCoeff();
        }
      }
      CHECK(best_mean <= 1e-4);
      CHECK(best_max <= 8.0 * sigma);
    }
  }

  TEST_CASE("encoded-mean source emits each TRAIN mean once") {
    const Models& m = models();
    SynthesisPlan p = small_plan();
    p.seen_source = SeenSource::kEncodedMean;
    const SynthesizedSet s = synthesize_seen(m.afg, m.data, p);
    CHECK(s.size() == train_indices(m.data).size());
  }

  TEST_CASE("never reads unseen or TEST features") {
    const LoggingDataset log(models().data);
    synthesize_seen(models().afg, log, small_plan());
    CHECK(log.visual_read_count() > 0);
    CHECK(log.unseen_visual_reads() == 0);
    CHECK(log.test_visual_reads() == 0);
  }
}

TEST_SUITE("unseen") {
  TEST_CASE("reads no visual feature at all") {
    const LoggingDataset log(models().data);
    synthesize_unseen(models().afg, models().sfg, log, small_plan());
    synthesize_unseen_baseline(models().afg, log, small_plan());
    CHECK(log.visual_read_count() == 0);
  }

  TEST_CASE("constant decoder emits its bias on every row") {
    SfgModel sfg = models().sfg;
    MlpNet& d3 = sfg.mutable_nets().d3;
    DenseLayer& last = d3.layer(d3.num_layers() - 1);
    last.weight.setZero();
    last.bias << 0.5, -1.0, 2.0, 0.25;
    const SynthesizedSet s = synthesize_unseen(models().afg, sfg, models().data, small_plan());
    REQUIRE(s.size() == 60);
    for (Eigen::Index r = 0; r < s.features.rows(); ++r)
      CHECK(s.features.row(r).transpose() == last.bias);
    for (Provenance p : s.provenance) CHECK(p == Provenance::kUnseenDecoded);
  }

  TEST_CASE("labels, reproducibility and provenance") {
    const Models& m = models();
    const SynthesizedSet a = synthesize_unseen(m.afg, m.sfg, m.data, small_plan());
    const SynthesizedSet b = synthesize_unseen(m.afg, m.sfg, m.data, small_plan());
    CHECK(a.features == b.features);
    for (int c : m.data.unseen_classes())
      CHECK(std::count(a.labels.begin(), a.labels.end(), c) == 30);
    const SynthesizedSet base = synthesize_unseen_baseline(m.afg, m.data, small_plan());
    CHECK(base.size() == 60);
    for (Provenance p : base.provenance) CHECK(p == Provenance::kUnseenSemanticPosterior);
    CHECK(base.features == synthesize_unseen_baseline(m.afg, m.data, small_plan()).features);
  }

  TEST_CASE("baseline rows average to the class mean") {
    const Models& m = models();
    SynthesisPlan p = small_plan();
    p.per_unseen_class_count = 4000;
    const SynthesizedSet s = synthesize_unseen_baseline(m.afg, m.data, p);
    for (int c : m.data.unseen_classes()) {
      const GaussianParams g = m.afg.encode_semantic(m.data.semantic(c));
      Vector sum = Vector::Zero(4);
      for (std::size_t r = 0; r < s.size(); ++r)
        if (s.labels[r] == c) sum += s.features.row(static_cast<Eigen::Index>(r)).transpose();
      const Vector avg = sum / 4000.0;
      for (Eigen::Index k = 0; k < 4; ++k)
        CHECK(std::abs(avg(k) - g.mean(k)) < 5.0 * g.std_dev()(k) / std::sqrt(4000.0));
    }
  }

  TEST_CASE("mismatched models are rejected") {
    SfgConfig c = small_train_config().sfg;
    AfgConfig other = small_train_config().afg;
    other.aligned_dim = 3;
    const AfgModel afg3 = train_afg(models().data, [&] { auto o = other; o.epochs = 0; return o; }());
    CHECK_THROWS_AS(synthesize_unseen(afg3, models().sfg, models().data, small_plan()), Error);
  }
}

TEST_SUITE("diversity") {
  TEST_CASE("identical rows score zero") {
    const SynthesizedSet s = make_set({{1, 2}, {1, 2}, {1, 2}}, {0, 0, 0}, Provenance::kUnseenDecoded);
    CHECK(diversity_score(s).at(0) == 0.0);
  }

  TEST_CASE("two-row hand example") {
    const SynthesizedSet s = make_set({{0, 0}, {2, 0}}, {5, 5}, Provenance::kUnseenDecoded);
    CHECK(diversity_score(s).at(5) == doctest::Approx(2.0).epsilon(1e-15));
  }

  TEST_CASE("invariant under row permutation") {
    RngStream rng(4);
    SynthesizedSet s;
    s.features = rng.normal_matrix(12, 3);
    s.labels = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    s.provenance.assign(12, Provenance::kUnseenDecoded);
    const auto ref = diversity_score(s);
    SynthesizedSet p = s;
    for (int i = 0; i < 12; ++i) {
      p.features.row(i) = s.features.row(11 - i);
      p.labels[i] = s.labels[11 - i];
    }
    const auto perm = diversity_score(p);
    for (const auto& [c, v] : ref) CHECK(perm.at(c) == doctest::Approx(v).epsilon(1e-12));
    CHECK(mean_score(ref) == doctest::Approx((ref.at(0) + ref.at(1)) / 2.0));
  }

  TEST_CASE("a class with one row is rejected") {
    const SynthesizedSet s = make_set({{0, 0}, {2, 0}, {1, 1}}, {0, 0, 1}, Provenance::kUnseenDecoded);
    CHECK_THROWS_AS(diversity_score(s), Error);
  }
}

TEST_SUITE("trainset") {
  TEST_CASE("seen block first then unseen, each class-ascending") {
    const SynthesizedSet seen =
        make_set({{1, 0}, {2, 0}, {3, 0}}, {4, 1, 4}, Provenance::kSeenPosterior);
    const SynthesizedSet unseen = make_set({{5, 0}, {6, 0}}, {3, 0}, Provenance::kUnseenDecoded);
    const SynthesizedSet t = build_classifier_trainset(seen, unseen);
    REQUIRE(t.size() == 5);
    CHECK(t.labels == std::vector<int>{1, 4, 4, 0, 3});
    CHECK(t.features.col(0).transpose() == (Vector(5) << 2, 1, 3, 6, 5).finished().transpose());
    CHECK(label_multiset(t) == [&] {
      auto m = label_multiset(seen);
      for (int l : unseen.labels) m.insert(l);
      return m;
    }());
    CHECK(t.provenance[3] == Provenance::kUnseenDecoded);
  }

  TEST_CASE("empty unseen set returns the seen set") {
    const SynthesizedSet seen = make_set({{1, 0}, {2, 0}}, {0, 1}, Provenance::kSeenPosterior);
    SynthesizedSet empty;
    empty.features.resize(0, 2);
    const SynthesizedSet t = build_classifier_trainset(seen, empty);
    CHECK(t.features == seen.features);
    CHECK(t.labels == seen.labels);
  }

  TEST_CASE("width mismatch is rejected") {
    const SynthesizedSet a = make_set({{1, 0}}, {0}, Provenance::kSeenPosterior);
    const SynthesizedSet b = make_set({{1, 0, 0}}, {1}, Provenance::kUnseenDecoded);
    CHECK_THROWS_AS(build_classifier_trainset(a, b), Error);
  }
}

TEST_CASE("save and load round-trip") {
  const Models& m = models();
  const SynthesizedSet s = build_classifier_trainset(
      synthesize_seen(m.afg, m.data, small_plan()),
      synthesize_unseen(m.afg, m.sfg, m.data, small_plan()));
  TempDir dir;
  save_synthesized(s, dir / "synth.manifest");
  const SynthesizedSet back = load_synthesized(dir / "synth.manifest");
  CHECK(back.labels == s.labels);
  CHECK(back.provenance == s.provenance);
  // Features are stored as float32.
  CHECK(back.features == s.features.cast<float>().cast<double>());
}

TEST_CASE("plan validation") {
  SynthesisPlan p;
  p.per_unseen_class_count = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}
