#include "dfs/benchmark.hpp"
#include "dfs/checkpoint.hpp"
#include "dfs/classifier.hpp"
#include "dfs/cli.hpp"
#include "dfs/grad_suite.hpp"
#include "dfs/pipeline.hpp"

#include "../support/temp_dir.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

using namespace dfs;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dfs");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Small benchmark flags shared by train and eval.
const std::vector<std::string> kSmall = {"--synthetic",      "--classes-seen", "3",
                                         "--classes-unseen", "2",              "--visual-dim",
                                         "8",                "--semantic-dim", "5",
                                         "--semantic-rank",  "2",              "--samples-per-class",
                                         "20"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("default flags write a loadable dataset") {
    TempDir dir;
    const Run r = run({"bench", "--out-dir", dir.path().string()});
    REQUIRE(r.code == kExitOk);
    const FeatureDataset d = load_dataset(dir / "benchmark.manifest");
    CHECK(d == generate_synthetic_benchmark({}));
  }

  TEST_CASE("repeated seed gives byte-identical files") {
    TempDir a, b;
    REQUIRE(run({"bench", "--seed", "3", "--out-dir", a.path().string()}).code == kExitOk);
    REQUIRE(run({"bench", "--seed", "3", "--out-dir", b.path().string()}).code == kExitOk);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a.path())) {
      CHECK(read_file(e.path()) == read_file(b / e.path().filename().string()));
      ++files;
    }
    CHECK(files == 7);
  }

  TEST_CASE("no unseen classes is a data error") {
    TempDir dir;
    const Run r = run({"bench", "--classes-unseen", "0", "--out-dir", dir.path().string()});
    CHECK(r.code == kExitDataError);
    CHECK_FALSE(r.err.empty());
  }
}

TEST_SUITE("usage") {
  TEST_CASE("unknown subcommand or flag") {
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"bench", "--no-such-flag"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
  }

  TEST_CASE("train needs exactly one data source") {
    TempDir dir;
    CHECK(run({"train", "--out-dir", dir.path().string()}).code == kExitUsage);
    CHECK(run({"train", "--synthetic", "--dataset", "x.manifest"}).code == kExitUsage);
  }

  TEST_CASE("help exits cleanly") { CHECK(run({"--help"}).code == kExitOk); }

  TEST_CASE("missing dataset file is a data error") {
    TempDir dir;
    CHECK(run({"train", "--dataset", (dir / "none.manifest").string(), "--out-dir",
               dir.path().string()})
              .code == kExitDataError);
  }
}

TEST_SUITE("train") {
  TEST_CASE("zero epochs stores the initialization") {
    TempDir dir;
    REQUIRE(run(with({"train", "--epochs-afg", "0", "--epochs-sfg", "0", "--seed", "4",
                      "--out-dir", dir.path().string()},
                     kSmall))
                .code == kExitOk);
    const Checkpoint cp = load_checkpoint(dir / "checkpoint.manifest");
    TrainConfig tc = synthetic_preset();
    apply_seed(tc, 4);
    const AfgModel afg = init_afg(5, 8, tc.afg);
    CHECK(cp.afg.nets() == afg.nets());
    CHECK(cp.sfg.nets() == init_sfg(afg, tc.sfg).nets());
    CHECK(count_lines(read_file(dir / "loss_history.csv")) == 1);
  }

  TEST_CASE("loss history has one row per epoch per stage") {
    TempDir dir;
    REQUIRE(run(with({"train", "--epochs-afg", "7", "--epochs-sfg", "5", "--out-dir",
                      dir.path().string()},
                     kSmall))
                .code == kExitOk);
    const std::string csv = read_file(dir / "loss_history.csv");
    CHECK(count_lines(csv) == 1 + 7 + 5);
    CHECK(csv.rfind("stage,epoch,total,", 0) == 0);
    CHECK(csv.find("\nsfg,4,") != std::string::npos);
  }

  TEST_CASE("reruns with the same seed are byte-identical") {
    TempDir a, b;
    const auto args = with({"train", "--epochs-afg", "3", "--epochs-sfg", "3", "--seed", "2"}, kSmall);
    REQUIRE(run(with(args, {"--out-dir", a.path().string()})).code == kExitOk);
    REQUIRE(run(with(args, {"--out-dir", b.path().string()})).code == kExitOk);
    for (const auto& e : fs::directory_iterator(a.path()))
      CHECK(read_file(e.path()) == read_file(b / e.path().filename().string()));
  }

  TEST_CASE("a diverging run is a numeric failure") {
    TempDir dir;
    CHECK(run(with({"train", "--epochs-afg", "3", "--epochs-sfg", "0", "--lr", "1e300",
                    "--out-dir", dir.path().string()},
                   kSmall))
              .code == kExitNumericFailure);
  }

  TEST_CASE("bad condition name is a data error") {
    TempDir dir;
    CHECK(run(with({"train", "--condition", "median", "--out-dir", dir.path().string()}, kSmall))
              .code != kExitOk);
  }
}

TEST_SUITE("eval") {
  TEST_CASE("oracle labels give perfect accuracy") {
    TempDir dir;
    REQUIRE(run(with({"train", "--epochs-afg", "1", "--epochs-sfg", "1", "--out-dir",
                      dir.path().string()},
                     kSmall))
                .code == kExitOk);
    REQUIRE(run(with({"eval", "--checkpoint", (dir / "checkpoint.manifest").string(),
                      "--oracle-labels", "--out-dir", dir.path().string()},
                     kSmall))
                .code == kExitOk);
    const auto kv = read_report_values(dir / "report_oracle.txt");
    CHECK(std::stod(kv.at("acc_h")) == 1.0);
  }

  TEST_CASE("paired reports obey the harmonic-mean invariant") {
    TempDir dir;
    REQUIRE(run(with({"train", "--epochs-afg", "5", "--epochs-sfg", "5", "--out-dir",
                      dir.path().string()},
                     kSmall))
                .code == kExitOk);
    const Run r = run(with({"eval", "--checkpoint", (dir / "checkpoint.manifest").string(),
                            "--compare-baseline", "--export-synth", "--seen-per-class", "20",
                            "--unseen-per-class", "20", "--clf-epochs", "5", "--out-dir",
                            dir.path().string()},
                           kSmall));
    REQUIRE(r.code == kExitOk);
    for (const char* tag : {"dfs", "baseline"}) {
      const auto kv = read_report_values(dir / (std::string("report_") + tag + ".txt"));
      const double s = std::stod(kv.at("acc_s")), u = std::stod(kv.at("acc_u"));
      CHECK(std::stod(kv.at("acc_h")) == doctest::Approx(harmonic_mean(s, u)).epsilon(1e-8));
      CHECK(kv.at("generator") == tag);
      CHECK(fs::exists(dir / (std::string("per_class_") + tag + ".csv")));
      const SynthesizedSet synth =
          load_synthesized(dir / (std::string("synth_") + tag + ".manifest"));
      CHECK(synth.size() == 3 * 20 + 2 * 20);
    }
  }

  TEST_CASE("dimension mismatch between checkpoint and dataset") {
    TempDir dir;
    REQUIRE(run(with({"train", "--epochs-afg", "0", "--epochs-sfg", "0", "--out-dir",
                      dir.path().string()},
                     kSmall))
                .code == kExitOk);
    const Run r = run({"eval", "--checkpoint", (dir / "checkpoint.manifest").string(),
                       "--synthetic", "--out-dir", dir.path().string()});
    CHECK(r.code == kExitDataError);
  }

  TEST_CASE("missing checkpoint flag is a usage error") {
    CHECK(run({"eval", "--synthetic"}).code == kExitUsage);
  }
}

TEST_SUITE("gradcheck") {
  TEST_CASE("default run passes every loss") {
    const Run r = run({"gradcheck"});
    CHECK(r.code == kExitOk);
    for (const std::string& loss : gradient_suite_losses())
      CHECK(r.out.find(loss) != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
  }

  TEST_CASE("sign flip is reported as a failure") {
    const Run r = run({"gradcheck", "--sign-flip", "da", "--instances", "2"});
    CHECK(r.code == kExitNumericFailure);
    CHECK(r.out.find("da      FAIL") != std::string::npos);
  }

  TEST_CASE("tie points at a tight tolerance are skipped with a note") {
    const Run r = run({"gradcheck", "--tie-point", "--tolerance", "1e-12"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("subgradient") != std::string::npos);
  }

  TEST_CASE("unknown sign-flip target is a usage error") {
    CHECK(run({"gradcheck", "--sign-flip", "nope"}).code == kExitUsage);
  }
}
