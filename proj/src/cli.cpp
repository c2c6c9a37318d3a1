#include "dfs/cli.hpp"

#include "dfs/benchmark.hpp"
#include "dfs/checkpoint.hpp"
#include "dfs/error.hpp"
#include "dfs/grad_suite.hpp"
#include "dfs/pipeline.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <optional>

namespace dfs {

namespace fs = std::filesystem;

namespace {

void add_bench_flags(CLI::App& cmd, SyntheticBenchmarkSpec& s) {
  cmd.add_option("--classes-seen", s.num_seen, "Seen classes")->capture_default_str();
  cmd.add_option("--classes-unseen", s.num_unseen, "Unseen classes")->capture_default_str();
  cmd.add_option("--visual-dim", s.visual_dim, "Visual feature dimension")->capture_default_str();
  cmd.add_option("--semantic-dim", s.semantic_dim, "Class embedding dimension")
      ->capture_default_str();
  cmd.add_option("--samples-per-class", s.samples_per_class)->capture_default_str();
  cmd.add_option("--class-separation", s.class_separation)->capture_default_str();
  cmd.add_option("--cov-scale", s.cov_scale)->capture_default_str();
  cmd.add_option("--map-noise", s.map_noise)->capture_default_str();
  cmd.add_option("--spectrum-decay", s.spectrum_decay)->capture_default_str();
  cmd.add_option("--semantic-rank", s.semantic_rank, "0 for full rank")->capture_default_str();
  cmd.add_option("--test-fraction", s.test_fraction)->capture_default_str();
}

// Either a dataset manifest or a generated benchmark.
struct DataSource {
  std::string dataset;
  bool synthetic = false;
  std::optional<std::uint64_t> data_seed;
  SyntheticBenchmarkSpec spec;

  void attach(CLI::App& cmd) {
    auto* d = cmd.add_option("--dataset", dataset, "Dataset manifest");
    auto* s = cmd.add_flag("--synthetic", synthetic, "Use a generated benchmark");
    d->excludes(s);
    s->excludes(d);
    cmd.add_option("--data-seed", data_seed, "Benchmark seed (defaults to --seed)");
    add_bench_flags(cmd, spec);
  }

  FeatureDataset load(std::uint64_t seed) const {
    if (synthetic) {
      SyntheticBenchmarkSpec s = spec;
      s.seed = data_seed.value_or(seed);
      return generate_synthetic_benchmark(s);
    }
    return load_dataset(dataset);
  }

  bool chosen() const { return synthetic || !dataset.empty(); }
};

void add_hidden(CLI::App& cmd, const std::string& name, std::vector<std::size_t>& v,
                const std::string& what) {
  cmd.add_option(name, v, what)->delimiter(',')->expected(1, 16);
}

fs::path prepare_out_dir(const std::string& dir) {
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + p.string() + ": " + ec.message());
  return p;
}

void print_report(std::ostream& out, const EvalReport& r) {
  out << fmt::format("{}: acc_s={:.4f} acc_u={:.4f} acc_h={:.4f}\n", r.generator, r.acc_s,
                     r.acc_u, r.acc_h);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diverse feature synthesis for generalized zero-shot learning", "dfs"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_dir = "dfs_out";

  // bench
  auto* bench = app.add_subcommand("bench", "Generate a synthetic benchmark dataset");
  SyntheticBenchmarkSpec bench_spec;
  std::string bench_name = "benchmark";
  add_bench_flags(*bench, bench_spec);
  bench->add_option("--seed", seed)->capture_default_str();
  bench->add_option("--out-dir", out_dir)->capture_default_str();
  bench->add_option("--name", bench_name, "Manifest stem")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train the aligned and synthetic feature generators");
  DataSource train_data;
  train_data.attach(*train);
  TrainConfig tc;
  std::string condition = "mean";
  std::optional<double> lr;
  std::optional<int> kl_warmup;
  train->add_option("--seed", seed)->capture_default_str();
  train->add_option("--out-dir", out_dir)->capture_default_str();
  train->add_option("--epochs-afg", tc.afg.epochs)->capture_default_str();
  train->add_option("--epochs-sfg", tc.sfg.epochs)->capture_default_str();
  train->add_option("--aligned-dim", tc.afg.aligned_dim)->capture_default_str();
  train->add_option("--latent-dim", tc.sfg.latent_dim, "SFG latent size (defaults to aligned)");
  train->add_option("--batch-size", tc.afg.batch_size)->capture_default_str();
  train->add_option("--lr", lr, "Learning rate of both stages");
  auto* beta1_opt = train->add_option("--beta1", tc.afg.weights.beta1.value)->capture_default_str();
  auto* eta_opt = train->add_option("--eta", tc.afg.weights.eta.value)->capture_default_str();
  auto* delta_opt = train->add_option("--delta", tc.afg.weights.delta.value)->capture_default_str();
  auto* beta2_opt = train->add_option("--beta2", tc.sfg.beta2)->capture_default_str();
  std::string preset;
  train->add_option("--preset", preset,
                    "standard or synthetic; default synthetic with --synthetic, else standard")
      ->check(CLI::IsMember({"standard", "synthetic"}));
  train->add_option("--warmup-epochs", kl_warmup,
                    "Ramp beta1, eta and delta linearly from 0 over this many epochs");
  train->add_option("--condition", condition, "raw, sampled or mean")
      ->check(CLI::IsMember({"raw", "sampled", "mean"}))
      ->capture_default_str();
  add_hidden(*train, "--hidden-sem-enc", tc.afg.sem_encoder_hidden, "E1 hidden sizes");
  add_hidden(*train, "--hidden-sem-dec", tc.afg.sem_decoder_hidden, "D1 hidden sizes");
  add_hidden(*train, "--hidden-vis-enc", tc.afg.vis_encoder_hidden, "E2 hidden sizes");
  add_hidden(*train, "--hidden-vis-dec", tc.afg.vis_decoder_hidden, "D2 hidden sizes");
  add_hidden(*train, "--hidden-sfg-enc", tc.sfg.encoder_hidden, "E3 hidden sizes");
  add_hidden(*train, "--hidden-sfg-dec", tc.sfg.decoder_hidden, "D3 hidden sizes");

  // eval
  auto* eval = app.add_subcommand("eval", "Synthesize features, train the classifier, evaluate");
  DataSource eval_data;
  eval_data.attach(*eval);
  EvalConfig ec;
  std::string checkpoint;
  std::string seen_source = "posterior";
  bool compare_baseline = false;
  bool oracle = false;
  bool export_synth = false;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint manifest")->required();
  eval->add_option("--seed", seed)->capture_default_str();
  eval->add_option("--out-dir", out_dir)->capture_default_str();
  eval->add_option("--seen-per-class", ec.plan.per_seen_class_count)->capture_default_str();
  eval->add_option("--unseen-per-class", ec.plan.per_unseen_class_count)->capture_default_str();
  eval->add_option("--seen-source", seen_source, "posterior or mean")
      ->check(CLI::IsMember({"posterior", "mean"}))
      ->capture_default_str();
  eval->add_option("--clf-epochs", ec.classifier.epochs)->capture_default_str();
  eval->add_option("--clf-lr", ec.classifier.learning_rate)->capture_default_str();
  eval->add_option("--clf-batch-size", ec.classifier.batch_size)->capture_default_str();
  eval->add_flag("--compare-baseline", compare_baseline,
                 "Also evaluate the semantic-posterior generator with the same seeds");
  eval->add_flag("--oracle-labels", oracle, "Predict the true labels (harness check)");
  eval->add_flag("--export-synth", export_synth, "Write the classifier training set");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every loss");
  GradSuiteOptions go;
  gradcheck->add_option("--seed", go.seed)->capture_default_str();
  gradcheck->add_option("--instances", go.instances)->capture_default_str();
  gradcheck->add_option("--max-dim", go.max_dim)->capture_default_str();
  gradcheck->add_option("--tolerance", go.check.tolerance)->capture_default_str();
  gradcheck->add_option("--step", go.check.step)->capture_default_str();
  gradcheck->add_option("--sign-flip", go.sign_flip_target, "Negate one loss's gradient")
      ->check(CLI::IsMember(gradient_suite_losses()));
  gradcheck->add_flag("--tie-point", go.tie_point, "Check L1 at exact ties");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bench) {
      bench_spec.seed = seed;
      const FeatureDataset data = generate_synthetic_benchmark(bench_spec);
      const fs::path dir = prepare_out_dir(out_dir);
      save_dataset(data, dir / (bench_name + ".manifest"));
      out << fmt::format("wrote {} ({} samples, {} seen / {} unseen classes)\n",
                         (dir / (bench_name + ".manifest")).string(), data.num_samples(),
                         data.seen.size(), data.unseen.size());
      return kExitOk;
    }

    if (*train) {
      if (!train_data.chosen()) {
        err << "train: one of --dataset or --synthetic is required\n";
        return kExitUsage;
      }
      if (preset.empty()) preset = train_data.synthetic ? "synthetic" : "standard";
      if (preset == "synthetic") {
        // Explicit flags win over the preset.
        const TrainConfig p = synthetic_preset();
        if (!lr) lr = p.afg.optimizer.learning_rate;
        if (beta1_opt->count() == 0) tc.afg.weights.beta1.value = p.afg.weights.beta1.value;
        if (eta_opt->count() == 0) tc.afg.weights.eta.value = p.afg.weights.eta.value;
        if (delta_opt->count() == 0) tc.afg.weights.delta.value = p.afg.weights.delta.value;
        if (beta2_opt->count() == 0) tc.sfg.beta2 = p.sfg.beta2;
      }
      apply_seed(tc, seed);
      tc.sfg.condition = parse_condition_mode(condition);
      tc.sfg.batch_size = tc.afg.batch_size;
      if (lr) {
        tc.afg.optimizer.learning_rate = *lr;
        tc.sfg.optimizer.learning_rate = *lr;
      }
      if (kl_warmup) {
        for (ScheduledWeight* w : {&tc.afg.weights.beta1, &tc.afg.weights.eta, &tc.afg.weights.delta})
          w->warmup = WarmUp{0, *kl_warmup};
      }
      const FeatureDataset data = train_data.load(seed);
      const fs::path dir = prepare_out_dir(out_dir);
      const TrainedModels models = train_models(data, tc);
      const std::string fp = config_fingerprint(tc);
      save_checkpoint(models.afg, models.sfg, fp, dir / "checkpoint.manifest");
      write_loss_history(models.afg, models.sfg, dir / "loss_history.csv");
      if (train_data.synthetic) save_dataset(data, dir / "dataset.manifest");
      out << fmt::format("trained {} + {} epochs; checkpoint {} (config {})\n", tc.afg.epochs,
                         tc.sfg.epochs, (dir / "checkpoint.manifest").string(), fp);
      return kExitOk;
    }

    if (*eval) {
      if (!eval_data.chosen()) {
        err << "eval: one of --dataset or --synthetic is required\n";
        return kExitUsage;
      }
      apply_seed(ec, seed);
      ec.plan.seen_source =
          seen_source == "mean" ? SeenSource::kEncodedMean : SeenSource::kPosteriorSample;
      const Checkpoint cp = load_checkpoint(checkpoint);
      const FeatureDataset data = eval_data.load(seed);
      require(cp.afg.semantic_dim() == data.semantic_dim() &&
                  cp.afg.visual_dim() == data.visual_dim(),
              ErrorCode::kDimensionMismatch,
              fmt::format("checkpoint expects {}/{} dims, dataset has {}/{}",
                          cp.afg.semantic_dim(), cp.afg.visual_dim(), data.semantic_dim(),
                          data.visual_dim()));
      const fs::path dir = prepare_out_dir(out_dir);

      if (oracle) {
        std::vector<int> truth;
        for (std::size_t i : test_indices(data)) truth.push_back(data.label(i));
        EvalReport r = assemble_report(truth, truth, data.seen, data.unseen);
        r.generator = "oracle";
        r.config_fingerprint = cp.config_fingerprint;
        write_report(r, dir / "report_oracle.txt", dir / "per_class_oracle.csv");
        print_report(out, r);
        return kExitOk;
      }

      std::vector<Generator> gens{Generator::kDfs};
      if (compare_baseline) gens.push_back(Generator::kBaseline);
      for (Generator g : gens) {
        const std::string tag(to_string(g));
        const EvalReport r = run_evaluation(cp.afg, cp.sfg, data, g, ec, cp.config_fingerprint);
        write_report(r, dir / ("report_" + tag + ".txt"), dir / ("per_class_" + tag + ".csv"));
        print_report(out, r);
        if (export_synth) {
          const SynthesizedSet seen = synthesize_seen(cp.afg, data, ec.plan);
          const SynthesizedSet unseen = g == Generator::kDfs
                                            ? synthesize_unseen(cp.afg, cp.sfg, data, ec.plan)
                                            : synthesize_unseen_baseline(cp.afg, data, ec.plan);
          save_synthesized(build_classifier_trainset(seen, unseen),
                           dir / ("synth_" + tag + ".manifest"));
        }
      }
      return kExitOk;
    }

    if (*gradcheck) {
      const std::vector<GradSuiteResult> results = run_gradient_suite(go);
      bool all = true;
      for (const GradSuiteResult& r : results) {
        out << fmt::format("{:<7} {}  instances={} checked={} skipped={} max_rel_error={:.3e}\n",
                           r.loss, r.passed ? "PASS" : "FAIL", r.instances, r.checked,
                           r.skipped, r.max_rel_error);
        if (r.skipped > 0)
          out << fmt::format("        {} coordinate(s) at a non-differentiable point skipped; "
                             "the analytic value there is a subgradient\n",
                             r.skipped);
        all = all && r.passed;
      }
      return all ? kExitOk : kExitNumericFailure;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return is_data_error(e.code()) ? kExitDataError : kExitNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace dfs
