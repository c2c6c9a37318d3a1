#include "dfs/pipeline.hpp"

#include "dfs/error.hpp"
#include "dfs/hash.hpp"

#include <fmt/format.h>
#include <fstream>

namespace dfs {

namespace {

std::string describe(const std::vector<std::size_t>& v) {
  std::string s = "[";
  for (std::size_t x : v) s += std::to_string(x) + ",";
  return s + "]";
}

std::string describe(const ScheduledWeight& w) {
  std::string s = fmt::format("{:.17g}", w.value);
  if (w.warmup) s += fmt::format("@{}-{}", w.warmup->start_epoch, w.warmup->end_epoch);
  return s;
}

std::string describe(const AdamConfig& a) {
  return fmt::format("{:.17g}/{:.17g}/{:.17g}/{:.17g}", a.learning_rate, a.beta1, a.beta2,
                     a.epsilon);
}

}  // namespace

TrainConfig synthetic_preset() {
  TrainConfig c;
  c.afg.optimizer.learning_rate = 1e-3;
  c.sfg.optimizer.learning_rate = 1e-3;
  c.afg.weights.beta1.value = 0.02;
  c.afg.weights.eta.value = 1.0;
  c.sfg.beta2 = 0.1;
  return c;
}

void apply_seed(TrainConfig& config, std::uint64_t seed) {
  config.afg.seed = seed;
  config.sfg.seed = seed;
}

void apply_seed(EvalConfig& config, std::uint64_t seed) {
  config.plan.seed = seed;
  config.classifier.seed = seed;
}

std::string config_fingerprint(const TrainConfig& c) {
  const AfgConfig& a = c.afg;
  const SfgConfig& s = c.sfg;
  std::string text = fmt::format(
      "afg aligned={} e1={} d1={} e2={} d2={} epochs={} batch={} adam={} beta1={} eta={} "
      "delta={} seed={};",
      a.aligned_dim, describe(a.sem_encoder_hidden), describe(a.sem_decoder_hidden),
      describe(a.vis_encoder_hidden), describe(a.vis_decoder_hidden), a.epochs, a.batch_size,
      describe(a.optimizer), describe(a.weights.beta1), describe(a.weights.eta),
      describe(a.weights.delta), a.seed);
  text += fmt::format(
      "sfg latent={} e3={} d3={} beta2={:.17g} epochs={} batch={} adam={} condition={} seed={}",
      s.latent_dim ? std::to_string(*s.latent_dim) : "aligned", describe(s.encoder_hidden),
      describe(s.decoder_hidden), s.beta2, s.epochs, s.batch_size, describe(s.optimizer),
      to_string(s.condition), s.seed);
  Fnv1a h;
  h.update(text);
  return h.hex();
}

TrainedModels train_models(const DatasetAccess& data, const TrainConfig& config) {
  TrainedModels out;
  out.afg = train_afg(data, config.afg);
  out.sfg = train_sfg(data, out.afg, config.sfg);
  return out;
}

std::string_view to_string(Generator g) {
  return g == Generator::kDfs ? "dfs" : "baseline";
}

EvalReport run_evaluation(const AfgModel& afg, const SfgModel& sfg, const DatasetAccess& data,
                          Generator generator, const EvalConfig& config,
                          const std::string& fingerprint) {
  require(afg.semantic_dim() == data.semantic_dim() && afg.visual_dim() == data.visual_dim(),
          ErrorCode::kDimensionMismatch, "checkpoint and dataset dimensions differ");
  const SynthesizedSet seen = synthesize_seen(afg, data, config.plan);
  const SynthesizedSet unseen = generator == Generator::kDfs
                                    ? synthesize_unseen(afg, sfg, data, config.plan)
                                    : synthesize_unseen_baseline(afg, data, config.plan);
  const SynthesizedSet trainset = build_classifier_trainset(seen, unseen);
  const LinearClassifier clf = train_linear_classifier(trainset, config.classifier);
  EvalReport report = evaluate_gzsl(clf, afg, data);
  report.diversity = diversity_score(trainset);
  report.generator = std::string(to_string(generator));
  report.config_fingerprint = fingerprint;
  return report;
}

void write_loss_history(const AfgModel& afg, const SfgModel& sfg,
                        const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + csv_path.string());
  out << "stage,epoch,total,recon_sem,recon_vis,kl_sem,kl_vis,da,ca_sem,ca_vis,recon_z2,kl_z3,"
         "w_beta1,w_eta,w_delta,w_beta2\n";
  auto num = [](double v) { return fmt::format("{:.9g}", v); };
  for (std::size_t e = 0; e < afg.history().size(); ++e) {
    const LossBreakdown& b = afg.history()[e];
    out << "afg," << e << ',' << num(b.total);
    for (const char* t : {"recon_sem", "recon_vis", "kl_sem", "kl_vis", "da", "ca_sem", "ca_vis"})
      out << ',' << num(b.value(t));
    out << ",,," << num(b.weight("kl_sem")) << ',' << num(b.weight("da")) << ','
        << num(b.weight("ca_sem")) << ",\n";
  }
  for (std::size_t e = 0; e < sfg.history().size(); ++e) {
    const LossBreakdown& b = sfg.history()[e];
    out << "sfg," << e << ',' << num(b.total) << ",,,,,,,," << num(b.value("recon")) << ','
        << num(b.value("kl")) << ",,,," << num(b.weight("kl")) << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + csv_path.string());
}

}  // namespace dfs
