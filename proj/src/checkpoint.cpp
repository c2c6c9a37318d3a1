#include "dfs/checkpoint.hpp"

#include "dfs/blob_io.hpp"
#include "dfs/error.hpp"

#include <sstream>

namespace dfs {

namespace fs = std::filesystem;

namespace {

void store_net(Manifest& m, const fs::path& path, const std::string& name, const MlpNet& net) {
  std::string sizes;
  for (std::size_t s : net.layer_sizes()) sizes += (sizes.empty() ? "" : " ") + std::to_string(s);
  m.set("net." + name + ".layers", sizes);
  m.set("net." + name + ".hidden_activation",
        net.hidden_activation() == Activation::kRelu ? "relu" : "identity");
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    store_blob(m, path, name + ".w" + std::to_string(k), RowMatrix(net.layer(k).weight));
    store_blob(m, path, name + ".b" + std::to_string(k), RowMatrix(net.layer(k).bias.transpose()));
  }
}

MlpNet load_net(const Manifest& m, const fs::path& path, const std::string& name) {
  std::istringstream in(m.get("net." + name + ".layers"));
  std::vector<std::size_t> sizes;
  long long s = 0;
  while (in >> s) {
    if (s <= 0) fail(ErrorCode::kFormat, "non-positive layer size for " + name);
    sizes.push_back(static_cast<std::size_t>(s));
  }
  if (!in.eof() || sizes.size() < 2) fail(ErrorCode::kFormat, "bad layer list for " + name);
  const std::string& act = m.get("net." + name + ".hidden_activation");
  if (act != "relu" && act != "identity") fail(ErrorCode::kFormat, "unknown activation " + act);
  MlpNet net(sizes, act == "relu" ? Activation::kRelu : Activation::kIdentity);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    DenseLayer& l = net.layer(k);
    l.weight = load_blob(m, path, name + ".w" + std::to_string(k),
                         static_cast<std::size_t>(l.weight.rows()),
                         static_cast<std::size_t>(l.weight.cols()));
    l.bias = load_blob(m, path, name + ".b" + std::to_string(k), 1,
                       static_cast<std::size_t>(l.bias.size()))
                 .row(0)
                 .transpose();
  }
  return net;
}

}  // namespace

void save_checkpoint(const AfgModel& afg, const SfgModel& sfg,
                     const std::string& config_fingerprint, const fs::path& manifest_path) {
  Manifest m;
  m.set("format_version", std::to_string(kFormatVersion));
  m.set("kind", "checkpoint");
  m.set("aligned_dim", std::to_string(afg.aligned_dim()));
  m.set("latent_dim", std::to_string(sfg.latent_dim()));
  m.set("semantic_dim", std::to_string(afg.semantic_dim()));
  m.set("visual_dim", std::to_string(afg.visual_dim()));
  m.set("condition_mode", std::string(to_string(sfg.condition_mode())));
  m.set("config_fingerprint", config_fingerprint);
  const AfgNets& a = afg.nets();
  store_net(m, manifest_path, "e_sem", a.e_sem);
  store_net(m, manifest_path, "d_sem", a.d_sem);
  store_net(m, manifest_path, "e_vis", a.e_vis);
  store_net(m, manifest_path, "d_vis", a.d_vis);
  store_net(m, manifest_path, "e3", sfg.nets().e3);
  store_net(m, manifest_path, "d3", sfg.nets().d3);
  m.write(manifest_path);
}

Checkpoint load_checkpoint(const fs::path& manifest_path) {
  const Manifest m = Manifest::read(manifest_path);
  m.expect("checkpoint");
  const std::size_t aligned = m.get_size("aligned_dim");
  const std::size_t latent = m.get_size("latent_dim");
  AfgNets nets{load_net(m, manifest_path, "e_sem"), load_net(m, manifest_path, "d_sem"),
               load_net(m, manifest_path, "e_vis"), load_net(m, manifest_path, "d_vis")};
  Checkpoint cp;
  cp.afg = AfgModel(std::move(nets), aligned, true);
  if (cp.afg.semantic_dim() != m.get_size("semantic_dim") ||
      cp.afg.visual_dim() != m.get_size("visual_dim"))
    fail(ErrorCode::kShapeMismatch, "checkpoint dimensions disagree with its networks");
  SfgNets sfg_nets{load_net(m, manifest_path, "e3"), load_net(m, manifest_path, "d3")};
  cp.sfg = SfgModel(std::move(sfg_nets), aligned, latent,
                    parse_condition_mode(m.get("condition_mode")));
  cp.config_fingerprint = m.get("config_fingerprint");
  return cp;
}

}  // namespace dfs
