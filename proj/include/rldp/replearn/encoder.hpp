#pragma once

#include <rldp/diffcore/checkpoint.hpp>
#include <rldp/diffcore/mlp.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace rldp {

/// Network shapes of the state encoder and its latent dynamics head.
struct EncoderArch {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;  // network action input width (one-hot width for discrete)
  std::size_t d = 64;
  std::vector<std::size_t> phi_hidden{256, 256};
  std::size_t action_embed = 256;
  std::vector<std::size_t> g_hidden{512, 512};
  /// Sphere projection on the predicted next latent.
  bool sn_on_g = true;

  MlpSpec phi_spec() const { return MlpSpec::relu_net(obs_dim, phi_hidden, d, OutputTransform::sphere); }
  MlpSpec action_spec() const { return MlpSpec::relu_net(action_dim, {}, action_embed); }
  MlpSpec g_spec() const { return MlpSpec::relu_net(d + action_embed, g_hidden, d); }

  void validate() const {
    if (d < 2) throw std::invalid_argument("encoder: d must be >= 2");
    if (obs_dim == 0 || action_dim == 0) throw std::invalid_argument("encoder: observation and action widths must be set");
    phi_spec().validate("phi");
    action_spec().validate("A");
    g_spec().validate("g");
  }

  friend bool operator==(const EncoderArch&, const EncoderArch&) = default;
};

inline nlohmann::json to_json(const EncoderArch& a) {
  return {{"obs_dim", a.obs_dim}, {"action_dim", a.action_dim}, {"d", a.d},
          {"phi_hidden", a.phi_hidden}, {"action_embed", a.action_embed}, {"g_hidden", a.g_hidden},
          {"sn_on_g", a.sn_on_g}};
}

inline EncoderArch encoder_arch_from_json(const nlohmann::json& j) {
  EncoderArch a;
  a.obs_dim = j.at("obs_dim").get<std::size_t>();
  a.action_dim = j.at("action_dim").get<std::size_t>();
  a.d = j.at("d").get<std::size_t>();
  a.phi_hidden = j.at("phi_hidden").get<std::vector<std::size_t>>();
  a.action_embed = j.at("action_embed").get<std::size_t>();
  a.g_hidden = j.at("g_hidden").get<std::vector<std::size_t>>();
  a.sn_on_g = j.at("sn_on_g").get<bool>();
  return a;
}

/// phi (state -> sphere), A (action -> embedding), g (latent, embedded
/// action -> latent), w (d x d, no bias) and the frozen target copy of phi.
/// Online names carry the prefixes "phi.", "A.", "g." and "w.weight"; the
/// target store uses the same "phi." names.
struct EncoderParams {
  EncoderArch arch;
  ParamStore online;
  ParamStore target;

  static EncoderParams init(const EncoderArch& arch, Rng& rng) {
    arch.validate();
    EncoderParams p;
    p.arch = arch;
    init_mlp(arch.phi_spec(), "phi.", p.online, rng);
    init_mlp(arch.action_spec(), "A.", p.online, rng);
    init_mlp(arch.g_spec(), "g.", p.online, rng);
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.d));
    Tensor w = Tensor::matrix(arch.d, arch.d);
    for (double& v : w.values()) v = uniform(rng, -bound, bound);
    p.online.add("w.weight", std::move(w));
    p.refresh_target();
    return p;
  }

  ParamStore phi() const { return online.subset("phi."); }

  /// Hard copy phi -> phi_target.
  void refresh_target() {
    if (target.empty()) {
      target = hard_copy_targets(phi());
    } else {
      target.copy_values_from(phi());
    }
  }

  /// Independent deep copy (online and target).
  EncoderParams clone() const {
    EncoderParams c;
    c.arch = arch;
    c.online = online.clone(true);
    c.target = target.clone(false);
    return c;
  }
};

/// phi(s) (or phi_target(s)) for a batch of states, rows on the radius-sqrt(d) sphere.
inline Var encode(const EncoderParams& p, const Var& states, bool use_target = false) {
  return forward_mlp(p.arch.phi_spec(), use_target ? p.target : p.online, "phi.", states);
}

inline Tensor encode(const EncoderParams& p, const Tensor& states, bool use_target = false) {
  return encode(p, constant(states), use_target).value();
}

/// h_{t+1} = g(h_t, A(a_t))^T w, sphere-projected when the arch says so.
inline Var latent_step(const EncoderParams& p, const Var& h, const Var& action) {
  Var a = forward_mlp(p.arch.action_spec(), p.online, "A.", action);
  Var g = forward_mlp(p.arch.g_spec(), p.online, "g.", concat_cols(h, a));
  Var next = matmul(g, p.online.get("w.weight"));
  return p.arch.sn_on_g ? sphere_project(next, p.arch.d) : next;
}

/// h_1..h_H from h_0 and the action sequence; gradients flow through the whole unroll.
inline std::vector<Var> rollout_latent(const EncoderParams& p, const Var& h0, const std::vector<Var>& actions) {
  if (actions.empty()) throw std::invalid_argument("rollout_latent: horizon must be >= 1");
  std::vector<Var> out;
  out.reserve(actions.size());
  Var h = h0;
  for (const Var& a : actions) {
    h = latent_step(p, h, a);
    out.push_back(h);
  }
  return out;
}

inline void save_encoder(const std::filesystem::path& manifest, const EncoderParams& p, nlohmann::json extra = {}) {
  ParamStore all;
  all.merge(p.online);
  all.merge(p.target, "target.");
  nlohmann::json meta = {{"kind", "encoder"}, {"arch", to_json(p.arch)}};
  if (!extra.is_null()) meta["extra"] = std::move(extra);
  save_checkpoint(manifest, all, meta);
}

inline EncoderParams load_encoder(const std::filesystem::path& manifest) {
  Checkpoint ck = load_checkpoint(manifest);
  if (ck.meta.value("kind", "") != "encoder") {
    throw FormatError("checkpoint '" + manifest.string() + "' is not an encoder checkpoint", 0);
  }
  EncoderParams p;
  p.arch = encoder_arch_from_json(ck.meta.at("arch"));
  for (const auto& [name, v] : ck.params) {
    if (name.rfind("target.", 0) == 0) {
      p.target.add(name.substr(7), v.value(), false);
    } else {
      p.online.add(name, v.value(), true);
    }
  }
  return p;
}

}  // namespace rldp
