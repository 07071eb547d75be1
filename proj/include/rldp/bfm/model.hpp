#pragma once

#include <rldp/diffcore/checkpoint.hpp>
#include <rldp/diffcore/mlp.hpp>
#include <rldp/replearn/encoder.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace rldp {

/// Shapes of the successor-feature critic psi(s, a, z) and the actor.
/// The critic runs two embedders, on (s, a) and on (s, z), concatenates
/// them and maps the result to d through the head.
struct BfmArch {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;  // network action input width
  std::size_t num_actions = 0;  // > 0 means discrete: greedy argmax, no actor
  std::size_t d = 0;
  std::size_t embed_hidden = 256;
  std::size_t embed_dim = 128;
  std::size_t head_hidden = 256;
  std::size_t actor_hidden = 256;

  bool discrete() const noexcept { return num_actions > 0; }

  MlpSpec sa_spec() const { return embedder(obs_dim + action_dim); }
  MlpSpec sz_spec() const { return embedder(obs_dim + d); }
  MlpSpec head_spec() const { return MlpSpec::relu_net(2 * embed_dim, {head_hidden}, d); }
  MlpSpec actor_spec() const {
    return MlpSpec::relu_net(obs_dim + d, {actor_hidden, actor_hidden}, action_dim, OutputTransform::tanh);
  }

  void validate() const {
    if (obs_dim == 0 || action_dim == 0 || d == 0) throw std::invalid_argument("bfm: obs, action and feature widths must be set");
    sa_spec().validate("psi.sa");
    sz_spec().validate("psi.sz");
    head_spec().validate("psi.head");
    if (!discrete()) actor_spec().validate("actor");
  }

  friend bool operator==(const BfmArch&, const BfmArch&) = default;

 private:
  MlpSpec embedder(std::size_t in) const {
    MlpSpec s;
    s.input_dim = in;
    s.widths = {embed_hidden, embed_dim};
    s.activations = {Activation::relu, Activation::relu};
    return s;
  }
};

inline nlohmann::json to_json(const BfmArch& a) {
  return {{"obs_dim", a.obs_dim},           {"action_dim", a.action_dim},   {"num_actions", a.num_actions},
          {"d", a.d},                       {"embed_hidden", a.embed_hidden}, {"embed_dim", a.embed_dim},
          {"head_hidden", a.head_hidden},   {"actor_hidden", a.actor_hidden}};
}

inline BfmArch bfm_arch_from_json(const nlohmann::json& j) {
  BfmArch a;
  a.obs_dim = j.at("obs_dim").get<std::size_t>();
  a.action_dim = j.at("action_dim").get<std::size_t>();
  a.num_actions = j.at("num_actions").get<std::size_t>();
  a.d = j.at("d").get<std::size_t>();
  a.embed_hidden = j.at("embed_hidden").get<std::size_t>();
  a.embed_dim = j.at("embed_dim").get<std::size_t>();
  a.head_hidden = j.at("head_hidden").get<std::size_t>();
  a.actor_hidden = j.at("actor_hidden").get<std::size_t>();
  return a;
}

/// Critic ("psi.*") and actor ("actor.*", continuous only) with frozen
/// target copies under the same names.
struct BfmParams {
  BfmArch arch;
  ParamStore critic;
  ParamStore actor;
  ParamStore critic_target;
  ParamStore actor_target;

  static BfmParams init(const BfmArch& arch, Rng& rng) {
    arch.validate();
    BfmParams p;
    p.arch = arch;
    init_mlp(arch.sa_spec(), "psi.sa.", p.critic, rng);
    init_mlp(arch.sz_spec(), "psi.sz.", p.critic, rng);
    init_mlp(arch.head_spec(), "psi.head.", p.critic, rng);
    if (!arch.discrete()) init_mlp(arch.actor_spec(), "actor.", p.actor, rng);
    p.refresh_targets();
    return p;
  }

  void refresh_targets() {
    if (critic_target.empty()) {
      critic_target = hard_copy_targets(critic);
      actor_target = hard_copy_targets(actor);
    } else {
      critic_target.copy_values_from(critic);
      actor_target.copy_values_from(actor);
    }
  }
};

/// psi(s, a, z) for a batch; rows of the three inputs belong together.
inline Var critic_forward(const BfmArch& arch, const ParamStore& critic, const Var& s, const Var& a, const Var& z) {
  Var e_sa = forward_mlp(arch.sa_spec(), critic, "psi.sa.", concat_cols(s, a));
  Var e_sz = forward_mlp(arch.sz_spec(), critic, "psi.sz.", concat_cols(s, z));
  return forward_mlp(arch.head_spec(), critic, "psi.head.", concat_cols(e_sa, e_sz));
}

inline Var critic_forward(const BfmParams& p, const Var& s, const Var& a, const Var& z, bool use_target = false) {
  return critic_forward(p.arch, use_target ? p.critic_target : p.critic, s, a, z);
}

inline Var actor_forward(const BfmParams& p, const Var& s, const Var& z, bool use_target = false) {
  if (p.arch.discrete()) throw std::logic_error("discrete BFMs act by argmax and have no actor network");
  return forward_mlp(p.arch.actor_spec(), use_target ? p.actor_target : p.actor, "actor.", concat_cols(s, z));
}

/// Q = psi^T z, one value per row.
inline Var q_value(const Var& psi, const Var& z) { return rowwise_dot(psi, z); }

/// Row-stacked one-hot encodings of `actions` (width n).
inline Tensor one_hot_actions(std::span<const std::size_t> actions, std::size_t n) {
  Tensor t = Tensor::matrix(actions.size(), n);
  for (std::size_t i = 0; i < actions.size(); ++i) t(i, actions[i]) = 1.0;
  return t;
}

/// Q(s, a, z) for every discrete action: B x num_actions.
inline Tensor q_all_actions(const BfmParams& p, const Tensor& s, const Tensor& z, bool use_target = false) {
  const std::size_t n = p.arch.num_actions, b = s.rows();
  Tensor q = Tensor::matrix(b, n);
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::size_t> act(b, a);
    Tensor psi = critic_forward(p, constant(s), constant(one_hot_actions(act, n)), constant(z), use_target).value();
    for (std::size_t i = 0; i < b; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < psi.cols(); ++k) acc += psi(i, k) * z(i, k);
      q(i, a) = acc;
    }
  }
  return q;
}

/// Row-wise argmax; ties go to the lowest index.
inline std::vector<std::size_t> argmax_rows(const Tensor& q) {
  std::vector<std::size_t> out(q.rows(), 0);
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t a = 1; a < q.cols(); ++a)
      if (q(i, a) > q(i, out[i])) out[i] = a;
  return out;
}

inline std::vector<std::size_t> greedy_actions(const BfmParams& p, const Tensor& s, const Tensor& z, bool use_target = false) {
  return argmax_rows(q_all_actions(p, s, z, use_target));
}

/// Network action input of the policy at `s`: one-hot greedy actions
/// (discrete) or the deterministic actor output.
inline Tensor policy_action_input(const BfmParams& p, const Tensor& s, const Tensor& z, bool use_target = false) {
  if (p.arch.discrete()) return one_hot_actions(greedy_actions(p, s, z, use_target), p.arch.num_actions);
  return actor_forward(p, constant(s), constant(z), use_target).value();
}

inline void save_bfm(const std::filesystem::path& manifest, const BfmParams& p, nlohmann::json extra = {}) {
  ParamStore all;
  all.merge(p.critic);
  all.merge(p.actor);
  all.merge(p.critic_target, "target.");
  all.merge(p.actor_target, "target.");
  nlohmann::json meta = {{"kind", "bfm"}, {"arch", to_json(p.arch)}};
  if (!extra.is_null()) meta["extra"] = std::move(extra);
  save_checkpoint(manifest, all, meta);
}

inline BfmParams load_bfm(const std::filesystem::path& manifest) {
  Checkpoint ck = load_checkpoint(manifest);
  if (ck.meta.value("kind", "") != "bfm") throw FormatError("checkpoint '" + manifest.string() + "' is not a BFM checkpoint", 0);
  BfmParams p;
  p.arch = bfm_arch_from_json(ck.meta.at("arch"));
  for (const auto& [name, v] : ck.params) {
    const bool target = name.rfind("target.", 0) == 0;
    const std::string base = target ? name.substr(7) : name;
    ParamStore& dst = base.rfind("psi.", 0) == 0 ? (target ? p.critic_target : p.critic) : (target ? p.actor_target : p.actor);
    dst.add(base, v.value(), !target);
  }
  return p;
}

}  // namespace rldp
