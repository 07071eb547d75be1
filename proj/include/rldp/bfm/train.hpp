#pragma once

#include <rldp/bfm/losses.hpp>
#include <rldp/diffcore/io.hpp>
#include <rldp/diffcore/optim.hpp>
#include <rldp/replearn/losses.hpp>

#include <string>

namespace rldp {

enum class ActorVariant { greedy, td3bc };
enum class CriticVariant { successor_measure, usfa };
enum class BfmMode { frozen_features, fb_joint };

inline const char* to_string(ActorVariant v) { return v == ActorVariant::greedy ? "greedy" : "td3bc"; }
inline const char* to_string(CriticVariant v) { return v == CriticVariant::successor_measure ? "successor_measure" : "usfa"; }
inline const char* to_string(BfmMode m) { return m == BfmMode::frozen_features ? "frozen_features" : "fb_joint"; }

inline ActorVariant actor_variant_from_string(const std::string& s) {
  if (s == "greedy") return ActorVariant::greedy;
  if (s == "td3bc") return ActorVariant::td3bc;
  throw std::invalid_argument("unknown actor variant '" + s + "' (expected greedy or td3bc)");
}
inline CriticVariant critic_variant_from_string(const std::string& s) {
  if (s == "successor_measure") return CriticVariant::successor_measure;
  if (s == "usfa") return CriticVariant::usfa;
  throw std::invalid_argument("unknown critic variant '" + s + "' (expected successor_measure or usfa)");
}
inline BfmMode bfm_mode_from_string(const std::string& s) {
  if (s == "frozen_features") return BfmMode::frozen_features;
  if (s == "fb_joint") return BfmMode::fb_joint;
  throw std::invalid_argument("unknown bfm mode '" + s + "' (expected frozen_features or fb_joint)");
}

struct BfmConfig {
  double gamma = 0.98;
  double z_goal_fraction = 0.5;
  ActorVariant actor_variant = ActorVariant::greedy;
  CriticVariant critic_variant = CriticVariant::successor_measure;
  double alpha_bc = 2.5;
  std::size_t batch = 256;
  std::size_t steps = 50000;
  std::size_t target_update_period = 1000;
  double exploration_noise = 0.2;
  std::uint64_t seed = 0;
  double critic_lr = 3e-4;
  double actor_lr = 3e-4;
  /// Orthogonality weight on phi(s+) when phi is trained jointly.
  double fb_ortho = 1.0;
  std::size_t embed_hidden = 256;
  std::size_t embed_dim = 128;
  std::size_t head_hidden = 256;
  std::size_t actor_hidden = 256;
  std::size_t log_period = 100;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("bfm.gamma must lie in (0, 1)");
    if (!(z_goal_fraction >= 0.0 && z_goal_fraction <= 1.0)) throw std::invalid_argument("bfm.z_goal_fraction must lie in [0, 1]");
    if (actor_variant == ActorVariant::td3bc && !(alpha_bc > 0.0)) throw std::invalid_argument("bfm.alpha_bc must be > 0 for td3bc");
    if (batch < 1 || target_update_period < 1 || log_period < 1) {
      throw std::invalid_argument("bfm: batch, target_update_period and log_period must be >= 1");
    }
    if (!(critic_lr > 0.0 && actor_lr > 0.0)) throw std::invalid_argument("bfm: learning rates must be > 0");
    if (!(exploration_noise >= 0.0)) throw std::invalid_argument("bfm.exploration_noise must be >= 0");
  }

  BfmArch arch(const DatasetMeta& meta, std::size_t d) const {
    BfmArch a;
    a.obs_dim = meta.obs_dim;
    a.action_dim = meta.action_input_dim();
    a.num_actions = meta.num_actions;
    a.d = d;
    a.embed_hidden = embed_hidden;
    a.embed_dim = embed_dim;
    a.head_hidden = head_hidden;
    a.actor_hidden = actor_hidden;
    return a;
  }
};

struct BfmResult {
  BfmParams bfm;
  EncoderParams encoder;  // trained copy in fb_joint mode, the input otherwise
  CsvWriter metrics{{"step", "critic_loss", "actor_loss", "mean_q"}};
  std::size_t steps = 0;
};

/// One critic step then one actor step per iteration (the actor step is
/// skipped for discrete actions, which act by argmax). Targets are
/// hard-copied every target_update_period steps.
inline BfmResult train_bfm(const BfmConfig& cfg, const Dataset& data, const EncoderParams& encoder,
                           BfmMode mode = BfmMode::frozen_features) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train_bfm: empty dataset");
  if (encoder.arch.obs_dim != data.meta.obs_dim) {
    throw DimensionError("train_bfm", "encoder expects observations of width " + std::to_string(encoder.arch.obs_dim) +
                                          ", dataset has " + std::to_string(data.meta.obs_dim));
  }
  if (mode == BfmMode::fb_joint && cfg.critic_variant != CriticVariant::successor_measure) {
    throw std::invalid_argument("fb_joint mode trains the successor-measure critic only");
  }
  const bool discrete = data.meta.discrete();
  if (discrete && cfg.actor_variant == ActorVariant::td3bc) {
    throw std::invalid_argument("td3bc needs continuous actions; discrete environments act greedily");
  }
  Rng init_rng(derive_seed(cfg.seed, "bfm.init"));
  Rng rng(derive_seed(cfg.seed, "bfm.sample"));
  BfmResult res{BfmParams::init(cfg.arch(data.meta, encoder.arch.d), init_rng), encoder.clone()};
  BfmParams& p = res.bfm;
  EncoderParams& enc = res.encoder;
  ParamStore phi = enc.phi();
  AdamState critic_opt = AdamState::with_lr(cfg.critic_lr);
  AdamState actor_opt = AdamState::with_lr(cfg.actor_lr);
  AdamState phi_opt = AdamState::with_lr(cfg.critic_lr);

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    TransitionBatch b = sample_transitions(data, cfg.batch, rng);
    Tensor z = sample_z(rng, data, enc, cfg.z_goal_fraction, cfg.batch);
    Tensor next_a = target_next_actions(p, b.next_states, z, cfg.exploration_noise, rng);

    p.critic.zero_grad();
    if (mode == BfmMode::fb_joint) phi.zero_grad();
    Var critic_loss;
    if (mode == BfmMode::fb_joint) {
      critic_loss = add(loss_fb_joint(p, enc, b, z, next_a, cfg.gamma),
                        scale(gram_offdiag(encode(enc, constant(b.plus_states))), cfg.fb_ortho));
    } else if (cfg.critic_variant == CriticVariant::usfa) {
      critic_loss = loss_usfa(p, enc, b, z, next_a, cfg.gamma);
    } else {
      critic_loss = loss_sm(p, enc, b, z, next_a, cfg.gamma);
    }
    if (!std::isfinite(critic_loss.value().item())) {
      throw NumericError("critic loss is not finite at step " + std::to_string(step));
    }
    backward(critic_loss);
    adam_step(critic_opt, p.critic);
    if (mode == BfmMode::fb_joint) adam_step(phi_opt, phi);

    double actor_loss = 0.0;
    if (!discrete) {
      p.actor.zero_grad();
      Var al = cfg.actor_variant == ActorVariant::td3bc ? loss_policy_bc(p, b.states, b.actions, z, cfg.alpha_bc)
                                                        : loss_policy(p, b.states, z);
      actor_loss = al.value().item();
      if (!std::isfinite(actor_loss)) throw NumericError("actor loss is not finite at step " + std::to_string(step));
      backward(al);
      adam_step(actor_opt, p.actor);
    }
    ++res.steps;
    if (step % cfg.target_update_period == 0) {
      p.refresh_targets();
      if (mode == BfmMode::fb_joint) enc.refresh_target();
    }
    if (step % cfg.log_period == 0 || step == cfg.steps) {
      Tensor psi = critic_forward(p, constant(b.states), constant(b.actions), constant(z)).value();
      double q = 0.0;
      for (std::size_t i = 0; i < psi.rows(); ++i)
        for (std::size_t k = 0; k < psi.cols(); ++k) q += psi(i, k) * z(i, k);
      res.metrics.row(step, critic_loss.value().item(), actor_loss, q / static_cast<double>(psi.rows()));
    }
  }
  return res;
}

}  // namespace rldp
