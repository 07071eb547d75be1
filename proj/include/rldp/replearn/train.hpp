#pragma once

#include <rldp/diffcore/io.hpp>
#include <rldp/diffcore/optim.hpp>
#include <rldp/replearn/losses.hpp>

#include <string>
#include <utility>
#include <vector>

namespace rldp {

enum class ReprMethod { rldp, rldp_no_sn, laplacian, random };

inline const char* to_string(ReprMethod m) {
  switch (m) {
    case ReprMethod::rldp: return "rldp";
    case ReprMethod::rldp_no_sn: return "rldp_no_sn";
    case ReprMethod::laplacian: return "laplacian";
    case ReprMethod::random: return "random";
  }
  return "?";
}

inline ReprMethod repr_method_from_string(const std::string& s) {
  if (s == "rldp") return ReprMethod::rldp;
  if (s == "rldp_no_sn") return ReprMethod::rldp_no_sn;
  if (s == "laplacian") return ReprMethod::laplacian;
  if (s == "random") return ReprMethod::random;
  throw std::invalid_argument("unknown representation method '" + s + "' (expected rldp, rldp_no_sn, laplacian or random)");
}

struct ReprConfig {
  std::size_t d = 64;
  std::size_t horizon = 5;
  double lambda = 1.0;
  std::size_t target_update_period = 1000;
  ReprMethod method = ReprMethod::rldp;
  double beta = 1.0;
  double learning_rate = 1e-4;
  std::size_t batch = 256;
  std::size_t total_steps = 20000;
  std::uint64_t seed = 0;
  std::vector<std::size_t> phi_hidden{256, 256};
  std::size_t action_embed = 256;
  std::vector<std::size_t> g_hidden{512, 512};
  std::size_t trace_period = 500;
  std::size_t probe_size = 256;

  void validate() const {
    if (d < 2) throw std::invalid_argument("repr.d must be >= 2");
    if (horizon < 1) throw std::invalid_argument("repr.horizon must be >= 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("repr.lambda must be >= 0");
    if (target_update_period < 1) throw std::invalid_argument("repr.target_update_period must be >= 1");
    if (batch < 2) throw std::invalid_argument("repr.batch must be >= 2");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("repr.learning_rate must be > 0");
    if (trace_period < 1 || probe_size < 2) throw std::invalid_argument("repr: trace period >= 1 and probe size >= 2 required");
    if (method == ReprMethod::laplacian && !(beta >= 0.0)) throw std::invalid_argument("repr.beta must be >= 0");
  }

  EncoderArch arch(const DatasetMeta& meta) const {
    EncoderArch a;
    a.obs_dim = meta.obs_dim;
    a.action_dim = meta.action_input_dim();
    a.d = d;
    a.phi_hidden = phi_hidden;
    a.action_embed = action_embed;
    a.g_hidden = g_hidden;
    a.sn_on_g = method != ReprMethod::rldp_no_sn;
    return a;
  }
};

/// (step, mean pairwise cosine similarity on the probe batch).
using CollapseTrace = std::vector<std::pair<std::size_t, double>>;

struct ReprResult {
  EncoderParams encoder;
  CollapseTrace trace;
  std::size_t gradient_steps = 0;
  /// Off-diagonal Gram mean of the probe embeddings after training.
  double final_ortho = 0.0;
};

inline CsvWriter trace_csv(const CollapseTrace& trace) {
  CsvWriter csv({"step", "mean_cosine"});
  for (const auto& [step, cos] : trace) csv.row(step, cos);
  return csv;
}

/// Fixed probe batch of uniformly drawn dataset states, seeded independently
/// of training so traces are comparable across methods.
inline Tensor probe_states(const Dataset& data, std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "repr.probe"));
  return sample_states(data, n, rng);
}

/// Adam on the selected objective; phi_target is hard-copied every
/// target_update_period steps; the probe cosine is recorded at step 0 and
/// every trace_period steps. method=random returns the initialization.
inline ReprResult train_representation(const ReprConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train_representation: empty dataset");
  Rng init_rng(derive_seed(cfg.seed, "repr.init"));
  ReprResult res{EncoderParams::init(cfg.arch(data.meta), init_rng), {}, 0, 0.0};
  const Tensor probe = probe_states(data, cfg.probe_size, cfg.seed);
  auto record = [&](std::size_t step) { res.trace.emplace_back(step, cosine_similarity_mean(encode(res.encoder, probe))); };
  record(0);
  if (cfg.method != ReprMethod::random) {
    const std::size_t horizon = cfg.method == ReprMethod::laplacian ? 1 : cfg.horizon;
    SegmentSampler sampler(data, horizon);
    Rng rng(derive_seed(cfg.seed, "repr.sample"));
    AdamState adam = AdamState::with_lr(cfg.learning_rate);
    EncoderParams& enc = res.encoder;
    for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
      SegmentBatch seg = sampler.sample(cfg.batch, rng);
      enc.online.zero_grad();
      Var loss;
      if (cfg.method == ReprMethod::laplacian) {
        loss = loss_laplacian(enc, seg.states[0], seg.states[1], sample_states(data, cfg.batch, rng), cfg.beta);
      } else {
        loss = loss_rldp(enc, seg, cfg.lambda);
      }
      if (!std::isfinite(loss.value().item())) {
        throw NumericError("representation loss is not finite at step " + std::to_string(step));
      }
      backward(loss);
      adam_step(adam, enc.online);
      ++res.gradient_steps;
      if (step % cfg.target_update_period == 0) enc.refresh_target();
      if (step % cfg.trace_period == 0) record(step);
    }
  }
  res.final_ortho = gram_offdiag(constant(encode(res.encoder, probe))).value().item();
  return res;
}

}  // namespace rldp
