#pragma once

// Encoder whose latent model is the true gridworld dynamics: phi(s) is the
// one-hot observation itself (sqrt(n) e_s), and g has one hidden unit per
// (s, a) that fires exactly when h = phi(s) and the action is a, writing
// phi(step(s, a)) to the output.

#include <rldp/envdata/gridworld.hpp>
#include <rldp/replearn/encoder.hpp>

namespace rldp::check {

inline EncoderParams identity_grid_encoder(const GridWorld& g) {
  const std::size_t n = g.num_cells(), na = g.num_actions();
  const double root = std::sqrt(static_cast<double>(n));
  EncoderArch arch;
  arch.obs_dim = n;
  arch.action_dim = na;
  arch.d = n;
  arch.phi_hidden = {};
  arch.action_embed = na;
  arch.g_hidden = {n * na};
  Rng rng(0);
  EncoderParams p = EncoderParams::init(arch, rng);
  auto fill = [&](const std::string& name, auto&& value) {
    Tensor& t = p.online.get(name).mutable_value();
    for (std::size_t r = 0; r < t.rows(); ++r)
      for (std::size_t c = 0; c < t.cols(); ++c) t(r, c) = value(r, c);
  };
  // Weights are (inputs x outputs).
  fill("phi.l0.weight", [](std::size_t r, std::size_t c) { return r == c ? 1.0 : 0.0; });
  fill("phi.l0.bias", [](std::size_t, std::size_t) { return 0.0; });
  fill("A.l0.weight", [](std::size_t r, std::size_t c) { return r == c ? 1.0 : 0.0; });
  fill("A.l0.bias", [](std::size_t, std::size_t) { return 0.0; });
  // Hidden unit u = s * na + a: h_s / sqrt(n) + A_a - 1.
  fill("g.l0.weight", [&](std::size_t r, std::size_t u) {
    if (r < n) return r == u / na ? 1.0 / root : 0.0;
    return r - n == u % na ? 1.0 : 0.0;
  });
  fill("g.l0.bias", [](std::size_t, std::size_t) { return -1.0; });
  fill("g.l1.weight", [&](std::size_t u, std::size_t c) { return g.step(u / na, u % na) == c ? root : 0.0; });
  fill("g.l1.bias", [](std::size_t, std::size_t) { return 0.0; });
  fill("w.weight", [](std::size_t r, std::size_t c) { return r == c ? 1.0 : 0.0; });
  p.refresh_target();
  return p;
}

}  // namespace rldp::check
