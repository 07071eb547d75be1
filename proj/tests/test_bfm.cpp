#include <rldp/bfm/train.hpp>
#include <rldp/envdata/generate.hpp>

#include "support/gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace rldp;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

EncoderParams small_encoder(std::size_t obs, std::size_t d, Rng& rng) {
  EncoderArch a;
  a.obs_dim = obs;
  a.action_dim = 2;
  a.d = d;
  a.phi_hidden = {6};
  a.action_embed = 3;
  a.g_hidden = {5};
  return EncoderParams::init(a, rng);
}

BfmArch small_bfm_arch(std::size_t obs, std::size_t act, std::size_t num_actions, std::size_t d) {
  BfmArch a;
  a.obs_dim = obs;
  a.action_dim = act;
  a.num_actions = num_actions;
  a.d = d;
  a.embed_hidden = 6;
  a.embed_dim = 4;
  a.head_hidden = 5;
  a.actor_hidden = 5;
  return a;
}

TransitionBatch random_batch(std::size_t b, std::size_t obs, std::size_t act, Rng& rng) {
  TransitionBatch t;
  t.indices.assign(b, 0);
  t.plus_indices.assign(b + 1, 0);
  t.states = random_matrix(b, obs, rng);
  t.actions = random_matrix(b, act, rng);
  t.next_states = random_matrix(b, obs, rng);
  t.plus_states = random_matrix(b + 1, obs, rng);
  t.not_done.assign(b, 1.0);
  t.not_done[1] = 0.0;
  return t;
}

void perturb(ParamStore& store, Rng& rng, double amount) {
  for (auto& [_, v] : store)
    for (double& x : v.mutable_value().values()) x += uniform(rng, -amount, amount);
}

Dataset grid_data() {
  Environment env = GridWorld::four_rooms();
  GenerationOptions opt;
  opt.episodes = 20;
  opt.episode_len = 30;
  opt.seed = 2;
  opt.policy = BehaviorPolicy::count_bonus;
  return generate_dataset(env, opt);
}

Dataset pointmass_data() {
  Environment env = PointMass::four_rooms();
  GenerationOptions opt;
  opt.episodes = 10;
  opt.episode_len = 20;
  opt.seed = 2;
  return generate_dataset(env, opt);
}

BfmConfig tiny_config() {
  BfmConfig c;
  c.batch = 16;
  c.steps = 0;
  c.embed_hidden = 8;
  c.embed_dim = 6;
  c.head_hidden = 8;
  c.actor_hidden = 8;
  c.target_update_period = 10;
  c.log_period = 10;
  return c;
}

EncoderParams encoder_for(const Dataset& data, std::size_t d = 4) {
  Rng rng(11);
  EncoderArch a;
  a.obs_dim = data.meta.obs_dim;
  a.action_dim = data.meta.action_input_dim();
  a.d = d;
  a.phi_hidden = {8};
  a.action_embed = 4;
  a.g_hidden = {8};
  return EncoderParams::init(a, rng);
}

}  // namespace

// ---- Q and greedy action ----------------------------------------------------

TEST(QValue, DotProductPerRow) {
  Var psi = constant(Tensor::from_rows({{1, 2}, {0.5, -1}}));
  Var z = constant(Tensor::from_rows({{3, -1}, {0, 0}}));
  Tensor q = q_value(psi, z).value();
  EXPECT_DOUBLE_EQ(q[0], 1.0);
  EXPECT_DOUBLE_EQ(q[1], 0.0);
}

TEST(QValue, LinearInZForFixedPsi) {
  Rng rng(4);
  Var psi = constant(random_matrix(5, 3, rng));
  Tensor z1 = random_matrix(5, 3, rng), z2 = random_matrix(5, 3, rng), mix = Tensor::matrix(5, 3);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * z1[i] - 0.5 * z2[i];
  Tensor q1 = q_value(psi, constant(z1)).value(), q2 = q_value(psi, constant(z2)).value();
  Tensor qm = q_value(psi, constant(mix)).value();
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(qm[i], 2.0 * q1[i] - 0.5 * q2[i], 1e-14);
}

TEST(Greedy, ArgmaxAndTies) {
  EXPECT_EQ(argmax_rows(Tensor::from_rows({{1, 2}})), std::vector<std::size_t>{1});
  EXPECT_EQ(argmax_rows(Tensor::from_rows({{3, 3, 1}, {0, 5, 5}})), (std::vector<std::size_t>{0, 1}));
}

TEST(Greedy, InvariantToPositiveScalingAndShift) {
  Rng rng(11);
  Tensor q = random_matrix(50, 4, rng);
  Tensor q2 = q;
  for (double& v : q2.values()) v = 7.5 * v - 3.0;
  EXPECT_EQ(argmax_rows(q), argmax_rows(q2));
}

TEST(Greedy, QAllActionsMatchesPerActionForward) {
  Rng rng(6);
  auto p = BfmParams::init(small_bfm_arch(3, 4, 4, 3), rng);
  Tensor s = random_matrix(5, 3, rng), z = random_matrix(5, 3, rng);
  Tensor q = q_all_actions(p, s, z);
  for (std::size_t a = 0; a < 4; ++a) {
    std::vector<std::size_t> act(5, a);
    Tensor qa = q_value(critic_forward(p, constant(s), constant(one_hot_actions(act, 4)), constant(z)), constant(z)).value();
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(q(i, a), qa[i], 1e-14);
  }
  auto g = greedy_actions(p, s, z);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t a = 0; a < 4; ++a) EXPECT_GE(q(i, g[i]), q(i, a));
}

TEST(Actor, DiscreteModelHasNoActor) {
  Rng rng(1);
  auto p = BfmParams::init(small_bfm_arch(3, 4, 4, 3), rng);
  EXPECT_TRUE(p.actor.empty());
  EXPECT_THROW(actor_forward(p, constant(Tensor::matrix(1, 3)), constant(Tensor::matrix(1, 3))), std::logic_error);
}

// ---- z sampling -------------------------------------------------------------

TEST(SampleZ, GoalEncodedRowsAreEmbeddingsOfDatasetStates) {
  auto data = grid_data();
  auto enc = encoder_for(data);
  Rng rng(3);
  Tensor z = sample_z(rng, data, enc, 1.0, 64);
  Tensor all = encode(enc, Tensor(Shape{data.size(), data.meta.obs_dim}, data.states_block()));
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double n2 = 0.0;
    for (double v : z.row(i)) n2 += v * v;
    EXPECT_NEAR(std::sqrt(n2), 2.0, 1e-10);
    bool found = false;
    for (std::size_t r = 0; r < all.rows() && !found; ++r) found = std::equal(z.row(i).begin(), z.row(i).end(), all.row(r).begin());
    EXPECT_TRUE(found) << "row " << i;
  }
}

TEST(SampleZ, PriorIsCenteredOnTheSphere) {
  auto data = grid_data();
  auto enc = encoder_for(data, 4);
  Rng rng(9);
  const std::size_t n = 100000;
  Tensor z = sample_z(rng, data, enc, 0.0, n);
  std::vector<double> m(4, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double n2 = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      m[k] += z(i, k);
      n2 += z(i, k) * z(i, k);
    }
    ASSERT_NEAR(n2, 4.0, 1e-10);
  }
  // Each coordinate has variance |z|^2 / d = 1, so the mean has sd 1/sqrt(n).
  for (double v : m) EXPECT_LT(std::abs(v / n), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(SampleZ, DeterministicGivenGenerator) {
  auto data = grid_data();
  auto enc = encoder_for(data);
  Rng a(5), b(5);
  EXPECT_EQ(sample_z(a, data, enc, 0.5, 100), sample_z(b, data, enc, 0.5, 100));
}

// ---- successor-measure loss -------------------------------------------------

TEST(MeasureLoss, MatchesPairwiseLoop) {
  Rng rng(21);
  const std::size_t b = 5, m = 7, d = 3;
  Tensor psi = random_matrix(b, d, rng), pn = random_matrix(b, d, rng), pp = random_matrix(m, d, rng);
  Tensor tpsi = random_matrix(b, d, rng), tpp = random_matrix(m, d, rng);
  std::vector<double> nd{1, 0, 1, 1, 0};
  const double gamma = 0.9;
  double attract = 0.0, td = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t k = 0; k < d; ++k) attract += psi(i, k) * pn(i, k);
    for (std::size_t j = 0; j < m; ++j) {
      double pred = 0.0, tgt = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        pred += psi(i, k) * pp(j, k);
        tgt += tpsi(i, k) * tpp(j, k);
      }
      const double e = pred - gamma * nd[i] * tgt;
      td += e * e;
    }
  }
  const double expect = -attract / b + 0.5 * td / static_cast<double>(b * m);
  EXPECT_NEAR(measure_loss(constant(psi), constant(pn), constant(pp), tpsi, tpp, nd, gamma).value().item(), expect, 1e-12);
}

TEST(MeasureLoss, ZeroPsiGivesZero) {
  Rng rng(2);
  Tensor pn = random_matrix(4, 3, rng), pp = random_matrix(6, 3, rng);
  EXPECT_EQ(measure_loss(constant(Tensor::matrix(4, 3)), constant(pn), constant(pp), Tensor::matrix(4, 3), pp,
                         std::vector<double>(4, 1.0), 0.98)
                .value()
                .item(),
            0.0);
}

// Two states, one action, one-hot features, gamma = 0. The population
// minimizer is m(s, x) = P(x | s) / rho(x); with batch frequencies equal
// to the probabilities the empirical loss is stationary there.
TEST(MeasureLoss, GammaZeroStationaryAtOneStepDensity) {
  // s0 -> s0 once, s0 -> s1 three times; s1 -> s0 once, s1 -> s1 once.
  const std::vector<std::size_t> src{0, 0, 0, 0, 1, 1}, dst{0, 1, 1, 1, 0, 1};
  const std::vector<std::size_t> plus{0, 1, 1};  // rho = (1/3, 2/3)
  const double p[2][2] = {{0.25, 0.75}, {0.5, 0.5}}, rho[2] = {1.0 / 3.0, 2.0 / 3.0};
  ParamStore store;
  store.add("w", Tensor::from_rows({{p[0][0] / rho[0], p[0][1] / rho[1]}, {p[1][0] / rho[0], p[1][1] / rho[1]}}));
  Tensor sel = Tensor::matrix(src.size(), 2), next = Tensor::matrix(dst.size(), 2), pl = Tensor::matrix(3, 2);
  for (std::size_t i = 0; i < src.size(); ++i) {
    sel(i, src[i]) = 1.0;
    next(i, dst[i]) = 1.0;
  }
  for (std::size_t j = 0; j < plus.size(); ++j) pl(j, plus[j]) = 1.0;
  auto loss = [&] {
    Var psi = matmul(constant(sel), store.get("w"));
    return measure_loss(psi, constant(next), constant(pl), Tensor::matrix(src.size(), 2), pl,
                        std::vector<double>(src.size(), 1.0), 0.0);
  };
  store.zero_grad();
  backward(loss());
  for (double g : store.get("w").grad().values()) EXPECT_NEAR(g, 0.0, 1e-14);
  // Any perturbation raises the loss (the objective is convex in w).
  const double at = loss().value().item();
  store.get("w").mutable_value()[1] += 0.1;
  EXPECT_GT(loss().value().item(), at);
}

// ---- USFA loss --------------------------------------------------------------

TEST(UsfaLoss, GammaZeroTargetsTheStateFeatures) {
  Rng rng(8);
  Tensor phi = random_matrix(4, 3, rng), junk = random_matrix(4, 3, rng);
  std::vector<double> nd(4, 1.0);
  EXPECT_NEAR(usfa_loss(constant(phi), phi, junk, nd, 0.0).value().item(), 0.0, 1e-30);
  Tensor off = phi;
  off[0] += 0.3;
  EXPECT_NEAR(usfa_loss(constant(off), phi, junk, nd, 0.0).value().item(), 0.09 / 12.0, 1e-15);
}

TEST(UsfaLoss, TwoStateCycleFixedPointHasZeroLoss) {
  // s0 -> s1 -> s0: psi0 = (phi0 + g phi1) / (1 - g^2), psi1 = (phi1 + g phi0) / (1 - g^2).
  const double g = 0.9;
  const std::vector<double> phi0{1, 0.5}, phi1{-0.2, 2};
  Tensor psi = Tensor::matrix(2, 2), phi = Tensor::from_rows({phi0, phi1});
  for (std::size_t k = 0; k < 2; ++k) {
    psi(0, k) = (phi0[k] + g * phi1[k]) / (1 - g * g);
    psi(1, k) = (phi1[k] + g * phi0[k]) / (1 - g * g);
  }
  Tensor next = Tensor::from_rows({{psi(1, 0), psi(1, 1)}, {psi(0, 0), psi(0, 1)}});
  EXPECT_NEAR(usfa_loss(constant(psi), phi, next, std::vector<double>{1, 1}, g).value().item(), 0.0, 1e-24);
}

TEST(UsfaLoss, DoneCutsTheBootstrap) {
  Tensor phi = Tensor::from_rows({{1, 1}}), next = Tensor::from_rows({{5, 5}});
  EXPECT_NEAR(usfa_loss(constant(phi), phi, next, std::vector<double>{0.0}, 0.9).value().item(), 0.0, 1e-30);
}

// ---- TD3+BC -----------------------------------------------------------------

TEST(PolicyBc, LambdaFromMeanAbsQ) {
  EXPECT_DOUBLE_EQ(bc_lambda(Tensor::from_rows({{1}, {-3}}), 2.5), 1.25);
  EXPECT_DOUBLE_EQ(bc_lambda(Tensor::matrix(3, 1), 2.5), 2.5 / kBcMinAbsQ);
}

TEST(PolicyBc, ZeroQLeavesBehaviourCloning) {
  Tensor pi = Tensor::from_rows({{0.5, -0.5}, {0, 1}}), data = Tensor::from_rows({{0, 0}, {1, 1}});
  const double l = policy_bc_loss(constant(Tensor::matrix(2, 1)), constant(pi), data, 2.5).value().item();
  EXPECT_DOUBLE_EQ(l, (0.25 + 0.25 + 1.0 + 0.0) / 4.0);
}

TEST(PolicyBc, LambdaIsAConstantInTheGradient) {
  ParamStore s;
  s.add("q", Tensor::from_rows({{1}, {-3}}));
  s.add("a", Tensor::from_rows({{0.0}, {0.0}}));
  backward(policy_bc_loss(s.get("q"), s.get("a"), Tensor::from_rows({{0.0}, {0.0}}), 2.5));
  // d/dq (-lambda mean q) with lambda = 1.25 held fixed.
  EXPECT_DOUBLE_EQ(s.get("q").grad()[0], -0.625);
  EXPECT_DOUBLE_EQ(s.get("q").grad()[1], -0.625);
}

TEST(PolicyBc, QuadraticBowlReachesClosedFormOptimum) {
  // Q(a) = -(a - c)^2 with data action d: the minimizer of
  // lambda (a - c)^2 + (a - d)^2 is (lambda c + d) / (1 + lambda).
  const double c = 2.0, d = -1.0, lambda = 3.0;
  ParamStore s;
  s.add("a", Tensor::from_rows({{0.0}, {0.5}}));
  const Tensor data = Tensor::from_rows({{d}, {d}});
  for (int it = 0; it < 500; ++it) {
    s.zero_grad();
    Var q = scale(square(sub(s.get("a"), constant(Tensor::from_rows({{c}, {c}})))), -1.0);
    backward(policy_bc_loss(q, s.get("a"), data, 2.5, lambda));
    sgd_step(s, 0.05);
  }
  for (double v : s.get("a").value().values()) EXPECT_NEAR(v, (lambda * c + d) / (1.0 + lambda), 1e-10);
}

// ---- FB joint ---------------------------------------------------------------

TEST(FbJoint, EqualsFrozenLossWhenTargetMatchesOnline) {
  Rng rng(13);
  auto enc = small_encoder(3, 3, rng);
  auto p = BfmParams::init(small_bfm_arch(3, 2, 0, 3), rng);
  auto b = random_batch(6, 3, 2, rng);
  Tensor z = random_matrix(6, 3, rng), na = random_matrix(6, 2, rng);
  EXPECT_NEAR(loss_fb_joint(p, enc, b, z, na, 0.9).value().item(), loss_sm(p, enc, b, z, na, 0.9).value().item(), 1e-14);
}

TEST(FbJoint, FeaturesReceiveGradientOnlyInJointMode) {
  Rng rng(14);
  auto enc = small_encoder(3, 3, rng);
  auto p = BfmParams::init(small_bfm_arch(3, 2, 0, 3), rng);
  auto b = random_batch(6, 3, 2, rng);
  Tensor z = random_matrix(6, 3, rng), na = random_matrix(6, 2, rng);
  auto grad_norm = [&] {
    double n = 0.0;
    for (const auto& [_, g] : enc.online.gradients())
      for (double v : g.values()) n += v * v;
    return n;
  };
  enc.online.zero_grad();
  backward(loss_sm(p, enc, b, z, na, 0.9));
  EXPECT_EQ(grad_norm(), 0.0);
  enc.online.zero_grad();
  backward(loss_fb_joint(p, enc, b, z, na, 0.9));
  EXPECT_GT(grad_norm(), 0.0);
}

// ---- gradient checks --------------------------------------------------------

TEST(GradientCheck, BfmLosses) {
  for (std::uint64_t point = 0; point < 3; ++point) {
    Rng rng(100 + point);
    auto enc = small_encoder(3, 3, rng);
    perturb(enc.target, rng, 0.2);
    auto p = BfmParams::init(small_bfm_arch(3, 2, 0, 3), rng);
    perturb(p.critic_target, rng, 0.2);
    auto b = random_batch(5, 3, 2, rng);
    Tensor z = random_matrix(5, 3, rng), na = random_matrix(5, 2, rng);
    auto check = [&](const char* what, ParamStore& params, auto fn) {
      auto res = check::gradcheck(params, fn);
      EXPECT_LT(res.max_rel_error, 1e-4) << what << " point " << point << " worst " << res.worst_param << "["
                                        << res.worst_index << "] a=" << res.analytic << " n=" << res.numeric;
    };
    check("sm", p.critic, [&] { return loss_sm(p, enc, b, z, na, 0.9); });
    check("usfa", p.critic, [&] { return loss_usfa(p, enc, b, z, na, 0.9); });
    check("fb_joint critic", p.critic, [&] { return loss_fb_joint(p, enc, b, z, na, 0.9); });
    check("fb_joint phi", enc.online, [&] { return loss_fb_joint(p, enc, b, z, na, 0.9); });
    check("policy", p.actor, [&] { return loss_policy(p, b.states, z); });
    Var zc = constant(z);
    const double lam = bc_lambda(
        q_value(critic_forward(p, constant(b.states), actor_forward(p, constant(b.states), zc), zc), zc).value(), 2.5);
    check("td3bc", p.actor, [&] { return loss_policy_bc(p, b.states, b.actions, z, 2.5, lam); });
  }
}

// ---- training ---------------------------------------------------------------

TEST(TrainBfm, ZeroStepsReturnsInitialization) {
  auto data = grid_data();
  auto enc = encoder_for(data);
  auto c = tiny_config();
  auto res = train_bfm(c, data, enc);
  EXPECT_EQ(res.steps, 0u);
  EXPECT_EQ(res.metrics.str(), "step,critic_loss,actor_loss,mean_q\n");
  Rng rng(derive_seed(c.seed, "bfm.init"));
  auto init = BfmParams::init(c.arch(data.meta, enc.arch.d), rng);
  for (const auto& [name, v] : init.critic) EXPECT_EQ(v.value(), res.bfm.critic.get(name).value()) << name;
}

TEST(TrainBfm, DeterministicMetricsAndTargetSchedule) {
  auto data = grid_data();
  auto enc = encoder_for(data);
  auto c = tiny_config();
  c.steps = 25;
  auto a = train_bfm(c, data, enc);
  auto b = train_bfm(c, data, enc);
  EXPECT_EQ(a.metrics.str(), b.metrics.str());
  // Rows at 10, 20 and the final step.
  EXPECT_EQ(std::count(a.metrics.str().begin(), a.metrics.str().end(), '\n'), 4);
  c.steps = 20;
  auto at20 = train_bfm(c, data, enc);
  EXPECT_EQ(a.bfm.critic_target.get("psi.head.l0.weight").value(), at20.bfm.critic.get("psi.head.l0.weight").value());
  // Frozen features stay untouched.
  for (const auto& [name, v] : enc.online) EXPECT_EQ(v.value(), a.encoder.online.get(name).value());
}

TEST(TrainBfm, JointModeMovesTheFeatures) {
  auto data = grid_data();
  auto enc = encoder_for(data);
  auto c = tiny_config();
  c.steps = 5;
  auto res = train_bfm(c, data, enc, BfmMode::fb_joint);
  EXPECT_NE(res.encoder.online.get("phi.l0.weight").value(), enc.online.get("phi.l0.weight").value());
}

TEST(TrainBfm, ContinuousVariantsStayFinite) {
  auto data = pointmass_data();
  auto enc = encoder_for(data);
  for (ActorVariant v : {ActorVariant::greedy, ActorVariant::td3bc}) {
    for (CriticVariant cv : {CriticVariant::successor_measure, CriticVariant::usfa}) {
      auto c = tiny_config();
      c.steps = 30;
      c.actor_variant = v;
      c.critic_variant = cv;
      auto res = train_bfm(c, data, enc);
      for (const auto& [_, p] : res.bfm.actor) EXPECT_TRUE(p.value().all_finite());
      for (const auto& [_, p] : res.bfm.critic) EXPECT_TRUE(p.value().all_finite());
    }
  }
}

TEST(TrainBfm, ActorStepsRaiseQOnAFixedCritic) {
  Rng rng(17);
  auto p = BfmParams::init(small_bfm_arch(3, 2, 0, 3), rng);
  Tensor s = random_matrix(32, 3, rng), z = random_matrix(32, 3, rng);
  AdamState opt = AdamState::with_lr(1e-2);
  const double before = -loss_policy(p, s, z).value().item();
  for (int i = 0; i < 200; ++i) {
    p.actor.zero_grad();
    backward(loss_policy(p, s, z));
    adam_step(opt, p.actor);
  }
  EXPECT_GT(-loss_policy(p, s, z).value().item(), before);
}

TEST(TrainBfm, RejectsInvalidSetups) {
  auto data = grid_data();
  auto enc = encoder_for(data);
  auto c = tiny_config();
  c.actor_variant = ActorVariant::td3bc;
  EXPECT_THROW(train_bfm(c, data, enc), std::invalid_argument);
  c = tiny_config();
  c.critic_variant = CriticVariant::usfa;
  EXPECT_THROW(train_bfm(c, data, enc, BfmMode::fb_joint), std::invalid_argument);
  c = tiny_config();
  c.gamma = 1.0;
  EXPECT_THROW(train_bfm(c, data, enc), std::invalid_argument);
  EXPECT_THROW(train_bfm(tiny_config(), pointmass_data(), enc), DimensionError);
}

TEST(BfmCheckpoint, RoundTrip) {
  Rng rng(3);
  auto p = BfmParams::init(small_bfm_arch(3, 2, 0, 3), rng);
  perturb(p.critic, rng, 0.1);
  const auto dir = std::filesystem::temp_directory_path() / "rldp_test_bfm";
  std::filesystem::remove_all(dir);
  save_bfm(dir / "bfm.json", p);
  auto back = load_bfm(dir / "bfm.json");
  EXPECT_EQ(back.arch, p.arch);
  EXPECT_EQ(back.critic.names(), p.critic.names());
  EXPECT_EQ(back.actor_target.names(), p.actor_target.names());
  for (const auto& [name, v] : p.critic)
    for (std::size_t i = 0; i < v.value().size(); ++i) EXPECT_EQ(back.critic.get(name).value()[i], to_f32(v.value()[i]));
  EXPECT_NE(back.critic_target.get("psi.head.l0.weight").value(), back.critic.get("psi.head.l0.weight").value());
}
