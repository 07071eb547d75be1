// Acceptance suite: one PASS/FAIL line per criterion on stdout (progress on
// stderr), exit status = number of failures. `--only 3,5` restricts the run.

#include <rldp/cli/commands.hpp>

#include "support/gradcheck.hpp"
#include "support/identity_encoder.hpp"
#include "support/tabular_harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <set>

using namespace rldp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

void perturb(ParamStore& store, Rng& rng, double amount) {
  for (auto& [_, v] : store)
    for (double& x : v.mutable_value().values()) x += uniform(rng, -amount, amount);
}

TabularPolicy random_policy(std::size_t ns, std::size_t na, std::uint64_t seed) {
  Rng rng(seed);
  TabularPolicy p{Eigen::MatrixXd(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(na))};
  for (Eigen::Index s = 0; s < p.probs.rows(); ++s) {
    for (Eigen::Index a = 0; a < p.probs.cols(); ++a) p.probs(s, a) = uniform(rng, 0.05, 1.0);
    p.probs.row(s) /= p.probs.row(s).sum();
  }
  return p;
}

Dataset four_room_data(std::uint64_t seed) {
  GenerationOptions opt;
  opt.policy = BehaviorPolicy::count_bonus;
  opt.episodes = 200;
  opt.episode_len = 50;
  opt.seed = seed;
  opt.start_cell = Cell{1, 1};
  return generate_dataset(GridWorld::four_rooms(), opt);
}

ReprConfig desk_repr(std::uint64_t seed) {
  ReprConfig c;
  c.d = 32;
  c.phi_hidden = {64};
  c.action_embed = 32;
  c.g_hidden = {64};
  c.batch = 64;
  c.horizon = 5;
  c.lambda = 1.0;
  c.learning_rate = 3e-4;
  c.total_steps = 20000;
  c.seed = seed;
  return c;
}

// ---- AC1 --------------------------------------------------------------------

Outcome ac1_gradients() {
  constexpr int kPoints = 10;
  std::map<std::string, double> worst;
  for (int point = 0; point < kPoints; ++point) {
    Rng rng(1000 + static_cast<std::uint64_t>(point));
    EncoderArch ea;
    ea.obs_dim = 4;
    ea.action_dim = 2;
    ea.d = 5;
    ea.phi_hidden = {7};
    ea.action_embed = 3;
    ea.g_hidden = {6};
    ea.sn_on_g = point % 2 == 0;
    auto enc = EncoderParams::init(ea, rng);
    perturb(enc.target, rng, 0.2);
    SegmentBatch seg;
    seg.horizon = 3;
    seg.starts.assign(6, 0);
    for (std::size_t t = 0; t <= 3; ++t) seg.states.push_back(random_matrix(6, 4, rng));
    for (std::size_t t = 0; t < 3; ++t) seg.actions.push_back(random_matrix(6, 2, rng));
    const Tensor next = random_matrix(6, 4, rng), others = random_matrix(6, 4, rng);

    BfmArch ba;
    ba.obs_dim = 4;
    ba.action_dim = 2;
    ba.d = 5;
    ba.embed_hidden = 6;
    ba.embed_dim = 4;
    ba.head_hidden = 5;
    ba.actor_hidden = 5;
    auto p = BfmParams::init(ba, rng);
    perturb(p.critic_target, rng, 0.2);
    TransitionBatch b;
    b.indices.assign(5, 0);
    b.plus_indices.assign(6, 0);
    b.states = random_matrix(5, 4, rng);
    b.actions = random_matrix(5, 2, rng);
    b.next_states = random_matrix(5, 4, rng);
    b.plus_states = random_matrix(6, 4, rng);
    b.not_done.assign(5, 1.0);
    b.not_done[point % 5] = 0.0;
    const Tensor z = random_matrix(5, 5, rng), na = random_matrix(5, 2, rng);
    const double gamma = uniform(rng, 0.5, 0.99), lambda = uniform(rng, 0.1, 2.0);

    auto check = [&](const std::string& what, ParamStore& params, const std::function<Var()>& fn) {
      const double e = check::gradcheck(params, fn).max_rel_error;
      worst[what] = std::max(worst[what], e);
    };
    check("dynamics", enc.online, [&] { return loss_dynamics(enc, seg); });
    check("ortho", enc.online, [&] { return loss_ortho(enc, seg.states[0]); });
    check("rldp", enc.online, [&] { return loss_rldp(enc, seg, lambda); });
    check("laplacian", enc.online, [&] { return loss_laplacian(enc, seg.states[0], next, others, lambda); });
    check("measure", p.critic, [&] { return loss_sm(p, enc, b, z, na, gamma); });
    check("usfa", p.critic, [&] { return loss_usfa(p, enc, b, z, na, gamma); });
    check("fb_joint", p.critic, [&] { return loss_fb_joint(p, enc, b, z, na, gamma); });
    check("fb_joint_phi", enc.online, [&] { return loss_fb_joint(p, enc, b, z, na, gamma); });
    check("policy", p.actor, [&] { return loss_policy(p, b.states, z); });
    const Var zc = constant(z);
    const double lam = bc_lambda(q_value(critic_forward(p, constant(b.states), actor_forward(p, constant(b.states), zc), zc), zc).value(), 2.5);
    check("td3bc", p.actor, [&] { return loss_policy_bc(p, b.states, b.actions, z, 2.5, lam); });
  }
  double max_err = 0.0;
  std::string detail, name;
  for (const auto& [k, v] : worst) {
    if (v > max_err) {
      max_err = v;
      name = k;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu losses x %d points, max rel error %.2e (%s)", worst.size(), kPoints, max_err, name.c_str());
  return {max_err < 1e-4, buf};
}

// ---- AC2 --------------------------------------------------------------------

Outcome ac2_fixed_point() {
  const GridWorld g = GridWorld::four_rooms();
  const TabularMdp m = grid_mdp(g, 0.98);
  const TabularPolicy pi = random_policy(m.n_states, m.n_actions, 21);
  const check::TabularProblem prob(m.n_states, m.n_actions, check::deterministic_transitions(m));
  const Eigen::MatrixXd dens = check::train_tabular_sm(prob, pi, m.gamma, 3000);
  const double err = sm_fixed_point_check(m, pi, dens);
  char buf[120];
  std::snprintf(buf, sizeof buf, "L_inf(m rho - M) = %.3e over %zu (s,a) x %zu states", err, m.n_states * m.n_actions, m.n_states);
  return {err < 5e-2, buf};
}

// ---- AC3 --------------------------------------------------------------------

Outcome ac3_collapse() {
  const Dataset data = four_room_data(1);
  double gap = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    double final_cos[2];
    for (int i = 0; i < 2; ++i) {
      ReprConfig c = desk_repr(seed);
      c.lambda = i == 0 ? 0.0 : 1.0;
      final_cos[i] = train_representation(c, data).trace.back().second;
    }
    gap += (final_cos[0] - final_cos[1]) / 4.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.3f/%.3f", seed ? " " : "", final_cos[0], final_cos[1]);
    per_seed += buf;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "mean cosine gap (lambda 0 - lambda 1) = %.3f; per seed %s", gap, per_seed.c_str());
  return {gap >= 0.2, buf};
}

// ---- AC4 --------------------------------------------------------------------

Outcome ac4_sphere(const EncoderParams& trained) {
  const std::size_t n = 10000;
  Rng rng(44);
  const GridWorld g = GridWorld::four_rooms();
  // Grid observations and arbitrary vectors of the same width.
  Tensor states = random_matrix(n, trained.arch.obs_dim, rng, -3.0, 3.0);
  for (std::size_t i = 0; i < n; i += 2) {
    const auto obs = g.observe(uniform_index(rng, g.num_cells()));
    std::copy(obs.begin(), obs.end(), states.row(i).begin());
  }
  std::vector<std::size_t> acts(n);
  for (auto& a : acts) a = uniform_index(rng, g.num_actions());
  const Tensor actions = one_hot_actions(acts, g.num_actions());
  const double root = std::sqrt(static_cast<double>(trained.arch.d));
  double worst = 0.0;
  auto scan = [&](const Tensor& t) {
    for (std::size_t r = 0; r < t.rows(); ++r) {
      double s = 0.0;
      for (double v : t.row(r)) s += v * v;
      worst = std::max(worst, std::abs(std::sqrt(s) - root));
    }
  };
  const Var h = constant(encode(trained, states));
  scan(h.value());
  for (const Var& pred : rollout_latent(trained, h, std::vector<Var>(3, constant(actions)))) scan(pred.value());
  char buf[120];
  std::snprintf(buf, sizeof buf, "max | ||x|| - sqrt(d) | = %.2e over %zu embeddings and 3 x %zu predicted latents", worst, n, n);
  return {worst < 1e-10, buf};
}

// ---- AC5 --------------------------------------------------------------------

struct GoalRun {
  double success = 0.0;
  std::string per_task;
};

BfmConfig desk_bfm() {
  BfmConfig c;
  c.gamma = 0.98;
  c.z_goal_fraction = 1.0;
  c.batch = 128;
  c.steps = 20000;
  c.target_update_period = 250;
  c.critic_lr = 1e-3;
  c.embed_hidden = 64;
  c.embed_dim = 64;
  c.head_hidden = 64;
  c.log_period = 1000;
  c.seed = 5;
  return c;
}

GoalRun goal_reaching(const Dataset& data, const EncoderParams& enc) {
  const Environment env = GridWorld::four_rooms();
  const BfmResult bfm = train_bfm(desk_bfm(), data, enc);
  GoalRun out;
  std::size_t i = 0;
  for (Cell goal : {Cell{2, 2}, Cell{9, 3}, Cell{3, 9}, Cell{9, 10}}) {
    const RewardSpec task = RewardSpec::goal(goal);
    Rng rng(derive_seed(50, i));
    const Tensor z = infer_z_mean(data, enc, env, task, 10000, rng);
    EvalOptions opt;
    opt.episodes = 50;
    opt.seed = derive_seed(51, i++);
    const double s = evaluate(env, bfm_policy(bfm.bfm, z), task, opt).success_rate();
    out.success += s / 4.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.2f", out.per_task.empty() ? "" : "/", s);
    out.per_task += buf;
  }
  return out;
}

Outcome ac5_goal_reaching(EncoderParams* trained_out) {
  const Dataset data = four_room_data(1);
  ReprConfig rc = desk_repr(0);
  const ReprResult rldp = train_representation(rc, data);
  rc.method = ReprMethod::random;
  const ReprResult random = train_representation(rc, data);
  if (trained_out) *trained_out = rldp.encoder;
  const GoalRun a = goal_reaching(data, rldp.encoder);
  const GoalRun b = goal_reaching(data, random.encoder);
  char buf[200];
  std::snprintf(buf, sizeof buf, "success rldp %.3f (%s), random %.3f (%s)", a.success, a.per_task.c_str(), b.success, b.per_task.c_str());
  return {a.success >= 0.8 && b.success < a.success, buf};
}

// ---- AC6 --------------------------------------------------------------------

Outcome ac6_lemma() {
  const GridWorld g = GridWorld::four_rooms();
  const TabularMdp m = grid_mdp(g, 0.98);
  const Dataset data = four_room_data(6);
  const LemmaReport r = lemma_bound_report(check::identity_grid_encoder(g), m, random_policy(m.n_states, m.n_actions, 6),
                                           g.all_observations(), data, 5, 1.0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "lhs = %.3g, rhs = %.6g, L_d = %.2e, %zu clusters", r.lhs, r.rhs, r.loss_dynamics, r.num_clusters);
  return {r.lhs == 0.0 && r.lhs <= r.rhs && std::abs(r.loss_dynamics) <= 1e-10, buf};
}

// ---- AC7 --------------------------------------------------------------------

Outcome ac7_critics() {
  const GridWorld g = GridWorld::four_rooms();
  const TabularMdp m = grid_mdp(g, 0.98);
  const TabularPolicy pi = random_policy(m.n_states, m.n_actions, 7);
  const check::TabularProblem prob(m.n_states, m.n_actions, check::deterministic_transitions(m));
  Rng rng(77);
  const auto ns = static_cast<Eigen::Index>(m.n_states);
  Eigen::VectorXd r(ns);
  for (Eigen::Index i = 0; i < ns; ++i) r[i] = uniform(rng);
  const double root = std::sqrt(static_cast<double>(m.n_states));
  // Measure critic: Q(s,a) = sum_t gamma^t r(s_{t+1}) = E_rho[m r] with z = phi^T r / |S|.
  const Eigen::VectorXd q_sm = check::train_tabular_sm(prob, pi, m.gamma, 3000) * r / static_cast<double>(m.n_states);
  // TD critic on phi: Q(s,a) = r(s) + gamma sum_t gamma^t r(s_{t+1}) with z = r / sqrt(|S|).
  const Eigen::VectorXd q_u = check::train_tabular_usfa(prob, pi, m.gamma, 3000) * (r / root);
  const Eigen::VectorXd oracle = policy_evaluation(m, pi, r);
  Eigen::VectorXd q_u_next(q_u.size()), oracle_u(q_u.size());
  for (std::size_t s = 0; s < m.n_states; ++s)
    for (std::size_t a = 0; a < m.n_actions; ++a) {
      const auto i = static_cast<Eigen::Index>(s * m.n_actions + a);
      q_u_next[i] = (q_u[i] - r[static_cast<Eigen::Index>(s)]) / m.gamma;
      oracle_u[i] = r[static_cast<Eigen::Index>(s)] + m.gamma * oracle[i];
    }
  const double e_sm = (q_sm - oracle).cwiseAbs().maxCoeff();
  const double e_u = (q_u - oracle_u).cwiseAbs().maxCoeff();
  const double e_pair = (q_u_next - q_sm).cwiseAbs().maxCoeff();
  char buf[200];
  std::snprintf(buf, sizeof buf, "max |Q - Q_dp|: measure %.2e, usfa %.2e; between critics %.2e (|Q| up to %.1f)", e_sm, e_u, e_pair,
                oracle.cwiseAbs().maxCoeff());
  return {e_sm < 0.1 && e_u < 0.1 && e_pair < 0.1, buf};
}

// ---- AC8 --------------------------------------------------------------------

Outcome ac8_inference() {
  const GridWorld g = GridWorld::four_rooms();
  const Environment env = g;
  const Dataset data = exhaustive_grid_dataset(g);
  const auto enc = check::identity_grid_encoder(g);
  Rng rng(8);
  std::vector<double> table(g.num_cells());
  for (double& v : table) v = uniform(rng, -1.0, 1.0);
  // phi(s') = sqrt(n) e_s', so z_k = sqrt(n) r(k) (#rows with s' = k) / N.
  std::vector<double> count(g.num_cells(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) count[g.cell_of(data.next_state(i))] += 1.0;
  const double root = std::sqrt(static_cast<double>(g.num_cells()));
  Rng irng(9);
  const Tensor z = infer_z_mean(data, enc, env, RewardSpec::table(table), data.size(), irng, false);
  double e_mean = 0.0;
  for (std::size_t k = 0; k < g.num_cells(); ++k) {
    e_mean = std::max(e_mean, std::abs(z[k] - root * table[k] * count[k] / static_cast<double>(data.size())));
  }

  EncoderArch a;
  a.obs_dim = g.obs_dim();
  a.action_dim = 4;
  a.d = 8;
  a.phi_hidden = {16};
  a.action_embed = 4;
  a.g_hidden = {8};
  Rng erng(10);
  const auto renc = EncoderParams::init(a, erng);
  const std::vector<double> planted{0.3, -1.2, 0.7, 2.0, -0.4, 0.0, 1.1, -0.9};
  const Tensor phi = encode(renc, g.all_observations());
  std::vector<double> rtable(g.num_cells(), 0.0);
  for (std::size_t c = 0; c < g.num_cells(); ++c)
    for (std::size_t k = 0; k < 8; ++k) rtable[c] += phi(c, k) * planted[k];
  const Tensor zr = infer_z_regression(data, renc, env, RewardSpec::table(rtable), data.size(), 0.0, irng, false);
  double e_reg = 0.0;
  for (std::size_t k = 0; k < 8; ++k) e_reg = std::max(e_reg, std::abs(zr[k] - planted[k]));
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean rule max error %.2e; regression max error %.2e", e_mean, e_reg);
  return {e_mean <= 1e-12 && e_reg <= 1e-8, buf};
}

// ---- AC9 --------------------------------------------------------------------

Outcome ac9_determinism() {
  namespace fs = std::filesystem;
  auto j = nlohmann::json::parse(R"({
    "env": {"id": "gridworld", "layout": "four_rooms", "seed": 9},
    "data": {"episodes": 40, "episode_len": 50},
    "repr": {"d": 16, "batch": 32, "total_steps": 1000, "phi_hidden": [32], "action_embed": 16, "g_hidden": [32]},
    "bfm": {"steps": 500, "batch": 32, "embed_hidden": 32, "embed_dim": 16, "head_hidden": 32, "target_update_period": 100},
    "eval": {"tasks": [{"kind": "goal_cell", "cell": [2, 2], "name": "a"}, {"kind": "goal_cell", "cell": [9, 10], "name": "b"}],
             "episodes": 10, "inference_samples": 1000}
  })");
  const fs::path root = fs::temp_directory_path() / "rldp_acceptance_ac9";
  fs::remove_all(root);
  std::vector<std::string> runs;
  for (const char* sub : {"one", "two"}) {
    cli::RunConfig c = cli::config_from_json(j);
    cli::resolve_paths(c, root / sub);
    cli::cmd_gen_data(c, false);
    cli::cmd_pretrain(c, false);
    cli::cmd_train_bfm(c, false);
    const auto reports = cli::cmd_eval(c);
    std::string all;
    for (const char* f : {"data_summary.csv", "collapse_trace.csv", "bfm_metrics.csv", "eval_summary.csv"}) all += read_file(c.paths.metrics / f);
    for (std::size_t i = 0; i < reports.size(); ++i) all += read_file(c.paths.metrics / "eval" / (std::to_string(i) + "_" + c.eval.tasks[i].name + ".csv"));
    runs.push_back(all);
  }
  fs::remove_all(root);
  return {runs[0] == runs[1], std::to_string(runs[0].size()) + " bytes of metrics CSV compared across two runs"};
}

// ---- AC10 -------------------------------------------------------------------

Outcome ac10_bc_lambda() {
  const Tensor q = Tensor::from_rows({{1.0}, {-3.0}, {2.5}, {-1.5}});  // mean |Q| = 2
  const double lam = bc_lambda(q, 2.5);
  return {lam == 1.25, "lambda = " + format_double(lam)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria AC1-AC10"};
  std::vector<int> only;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10} : std::set<int>(only.begin(), only.end());

  // AC4 inspects the encoder trained for AC5 when both run.
  EncoderParams trained;
  bool have_trained = false;
  const std::map<int, std::pair<double, std::function<Outcome()>>> criteria{
      {1, {120, ac1_gradients}},
      {2, {300, ac2_fixed_point}},
      {3, {600, ac3_collapse}},
      {5, {1200, [&] {
             have_trained = true;
             return ac5_goal_reaching(&trained);
           }}},
      {4, {0, [&] {
             if (!have_trained) {
               trained = train_representation(desk_repr(0), four_room_data(1)).encoder;
               have_trained = true;
             }
             return ac4_sphere(trained);
           }}},
      {6, {0, ac6_lemma}},
      {7, {0, ac7_critics}},
      {8, {0, ac8_inference}},
      {9, {0, ac9_determinism}},
      {10, {0, ac10_bc_lambda}},
  };
  // AC5 before AC4 so the trained encoder is reused.
  const std::vector<int> order{1, 2, 3, 5, 4, 6, 7, 8, 9, 10};
  std::map<int, std::string> lines;
  int failures = 0;
  for (int id : order) {
    if (!selected.count(id)) continue;
    const auto& [budget, fn] = criteria.at(id);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget > 0 && secs > budget) {
      o.pass = false;
      o.detail += " (over the " + std::to_string(static_cast<int>(budget)) + " s budget)";
    }
    failures += o.pass ? 0 : 1;
    char head[48];
    std::snprintf(head, sizeof head, "AC%-2d %s  %7.1fs  ", id, o.pass ? "PASS" : "FAIL", secs);
    lines[id] = head + o.detail;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
  }
  for (const auto& [_, line] : lines) std::printf("%s\n", line.c_str());
  return failures;
}
