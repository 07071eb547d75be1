#pragma once

// The five pipeline stages behind the `rldp` binary. Each reads its inputs
// from the configured paths and writes outputs atomically; primary
// artifacts (dataset, checkpoints) are never overwritten without `force`.
//
// Output layout, relative to paths.metrics:
//   data_summary.csv, collapse_trace.csv, bfm_metrics.csv,
//   eval/<i>_<task>.csv, eval_summary.csv, diag/*.csv

#include <rldp/cli/config.hpp>
#include <rldp/oracle/lemma.hpp>
#include <rldp/zeroshot/evaluate.hpp>
#include <rldp/zeroshot/inference.hpp>

#include <filesystem>
#include <string>

namespace rldp::cli {

namespace detail {

inline void require_absent(const std::filesystem::path& p, bool force) {
  if (!force && std::filesystem::exists(p)) {
    throw ConfigError("'" + p.string() + "' already exists (pass --force to overwrite)");
  }
}

inline void require_present(const std::filesystem::path& p, const char* what) {
  if (!std::filesystem::exists(p)) throw ConfigError(std::string(what) + " '" + p.string() + "' not found");
}

inline std::string file_stem(std::size_t i, const RewardSpec& task) {
  std::string name;
  for (char ch : task.name) name += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return std::to_string(i) + "_" + name;
}

}  // namespace detail

inline Dataset load_run_dataset(const RunConfig& c) {
  detail::require_present(c.paths.dataset, "dataset");
  Dataset data = load_dataset(c.paths.dataset);
  if (data.meta.env_id != env_id(c.environment())) {
    throw ConfigError("dataset was generated for '" + data.meta.env_id + "', config describes '" + env_id(c.environment()) + "'");
  }
  return data;
}

struct DataSummary {
  std::size_t transitions = 0;
  std::size_t episodes = 0;
  std::size_t distinct_cells = 0;  // 0 for the point mass
  std::size_t free_cells = 0;
  double coverage = 0.0;
};

inline DataSummary cmd_gen_data(const RunConfig& c, bool force) {
  detail::require_absent(c.paths.dataset, force);
  const Environment env = c.environment();
  GenerationOptions opt;
  opt.policy = c.data.policy;
  opt.episodes = c.data.episodes;
  opt.episode_len = c.data.episode_len;
  opt.seed = derive_seed(c.seed(), "data");
  opt.start_cell = c.data.start_cell;
  opt.epsilon = c.data.epsilon;
  const Dataset data = generate_dataset(env, opt);
  save_dataset(data, c.paths.dataset);

  DataSummary s;
  s.transitions = data.size();
  s.episodes = data.num_episodes();
  if (const auto* g = std::get_if<GridWorld>(&env)) {
    s.distinct_cells = distinct_cells(*g, data);
    s.free_cells = g->num_cells();
    s.coverage = static_cast<double>(s.distinct_cells) / static_cast<double>(s.free_cells);
  }
  CsvWriter csv({"transitions", "episodes", "distinct_cells", "free_cells", "coverage"});
  csv.row(s.transitions, s.episodes, s.distinct_cells, s.free_cells, s.coverage);
  csv.write(c.paths.metrics / "data_summary.csv");
  return s;
}

inline ReprResult cmd_pretrain(const RunConfig& c, bool force) {
  detail::require_absent(c.encoder_checkpoint(), force);
  const Dataset data = load_run_dataset(c);
  ReprResult res = train_representation(c.repr, data);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& [step, cos] : res.trace) trace.push_back({step, cos});
  save_encoder(c.encoder_checkpoint(), res.encoder,
               {{"method", to_string(c.repr.method)}, {"gradient_steps", res.gradient_steps}, {"trace", trace}});
  trace_csv(res.trace).write(c.paths.metrics / "collapse_trace.csv");
  return res;
}

inline BfmResult cmd_train_bfm(const RunConfig& c, bool force) {
  detail::require_absent(c.bfm_checkpoint(), force);
  const Dataset data = load_run_dataset(c);
  EncoderParams enc;
  if (std::filesystem::exists(c.encoder_checkpoint())) {
    enc = load_encoder(c.encoder_checkpoint());
  } else if (c.bfm_mode == BfmMode::fb_joint) {
    Rng rng(derive_seed(c.seed(), "fb.init"));
    enc = EncoderParams::init(c.repr.arch(data.meta), rng);
  } else {
    throw ConfigError("encoder checkpoint '" + c.encoder_checkpoint().string() + "' not found (run pretrain, or use bfm.mode = fb_joint)");
  }
  if (enc.arch.d != c.repr.d) {
    throw ConfigError("encoder checkpoint has d = " + std::to_string(enc.arch.d) + " but repr.d = " + std::to_string(c.repr.d));
  }
  BfmResult res = train_bfm(c.bfm, data, enc, c.bfm_mode);
  save_bfm(c.bfm_checkpoint(), res.bfm, {{"mode", to_string(c.bfm_mode)}, {"steps", res.steps}});
  save_encoder(c.bfm_encoder_checkpoint(), res.encoder, {{"mode", to_string(c.bfm_mode)}});
  res.metrics.write(c.paths.metrics / "bfm_metrics.csv");
  return res;
}

/// Encoder and critic as trained together by train-bfm.
struct TrainedModel {
  EncoderParams encoder;
  BfmParams bfm;
};

inline TrainedModel load_trained_model(const RunConfig& c) {
  detail::require_present(c.bfm_checkpoint(), "bfm checkpoint");
  detail::require_present(c.bfm_encoder_checkpoint(), "encoder checkpoint");
  TrainedModel m{load_encoder(c.bfm_encoder_checkpoint()), load_bfm(c.bfm_checkpoint())};
  if (m.encoder.arch.d != m.bfm.arch.d) {
    throw DimensionError("load_trained_model", "encoder d = " + std::to_string(m.encoder.arch.d) + " but critic d = " + std::to_string(m.bfm.arch.d));
  }
  return m;
}

/// Task embedding for eval task i; each task draws its own inference sample.
inline Tensor infer_task_z(const RunConfig& c, const Dataset& data, const EncoderParams& enc, const Environment& env, std::size_t i) {
  Rng rng(derive_seed(derive_seed(c.seed(), "eval.inference"), i));
  const RewardSpec& task = c.eval.tasks.at(i);
  if (c.eval.inference == InferenceRule::regression) {
    return infer_z_regression(data, enc, env, task, c.eval.inference_samples, c.eval.ridge, rng);
  }
  return infer_z_mean(data, enc, env, task, c.eval.inference_samples, rng);
}

inline std::vector<EvalReport> cmd_eval(const RunConfig& c) {
  const Environment env = c.environment();
  for (std::size_t i = 0; i < c.eval.tasks.size(); ++i) {
    try {
      c.eval.tasks[i].check(env);
    } catch (const std::exception& e) {
      throw ConfigError("eval.tasks[" + std::to_string(i) + "]: " + e.what());
    }
  }
  std::vector<EvalReport> reports;
  CsvWriter summary({"task", "episodes", "mean_return", "std_return", "mean_discounted_return", "success_rate"});
  if (!c.eval.tasks.empty()) {
    const Dataset data = load_run_dataset(c);
    const TrainedModel m = load_trained_model(c);
    for (std::size_t i = 0; i < c.eval.tasks.size(); ++i) {
      const Tensor z = infer_task_z(c, data, m.encoder, env, i);
      EvalOptions opt;
      opt.episodes = c.eval.episodes;
      opt.episode_len = c.eval.episode_len;
      opt.gamma = c.bfm.gamma;
      opt.seed = derive_seed(derive_seed(c.seed(), "eval.episodes"), i);
      EvalReport r = evaluate(env, bfm_policy(m.bfm, z), c.eval.tasks[i], opt);
      r.csv().write(c.paths.metrics / "eval" / (detail::file_stem(i, c.eval.tasks[i]) + ".csv"));
      double disc = 0.0;
      for (double v : r.discounted_returns) disc += v;
      if (!r.discounted_returns.empty()) disc /= static_cast<double>(r.discounted_returns.size());
      summary.row(r.task, r.episodes(), r.mean_return(), r.std_return(), disc, r.success_rate());
      reports.push_back(std::move(r));
    }
  }
  summary.write(c.paths.metrics / "eval_summary.csv");
  return reports;
}

struct DiagResult {
  std::vector<std::filesystem::path> files;
  std::optional<LemmaReport> lemma;
};

/// Writes the cosine trace recorded at pretraining, one heatmap per
/// configured (s0, a0, task), the bound report (uniform policy over the
/// grid MDP) and a raw embedding dump.
inline DiagResult cmd_diag(const RunConfig& c) {
  const Environment env = c.environment();
  const bool grid = std::holds_alternative<GridWorld>(env);
  if (!grid && (c.diag.lemma || !c.diag.heatmaps.empty())) {
    throw ConfigError("heatmaps and the bound report are tabular diagnostics and need a gridworld (set diag.lemma = false and no heatmaps)");
  }
  const Dataset data = load_run_dataset(c);
  const TrainedModel m = load_trained_model(c);
  const std::filesystem::path dir = c.paths.metrics / "diag";
  DiagResult out;
  auto emit = [&](const CsvWriter& csv, const std::string& name) {
    csv.write(dir / name);
    out.files.push_back(dir / name);
  };

  CollapseTrace trace;
  if (std::filesystem::exists(c.encoder_checkpoint())) {
    const auto meta = load_checkpoint(c.encoder_checkpoint()).meta;
    if (meta.contains("extra") && meta["extra"].contains("trace")) {
      for (const auto& e : meta["extra"]["trace"]) trace.emplace_back(e[0].get<std::size_t>(), e[1].get<double>());
    }
  }
  emit(trace_csv(trace), "cosine_trace.csv");

  for (std::size_t i = 0; i < c.diag.heatmaps.size(); ++i) {
    const auto& h = c.diag.heatmaps[i];
    const Tensor z = infer_task_z(c, data, m.encoder, env, h.task);
    emit(heatmap_csv(successor_heatmap(m.bfm, m.encoder, std::get<GridWorld>(env), h.cell, h.action, z)),
         "heatmap_" + std::to_string(i) + ".csv");
  }

  if (c.diag.lemma) {
    const auto& g = std::get<GridWorld>(env);
    const TabularMdp mdp = grid_mdp(g, c.bfm.gamma);
    LemmaReport r = lemma_bound_report(m.encoder, mdp, TabularPolicy::uniform(mdp.n_states, mdp.n_actions), g.all_observations(),
                                       data, c.repr.horizon, c.repr.lambda);
    CsvWriter csv({"lhs", "rhs", "loss_dynamics", "loss_ortho", "loss_rldp", "num_clusters", "segments"});
    csv.row(r.lhs, r.rhs, r.loss_dynamics, r.loss_ortho, r.loss_rldp, r.num_clusters, r.segments);
    emit(csv, "lemma_bound.csv");
    out.lemma = r;
  }

  // Grid: every free cell as (x, y); point mass: sampled dataset states.
  Tensor obs;
  std::vector<std::vector<double>> coords;
  if (grid) {
    const auto& g = std::get<GridWorld>(env);
    obs = g.all_observations();
    for (std::size_t i = 0; i < g.num_cells(); ++i) coords.push_back({static_cast<double>(g.cell(i).x), static_cast<double>(g.cell(i).y)});
  } else {
    Rng rng(derive_seed(c.seed(), "diag.probe"));
    obs = sample_states(data, c.diag.probe_states, rng);
    for (std::size_t i = 0; i < obs.rows(); ++i) coords.push_back({obs(i, 0), obs(i, 1)});
  }
  const Tensor phi = encode(m.encoder, obs);
  std::vector<std::string> header{"x", "y"};
  for (std::size_t k = 0; k < phi.cols(); ++k) header.push_back("phi_" + std::to_string(k));
  CsvWriter emb(header);
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    std::vector<double> row = coords[i];
    row.insert(row.end(), phi.row(i).begin(), phi.row(i).end());
    emb.row_values(row);
  }
  emit(emb, "embeddings.csv");
  return out;
}

}  // namespace rldp::cli
