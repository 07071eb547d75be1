// rldp: gen-data | pretrain | train-bfm | eval | diag
// Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure.

#include <rldp/cli/commands.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool force = false;
  std::string out;
};

rldp::cli::RunConfig prepare(const Flags& f) {
  rldp::cli::RunConfig c = rldp::cli::load_config(f.config);
  if (f.seed) c.set_seed(*f.seed);
  const std::filesystem::path base = f.out.empty() ? std::filesystem::path(f.config).parent_path() : std::filesystem::path(f.out);
  rldp::cli::resolve_paths(c, base);
  return c;
}

int run(const std::string& cmd, const Flags& f) {
  using namespace rldp::cli;
  const RunConfig c = prepare(f);
  if (cmd == "gen-data") {
    const DataSummary s = cmd_gen_data(c, f.force);
    std::printf("dataset %s: %zu transitions, %zu episodes", c.paths.dataset.c_str(), s.transitions, s.episodes);
    if (s.free_cells > 0) std::printf(", coverage %zu/%zu = %.3f", s.distinct_cells, s.free_cells, s.coverage);
    std::printf("\n");
  } else if (cmd == "pretrain") {
    const auto res = cmd_pretrain(c, f.force);
    std::printf("encoder %s: method %s, %zu steps, final cosine %.4f\n", c.encoder_checkpoint().c_str(), rldp::to_string(c.repr.method),
                res.gradient_steps, res.trace.back().second);
  } else if (cmd == "train-bfm") {
    const auto res = cmd_train_bfm(c, f.force);
    std::printf("bfm %s: %zu steps (%s)\n", c.bfm_checkpoint().c_str(), res.steps, rldp::to_string(c.bfm_mode));
  } else if (cmd == "eval") {
    for (const auto& r : cmd_eval(c)) {
      std::printf("%-24s return %9.4f +- %-9.4f success %.3f\n", r.task.c_str(), r.mean_return(), r.std_return(), r.success_rate());
    }
  } else if (cmd == "diag") {
    const auto res = cmd_diag(c);
    if (res.lemma) std::printf("bound: lhs %.6g <= rhs %.6g (%zu clusters)\n", res.lemma->lhs, res.lemma->rhs, res.lemma->num_clusters);
    for (const auto& p : res.files) std::printf("wrote %s\n", p.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot RL with latent dynamics prediction features"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"gen-data", "pretrain", "train-bfm", "eval", "diag"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Root seed (overrides env.seed)");
    sub->add_flag("--force", flags.force, "Overwrite existing artifacts");
    sub->add_option("--out", flags.out, "Directory that relative config paths resolve against (default: the config's directory)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, flags);
  } catch (const rldp::NumericError& e) {
    std::cerr << "rldp " << cmd << ": numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rldp " << cmd << ": " << e.what() << '\n';
    return 1;
  }
}
