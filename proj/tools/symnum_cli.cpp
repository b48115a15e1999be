// symnum command line: integrate one expression or run a JSONL corpus.
//
// exit codes: 0 solved / corpus completed, 1 unsolved, 2 usage or input error

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "symnum/corpus.hpp"
#include "symnum/integrator.hpp"
#include "symnum/parse.hpp"

namespace {

struct CommonFlags {
  int L = 2;
  double radius = 5.0;
  double eps = 1e-6;
  double lambda = 1e-3;
  double threshold = 1e-2;
  std::uint64_t seed = 0;
  int pole_iters = 3;
  double verify_tol = 1e-6;
  int max_sweeps = 20;
  bool real_form = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--L", f.L, "generator growth depth");
  cmd->add_option("--radius", f.radius, "sampling disk radius");
  cmd->add_option("--eps", f.eps, "rank cutoff for pruning");
  cmd->add_option("--lambda", f.lambda, "ridge weight in the sparse solve");
  cmd->add_option("--threshold", f.threshold, "sparsity threshold");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--pole-iters", f.pole_iters, "Newton steps toward poles");
  cmd->add_option("--verify-tol", f.verify_tol, "verification tolerance");
  cmd->add_option("--max-sweeps", f.max_sweeps, "sparse solve sweep limit");
  cmd->add_flag("--real-form", f.real_form,
                "recombine conjugate logs into log/atan pairs");
}

symnum::integrator::IntegratorConfig to_config(const CommonFlags& f) {
  symnum::integrator::IntegratorConfig cfg;
  cfg.L = f.L;
  cfg.sampler.disk_radius = f.radius;
  cfg.sampler.pole_iterations = f.pole_iters;
  cfg.sampler.rng_seed = f.seed;
  cfg.eps = f.eps;
  cfg.lambda = f.lambda;
  cfg.threshold = f.threshold;
  cfg.max_sweeps = f.max_sweeps;
  cfg.verify_tol = f.verify_tol;
  cfg.real_form = f.real_form;
  return cfg;
}

int cmd_integrate(const std::string& text, const CommonFlags& flags, bool json_out) {
  symnum::Expr f = symnum::Expr::integer(0);
  try {
    f = symnum::parse(text);
  } catch (const symnum::ParseError& ex) {
    std::fprintf(stderr, "syntax error at position %zu: %s\n", ex.position, ex.what());
    return 2;
  }
  auto res = symnum::integrator::integrate(f, to_config(flags));
  if (json_out) {
    nlohmann::json j;
    j["integrand"] = text;
    j["solved"] = res.solved;
    j["antiderivative"] = res.solved ? res.antiderivative->str() : "";
    j["residual"] = res.residual;
    j["generator_index"] = res.generator_index;
    j["n_terms"] = res.n_terms;
    j["failure_reason"] = res.failure_reason;
    std::printf("%s\n", j.dump(2).c_str());
  } else if (res.solved) {
    std::printf("%s\n", res.antiderivative->str().c_str());
  } else {
    std::printf("no answer\n");
    std::fprintf(stderr, "unsolved: %s\n", res.failure_reason.c_str());
    for (const auto& a : res.attempts)
      std::fprintf(stderr, "  %s (generator %d, %zu candidates%s): %s\n",
                   a.phase.c_str(), a.generator_index, a.n_candidates,
                   a.relaxed ? ", relaxed" : "", a.outcome.c_str());
  }
  return res.solved ? 0 : 1;
}

int cmd_corpus(const std::string& path, const CommonFlags& flags,
               double timeout, int jobs, bool json_out) {
  std::vector<symnum::corpus::CorpusEntry> entries;
  try {
    entries = symnum::corpus::load_jsonl_file(path);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "%s\n", ex.what());
    return 2;
  }
  symnum::corpus::CorpusOptions opts;
  opts.config = to_config(flags);
  opts.seed = flags.seed;
  opts.timeout_seconds = timeout;
  opts.jobs = jobs;
  auto report = symnum::corpus::run_corpus(entries, opts);
  if (json_out) {
    std::printf("%s", symnum::corpus::report_json(report).c_str());
  } else {
    for (const auto& r : report.entries) {
      std::printf("%-24s %-8s %6.2fs  %s\n", r.entry.id.c_str(),
                  r.outcome.c_str(), r.wall_seconds,
                  r.outcome == "success" ? r.antiderivative.c_str()
                                         : r.detail.c_str());
    }
    std::printf("\n%s", symnum::corpus::report_table(report).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid symbolic-numeric indefinite integration"};
  app.require_subcommand(1);

  std::string expr_text;
  CommonFlags int_flags;
  bool int_json = false;
  CLI::App* integrate = app.add_subcommand("integrate", "integrate one expression");
  integrate->add_option("expression", expr_text, "integrand, infix grammar")
      ->required();
  add_common_flags(integrate, int_flags);
  integrate->add_flag("--json", int_json, "emit the result as JSON");

  std::string corpus_path;
  CommonFlags cor_flags;
  bool cor_json = false;
  double timeout = 10.0;
  int jobs = 1;
  CLI::App* corpus = app.add_subcommand("corpus", "run a JSONL problem corpus");
  corpus->add_option("file", corpus_path, "corpus in JSON-lines form")->required();
  add_common_flags(corpus, cor_flags);
  corpus->add_option("--timeout", timeout, "per-entry seconds budget");
  corpus->add_option("--jobs", jobs, "worker thread count");
  corpus->add_flag("--json", cor_json, "emit the full report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    // CLI11 returns 0 for --help; anything else is a usage error
    return code == 0 ? 0 : 2;
  }

  try {
    if (integrate->parsed()) return cmd_integrate(expr_text, int_flags, int_json);
    return cmd_corpus(corpus_path, cor_flags, timeout, jobs, cor_json);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
}
