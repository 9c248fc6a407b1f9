// SPDX-License-Identifier: Apache-2.0
//
// cohten: command-line front end for the coherence-constrained CP
// decomposition library. Subcommands: synth, decompose, certify, localize,
// spark, demo-degeneracy.
//
// Exit codes: 0 success; 1 I/O or command-line error; 2 certificate failure
// or cap infeasibility; 3 numeric domain error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cohten/certify.hpp"
#include "cohten/coherence.hpp"
#include "cohten/degeneracy.hpp"
#include "cohten/errors.hpp"
#include "cohten/io.hpp"
#include "cohten/recover.hpp"
#include "cohten/solve.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cohten;

constexpr const char* kVersion = "cohten 0.1.0";

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Thrown for option combinations CLI11 cannot check itself; maps to exit 1.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Collects the run description while the command executes and writes the
/// manifest once all outputs exist, so their checksums can be recorded.
class ManifestBuilder {
 public:
  explicit ManifestBuilder(std::string command) {
    manifest_.command = std::move(command);
  }

  void option(const std::string& key, const std::string& value) {
    manifest_.options.emplace_back(key, value);
  }
  void option(const std::string& key, double value) { option(key, fmt_g(value)); }
  void option(const std::string& key, long long value) {
    option(key, std::to_string(value));
  }

  void seed(std::uint64_t s) {
    manifest_.seed = s;
    manifest_.has_seed = true;
  }

  void input(const fs::path& p) {
    manifest_.inputs.push_back({p.string(), crc32_file(p)});
  }
  void output(const fs::path& p) {
    manifest_.outputs.push_back({p.string(), crc32_file(p)});
  }

  void write(const fs::path& path) {
    manifest_.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
            .count();
    write_manifest(path, manifest_);
  }

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

fs::path default_manifest(const std::string& explicit_path,
                          const std::string& anchor,
                          const std::string& suffix) {
  if (!explicit_path.empty()) return explicit_path;
  return anchor + suffix;
}

std::array<double, 3> caps_from(const std::vector<double>& v,
                                const char* flag) {
  if (v.size() != 3)
    throw usage_error(std::string(flag) + " needs exactly three values a,b,c");
  return {v[0], v[1], v[2]};
}

void print_solve_summary(const SolveResult& res, double input_norm) {
  const SolveTrace& t = res.trace;
  const IterRecord& last = t.iterations.back();
  std::printf("status: %s after %d sweeps (restart %d)\n",
              to_string(t.status), last.iter, t.restart_index);
  double rel = input_norm > 0.0 ? last.residual / input_norm : 0.0;
  std::printf("residual: %.6g (relative %.6g)\n", last.residual, rel);
  std::printf("max |lambda|: %.6g\n", res.model.lambda_max());
  std::printf("mu: U=%.6g V=%.6g W=%.6g\n", last.mu_u, last.mu_v, last.mu_w);
  for (const std::string& note : t.notes)
    std::printf("note: %s\n", note.c_str());
}

void print_certificate(const Certificate& cert) {
  std::printf("model: r=%d\n", cert.r);
  std::printf("mu: U=%.6g V=%.6g W=%.6g\n", cert.mu_u, cert.mu_v, cert.mu_w);
  std::printf("krank: U=%d V=%d W=%d (%s)\n", cert.krank_u, cert.krank_v,
              cert.krank_w,
              cert.krank_exact ? "exact" : "coherence lower bound");
  std::printf("weights_ok: %s\n", cert.weights_ok ? "yes" : "no");
  std::printf("%-19s %13s %13s  %-7s %13s\n", "check", "lhs", "rhs",
              "verdict", "margin");
  for (const Check& c : cert.checks)
    std::printf("%-19s %13.6g %13.6g  %-7s %13.6g\n", c.name.c_str(), c.lhs,
                c.rhs, c.holds ? "holds" : "fails", c.margin);
  std::printf("rank_certified: %s\n", cert.rank_certified ? "yes" : "no");
}

// ---------------------------------------------------------------- synth --

struct SynthOpts {
  std::string config;
  std::string out;
  std::string truth;
  std::string manifest;
  std::uint64_t seed = 0;
  std::optional<double> snr_db;
};

int run_synth(const SynthOpts& o) {
  ManifestBuilder mf("synth");
  mf.option("config", o.config);
  mf.option("out", o.out);
  if (!o.truth.empty()) mf.option("truth", o.truth);
  if (o.snr_db) mf.option("snr-db", *o.snr_db);
  mf.seed(o.seed);

  ArrayScenario scn = read_scenario(o.config);
  validate_scenario(scn);
  SynthResult res = synthesize(scn, o.snr_db, o.seed);

  write_tensor(o.out, res.tensor);
  if (!o.truth.empty()) write_model(o.truth, res.truth.model);

  std::printf("synthesized %dx%dx%d tensor, %d source(s)\n",
              res.tensor.dim0(), res.tensor.dim1(), res.tensor.dim2(),
              res.truth.model.rank());
  std::printf("ground-truth mu: U=%.6g V=%.6g W=%.6g\n", res.truth.mu_u,
              res.truth.mu_v, res.truth.mu_w);
  std::printf("||A||_F = %.6g\n", frobenius_norm(res.tensor));

  mf.input(o.config);
  mf.output(o.out);
  if (!o.truth.empty()) mf.output(o.truth);
  fs::path mpath = default_manifest(o.manifest, o.out, ".manifest.json");
  mf.write(mpath);
  std::printf("wrote %s\n", mpath.string().c_str());
  return 0;
}

// ------------------------------------------------------------ decompose --

struct DecomposeOpts {
  std::string in;
  std::string out;
  std::string trace;
  std::string manifest;
  std::vector<double> mu_caps;
  int rank = 1;
  int max_iter = 2000;
  double tol = 1e-8;
  int restarts = 5;
  std::uint64_t seed = 0;
};

int run_decompose(const DecomposeOpts& o) {
  ManifestBuilder mf("decompose");
  mf.option("in", o.in);
  mf.option("rank", static_cast<long long>(o.rank));
  mf.option("max-iter", static_cast<long long>(o.max_iter));
  mf.option("tol", o.tol);
  mf.option("restarts", static_cast<long long>(o.restarts));
  if (!o.out.empty()) mf.option("out", o.out);
  if (!o.trace.empty()) mf.option("trace", o.trace);
  mf.seed(o.seed);

  SolverOptions so;
  so.r = o.rank;
  so.max_iter = o.max_iter;
  so.rel_tol = o.tol;
  so.restarts = o.restarts;
  so.seed = o.seed;
  if (!o.mu_caps.empty()) {
    so.mu_caps = caps_from(o.mu_caps, "--mu-caps");
    mf.option("mu-caps", fmt_g(o.mu_caps[0]) + "," + fmt_g(o.mu_caps[1]) +
                             "," + fmt_g(o.mu_caps[2]));
  }

  Tensor3 a = read_tensor(o.in);
  SolveResult res = [&] {
    if (!so.mu_caps) return als_decompose(a, so);
    try {
      return constrained_decompose(a, so);
    } catch (const infeasible_error& e) {
      // Leave the best attempt's trajectory behind for diagnosis.
      if (!o.trace.empty()) write_trace_csv(o.trace, e.best_trace());
      throw;
    }
  }();

  if (!o.out.empty()) write_model(o.out, res.model);
  if (!o.trace.empty()) write_trace_csv(o.trace, res.trace);

  print_solve_summary(res, frobenius_norm(a));

  mf.input(o.in);
  if (!o.out.empty()) mf.output(o.out);
  if (!o.trace.empty()) mf.output(o.trace);
  fs::path mpath = o.out.empty()
                       ? default_manifest(o.manifest, o.in,
                                          ".decompose.manifest.json")
                       : default_manifest(o.manifest, o.out, ".manifest.json");
  mf.write(mpath);
  std::printf("wrote %s\n", mpath.string().c_str());
  return 0;
}

// -------------------------------------------------------------- certify --

struct CertifyOpts {
  std::string model;
  std::string manifest;
  double tol = 1e-9;
};

int run_certify(const CertifyOpts& o) {
  ManifestBuilder mf("certify");
  mf.option("model", o.model);
  mf.option("tol", o.tol);

  CpModel m = read_model(o.model);
  CertifyOptions co;
  co.tol = o.tol;
  Certificate cert = certify_model(m, co);
  print_certificate(cert);

  mf.input(o.model);
  fs::path mpath =
      default_manifest(o.manifest, o.model, ".certify.manifest.json");
  mf.write(mpath);
  std::printf("wrote %s\n", mpath.string().c_str());
  return cert.check("coherence_kruskal").holds ? 0 : 2;
}

// ------------------------------------------------------------- localize --

struct LocalizeOpts {
  std::string model;
  std::string config;
  std::string truth;
  std::string out;
  std::string manifest;
};

int run_localize(const LocalizeOpts& o) {
  ManifestBuilder mf("localize");
  mf.option("model", o.model);
  mf.option("config", o.config);
  if (!o.truth.empty()) mf.option("truth", o.truth);
  mf.option("out", o.out);

  CpModel m = read_model(o.model);
  ArrayScenario scn = read_scenario(o.config);
  validate_scenario(scn);

  std::optional<GroundTruth> truth;
  if (!o.truth.empty())
    truth = GroundTruth{read_model(o.truth), 0.0, 0.0, 0.0};

  RecoveryResult rec =
      recover_sources(m, scn, truth ? &*truth : nullptr);
  write_report_json(o.out, rec);

  for (std::size_t p = 0; p < rec.sources.size(); ++p) {
    const SourceRecovery& s = rec.sources[p];
    std::string line = "source " + std::to_string(p) + ": ";
    if (s.direction) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "direction [%.6g, %.6g, %.6g]",
                    (*s.direction)(0), (*s.direction)(1), (*s.direction)(2));
      line += buf;
      if (s.direction_error_deg) {
        std::snprintf(buf, sizeof buf, ", error %.6g deg",
                      *s.direction_error_deg);
        line += buf;
      }
    } else {
      line += "direction unresolved";
    }
    if (s.rho) {
      char buf[48];
      std::snprintf(buf, sizeof buf, ", rho %.6g", *s.rho);
      line += buf;
    }
    if (!s.flags.empty()) {
      line += ", flags:";
      for (RecoveryFlag f : s.flags) line += std::string(" ") + to_string(f);
    }
    std::printf("%s\n", line.c_str());
  }

  mf.input(o.model);
  mf.input(o.config);
  if (!o.truth.empty()) mf.input(o.truth);
  mf.output(o.out);
  fs::path mpath = default_manifest(o.manifest, o.out, ".manifest.json");
  mf.write(mpath);
  std::printf("wrote %s\n", mpath.string().c_str());
  return 0;
}

// ---------------------------------------------------------------- spark --

struct SparkOpts {
  std::string matrix;
  std::string manifest;
  double tol = 1e-9;
};

int run_spark(const SparkOpts& o) {
  ManifestBuilder mf("spark");
  mf.option("matrix", o.matrix);
  mf.option("tol", o.tol);

  Eigen::MatrixXcd x = read_matrix(o.matrix);
  ColumnSet cols = ColumnSet::normalized(x);
  CoherenceReport rep = analyze_columns(cols, o.tol);
  SparkBounds bounds = spark_coherence_bounds(rep.mu);

  std::printf("columns: %d in C^%d\n", cols.count(), cols.dim());
  std::printf("mu = %.6g\n", rep.mu);
  if (is_infinite_spark(rep.spark))
    std::printf("spark = inf (no dependent subset)\ngirth = inf\n");
  else
    std::printf("spark = %d\ngirth = %d\n", rep.spark, rep.girth);
  std::printf("krank = %d\n", rep.krank);
  std::printf("coherence bounds: spark >= %.6g, krank >= min(r, %.6g)\n",
              bounds.spark_lb, bounds.krank_lb);

  mf.input(o.matrix);
  fs::path mpath =
      default_manifest(o.manifest, o.matrix, ".spark.manifest.json");
  mf.write(mpath);
  std::printf("wrote %s\n", mpath.string().c_str());
  return 0;
}

// ------------------------------------------------------ demo-degeneracy --

struct DemoOpts {
  std::vector<std::int64_t> n_list;
  std::vector<double> caps;
  std::string out;
  std::string manifest;
  int max_iter = 5000;
  double tol = 1e-8;
  int restarts = 1;
  std::uint64_t seed = 0;
};

int run_demo(const DemoOpts& o) {
  ManifestBuilder mf("demo-degeneracy");
  {
    std::string ns;
    for (std::size_t i = 0; i < o.n_list.size(); ++i) {
      if (i) ns += ',';
      ns += std::to_string(o.n_list[i]);
    }
    mf.option("n-list", ns);
  }
  mf.option("out", o.out);
  mf.option("max-iter", static_cast<long long>(o.max_iter));
  mf.option("tol", o.tol);
  mf.option("restarts", static_cast<long long>(o.restarts));
  mf.seed(o.seed);

  std::optional<std::array<double, 3>> caps;
  if (!o.caps.empty()) {
    caps = caps_from(o.caps, "--constrained-caps");
    mf.option("constrained-caps", fmt_g(o.caps[0]) + "," + fmt_g(o.caps[1]) +
                                      "," + fmt_g(o.caps[2]));
  }

  SolverOptions so;
  so.max_iter = o.max_iter;
  so.rel_tol = o.tol;
  so.restarts = o.restarts;
  so.seed = o.seed;

  DslInstance inst = DslInstance::orthonormal(2);
  DegeneracyReport rep = demo_degeneracy(inst, o.n_list, so, caps);

  write_demo_csv(o.out, rep.rows);
  fs::path base = fs::path(o.out).parent_path() / fs::path(o.out).stem();
  fs::path unc_trace = base.string() + "_unconstrained_trace.csv";
  write_trace_csv(unc_trace, rep.unconstrained.trace);
  fs::path con_trace;
  if (rep.constrained) {
    con_trace = base.string() + "_constrained_trace.csv";
    write_trace_csv(con_trace, rep.constrained->trace);
  }

  std::printf("%12s %16s %16s %10s %10s %10s\n", "n", "dist_to_limit",
              "max|lambda|", "mu_u", "mu_v", "mu_w");
  for (const DegeneracyRow& r : rep.rows)
    std::printf("%12lld %16.8g %16.8g %10.6g %10.6g %10.6g\n",
                static_cast<long long>(r.n), r.dist_to_limit,
                r.lambda_max_explicit, r.mu_u, r.mu_v, r.mu_w);

  const double limit_norm = frobenius_norm(dsl_limit(inst));
  std::printf("unconstrained rank-2 solve:\n");
  print_solve_summary(rep.unconstrained, limit_norm);
  if (rep.constrained) {
    std::printf("constrained rank-2 solve (caps %.6g,%.6g,%.6g):\n",
                (*caps)[0], (*caps)[1], (*caps)[2]);
    print_solve_summary(*rep.constrained, limit_norm);
  }

  mf.output(o.out);
  mf.output(unc_trace);
  if (rep.constrained) mf.output(con_trace);
  fs::path mpath = default_manifest(o.manifest, o.out, ".manifest.json");
  mf.write(mpath);
  std::printf("wrote %s\n", mpath.string().c_str());
  return 0;
}

// ------------------------------------------------------------- plumbing --

const char* kManifestHelp = "Manifest path (default: derived from the "
                            "primary file of the command)";

void setup_synth(CLI::App& app, std::function<int()>& runner) {
  auto o = std::make_shared<SynthOpts>();
  auto* cmd = app.add_subcommand(
      "synth", "Synthesize a sensors x subarrays x snapshots tensor");
  cmd->add_option("--config", o->config, "Scenario JSON file")->required();
  cmd->add_option("--seed", o->seed, "RNG seed")->capture_default_str();
  cmd->add_option("--snr-db", o->snr_db,
                  "Add complex Gaussian noise at this SNR (dB)");
  cmd->add_option("--out", o->out, "Output tensor (.ct3)")->required();
  cmd->add_option("--truth", o->truth, "Write the ground-truth model (.cpj)");
  cmd->add_option("--manifest", o->manifest, kManifestHelp);
  cmd->callback([o, &runner] { runner = [o] { return run_synth(*o); }; });
}

void setup_decompose(CLI::App& app, std::function<int()>& runner) {
  auto o = std::make_shared<DecomposeOpts>();
  auto* cmd = app.add_subcommand(
      "decompose", "Rank-r CP decomposition, optionally coherence-capped");
  cmd->add_option("--in", o->in, "Input tensor (.ct3)")->required();
  cmd->add_option("--rank", o->rank, "Target rank r")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mu-caps", o->mu_caps,
                  "Per-mode coherence caps a,b,c in (0,1]")
      ->delimiter(',');
  cmd->add_option("--seed", o->seed, "RNG seed")->capture_default_str();
  cmd->add_option("--max-iter", o->max_iter, "Sweep limit per restart")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o->tol,
                  "Relative residual change convergence threshold")->capture_default_str();
  cmd->add_option("--restarts", o->restarts, "Random restarts")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o->out, "Output model (.cpj)");
  cmd->add_option("--trace", o->trace, "Per-sweep trajectory CSV");
  cmd->add_option("--manifest", o->manifest, kManifestHelp);
  cmd->callback([o, &runner] { runner = [o] { return run_decompose(*o); }; });
}

void setup_certify(CLI::App& app, std::function<int()>& runner) {
  auto o = std::make_shared<CertifyOpts>();
  auto* cmd = app.add_subcommand(
      "certify", "Existence/uniqueness certificate for a CP model");
  cmd->add_option("--model", o->model, "Model file (.cpj)")->required();
  cmd->add_option("--tol", o->tol, "Singular value tolerance")->capture_default_str();
  cmd->add_option("--manifest", o->manifest, kManifestHelp);
  cmd->callback([o, &runner] { runner = [o] { return run_certify(*o); }; });
}

void setup_localize(CLI::App& app, std::function<int()>& runner) {
  auto o = std::make_shared<LocalizeOpts>();
  auto* cmd = app.add_subcommand(
      "localize", "Recover source directions and waveforms from a model");
  cmd->add_option("--model", o->model, "Model file (.cpj)")->required();
  cmd->add_option("--config", o->config, "Scenario JSON file")->required();
  cmd->add_option("--truth", o->truth, "Ground-truth model (.cpj)");
  cmd->add_option("--out", o->out, "Report JSON")->required();
  cmd->add_option("--manifest", o->manifest, kManifestHelp);
  cmd->callback([o, &runner] { runner = [o] { return run_localize(*o); }; });
}

void setup_spark(CLI::App& app, std::function<int()>& runner) {
  auto o = std::make_shared<SparkOpts>();
  auto* cmd = app.add_subcommand(
      "spark", "Coherence, spark, and Kruskal rank of a column collection");
  cmd->add_option("--matrix", o->matrix, "Matrix file (.cmx)")->required();
  cmd->add_option("--tol", o->tol, "Singular value tolerance")->capture_default_str();
  cmd->add_option("--manifest", o->manifest, kManifestHelp);
  cmd->callback([o, &runner] { runner = [o] { return run_spark(*o); }; });
}

void setup_demo(CLI::App& app, std::function<int()>& runner) {
  auto o = std::make_shared<DemoOpts>();
  auto* cmd = app.add_subcommand(
      "demo-degeneracy",
      "Border-rank degeneracy demo: diverging weights and their cure");
  cmd->add_option("--n-list", o->n_list, "Sequence indices n, comma-separated")
      ->required()
      ->delimiter(',');
  cmd->add_option("--constrained-caps", o->caps,
                  "Run a second, coherence-capped solve with caps a,b,c")
      ->delimiter(',');
  cmd->add_option("--out", o->out, "Output CSV")->required();
  cmd->add_option("--seed", o->seed, "RNG seed")->capture_default_str();
  cmd->add_option("--max-iter", o->max_iter, "Sweep limit per restart")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o->tol,
                  "Relative residual change convergence threshold")->capture_default_str();
  cmd->add_option("--restarts", o->restarts, "Random restarts")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--manifest", o->manifest, kManifestHelp);
  cmd->callback([o, &runner] { runner = [o] { return run_demo(*o); }; });
}

int run_guarded(const std::function<int()>& runner) {
  try {
    return runner();
  } catch (const usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const infeasible_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const error& e) {
    // dimension, domain, and capacity errors: bad numbers, not bad files.
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherence-constrained CP decomposition toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::function<int()> runner;
  setup_synth(app, runner);
  setup_decompose(app, runner);
  setup_certify(app, runner);
  setup_localize(app, runner);
  setup_spark(app, runner);
  setup_demo(app, runner);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help/version or the error + hint
    return code == 0 ? 0 : 1;
  }
  return run_guarded(runner);
}
