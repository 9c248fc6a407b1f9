// SPDX-License-Identifier: Apache-2.0
#include "cohten/solve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <thread>
#include <utility>

#include <Eigen/QR>

#include "cohten/coherence.hpp"
#include "cohten/rng.hpp"

namespace cohten {

namespace {

// Divergence detector: the largest weight grew by this factor over a
// trailing window of sweeps while the residual improvement over the same
// window, measured relative to the input norm, collapsed. Healthy runs
// either still improve the residual at a visible rate or have stable
// weights; only rank-deficiency escapes combine stalled fit with
// relentless weight growth.
constexpr int kDivergenceWindow = 500;
constexpr double kDivergenceGrowth = 10.0;
constexpr double kDivergenceStall = 1e-6;

// Per-sweep extrapolation: after each sweep, candidates are placed along
// the sweep direction and along the last accepted jump, each scaled so the
// largest weight moves by about this fraction, then polished with one
// plain sweep and kept only when the polished point fits strictly better.
// Plain sweeps crawl through rank-deficiency escapes at
// |lambda| ~ iter^(1/4); the accepted jumps turn that into a controlled
// geometric climb the detector above can read, while on benign inputs the
// candidates simply lose and nothing changes. The polish pass matters: a
// raw step overshoots the curved valley floor and would rarely win on its
// own, but one sweep pulls it back onto the floor further along. Reusing
// the last accepted jump matters too: for several sweeps after a jump the
// sweep direction is dominated by the pull-back transient rather than the
// valley tangent, while the stored jump connects two points on the floor
// and stays clean.
constexpr double kExtrapolationRate = 0.01;

// Convergence additionally requires the largest weight to be stable to
// this relative tolerance over the last sweep, so a run still inflating
// its weights is never declared converged.
constexpr double kLambdaStability = 1e-6;

constexpr double kFeasibilitySlack = 1e-6;

struct Factors {
  Eigen::MatrixXcd u, v, w;
  Eigen::VectorXcd lambda;
};

Eigen::MatrixXcd& factor(Factors& f, int mode) {
  return mode == 0 ? f.u : (mode == 1 ? f.v : f.w);
}

// Mode-d unfolding with the other two indices flattened so that the first
// remaining index is slow and the last is fast, matching khatri_rao below.
Eigen::MatrixXcd unfold(const Tensor3& t, int mode) {
  const int l = t.dim0(), m = t.dim1(), n = t.dim2();
  Eigen::MatrixXcd out;
  switch (mode) {
    case 0:
      out.resize(l, static_cast<Eigen::Index>(m) * n);
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < n; ++k) out(i, j * n + k) = t(i, j, k);
      break;
    case 1:
      out.resize(m, static_cast<Eigen::Index>(l) * n);
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < n; ++k) out(j, i * n + k) = t(i, j, k);
      break;
    default:
      out.resize(n, static_cast<Eigen::Index>(l) * m);
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < n; ++k) out(k, i * m + j) = t(i, j, k);
      break;
  }
  return out;
}

// Columnwise Kronecker product; row (a_row * b.rows() + b_row).
Eigen::MatrixXcd khatri_rao(const Eigen::MatrixXcd& a,
                            const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd k(a.rows() * b.rows(), a.cols());
  for (Eigen::Index p = 0; p < a.cols(); ++p)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      k.col(p).segment(i * b.rows(), b.rows()) = a(i, p) * b.col(p);
  return k;
}

double factor_coherence(const Eigen::MatrixXcd& f) {
  const Eigen::Index r = f.cols();
  if (r == 1) return 0.0;
  double mu = 0.0;
  for (Eigen::Index p = 0; p < r; ++p)
    for (Eigen::Index q = p + 1; q < r; ++q)
      mu = std::max(mu, std::abs(cx(f.col(q).adjoint() * f.col(p))));
  return std::min(mu, 1.0);
}

double factors_residual(const Tensor3& a, const Factors& f) {
  const int l = a.dim0(), m = a.dim1(), n = a.dim2();
  const int r = static_cast<int>(f.lambda.size());
  double s = 0.0;
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < n; ++k) {
        cx approx(0.0, 0.0);
        for (int p = 0; p < r; ++p)
          approx += f.lambda(p) * f.u(i, p) * f.v(j, p) * f.w(k, p);
        s += std::norm(a(i, j, k) - approx);
      }
    }
  }
  return std::sqrt(s);
}

// Exact least-squares update of one mode: solves A_mode ~= X * K^T for X,
// then folds column norms into the weights. Near-zero columns keep their
// previous direction with a zero weight.
void update_mode(const Eigen::MatrixXcd& unf, int mode, Factors& f) {
  const Eigen::MatrixXcd k =
      mode == 0 ? khatri_rao(f.v, f.w)
                : (mode == 1 ? khatri_rao(f.u, f.w) : khatri_rao(f.u, f.v));
  const Eigen::MatrixXcd xt =
      k.completeOrthogonalDecomposition().solve(unf.transpose());
  Eigen::MatrixXcd& target = factor(f, mode);
  for (Eigen::Index p = 0; p < xt.rows(); ++p) {
    const double norm = xt.row(p).norm();
    if (norm < 1e-300) {
      f.lambda(p) = cx(0.0, 0.0);
    } else {
      target.col(p) = xt.row(p).transpose() / norm;
      f.lambda(p) = cx(norm, 0.0);
    }
  }
}

double hinge_penalty(const Eigen::MatrixXcd& x, double cap) {
  double p = 0.0;
  const Eigen::MatrixXcd g = x.adjoint() * x;
  for (Eigen::Index a = 0; a < x.cols(); ++a)
    for (Eigen::Index b = a + 1; b < x.cols(); ++b) {
      const double h = std::max(0.0, std::abs(g(a, b)) - cap);
      p += h * h;
    }
  return p;
}

void normalize_columns(Eigen::MatrixXcd& x) {
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    const double norm = x.col(p).norm();
    if (norm > 1e-300) x.col(p) /= norm;
  }
}

// Projected gradient descent on fit + weight * hinge_penalty over unit
// columns, starting from the current factor. Weights are held fixed.
void descend_penalized(const Eigen::MatrixXcd& unf, const Eigen::MatrixXcd& k,
                       Eigen::MatrixXcd& x, const Eigen::VectorXcd& lambda,
                       double cap, double weight, int max_steps) {
  const Eigen::MatrixXcd kd = k.conjugate() * lambda.conjugate().asDiagonal();
  auto objective = [&](const Eigen::MatrixXcd& xx) {
    const double fit =
        (unf - xx * lambda.asDiagonal() * k.transpose()).squaredNorm();
    return fit + weight * hinge_penalty(xx, cap);
  };
  double eta = 0.5;
  double current = objective(x);
  for (int step = 0; step < max_steps; ++step) {
    if (factor_coherence(x) <= cap) return;
    // Gradient of the fit term, then of the hinge penalty.
    Eigen::MatrixXcd grad =
        (x * lambda.asDiagonal() * k.transpose() - unf) * kd;
    const Eigen::MatrixXcd g = x.adjoint() * x;
    for (Eigen::Index p = 0; p < x.cols(); ++p) {
      for (Eigen::Index q = 0; q < x.cols(); ++q) {
        if (q == p) continue;
        const cx gpq = g(q, p);
        const double mag = std::abs(gpq);
        const double h = mag - cap;
        if (h > 0.0 && mag > 1e-300)
          grad.col(p) += weight * h * (gpq / mag) * x.col(q);
      }
    }
    bool moved = false;
    for (int halving = 0; halving < 30; ++halving) {
      Eigen::MatrixXcd candidate = x - eta * grad;
      normalize_columns(candidate);
      const double value = objective(candidate);
      if (value < current) {
        x = std::move(candidate);
        current = value;
        eta *= 1.5;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) return;  // stationary for this weight
  }
}

// Shrinks the most correlated column pairs until the coherence cap holds:
// replaces the later column of an offending pair by the normalized
// combination whose correlation with the earlier one lands exactly on the
// cap. Used as the hard feasibility phase after penalty sweeps.
bool enforce_cap(Eigen::MatrixXcd& x, double cap, int max_passes = 200) {
  for (int pass = 0; pass < max_passes; ++pass) {
    double worst = cap;
    Eigen::Index wp = -1, wq = -1;
    const Eigen::MatrixXcd g = x.adjoint() * x;
    for (Eigen::Index p = 0; p < x.cols(); ++p)
      for (Eigen::Index q = p + 1; q < x.cols(); ++q) {
        const double mag = std::abs(g(p, q));
        if (mag > worst) {
          worst = mag;
          wp = p;
          wq = q;
        }
      }
    if (wp < 0) return true;
    // g(wp, wq) = x_wp^H x_wq = a * e^{i theta}; subtracting
    // beta * e^{i theta} * x_wp from x_wq moves |corr| exactly to cap for
    // beta = a - cap * sqrt((1 - a^2) / (1 - cap^2)).
    const cx gpq = g(wp, wq);
    const double a = std::min(std::abs(gpq), 1.0);
    if (a >= 1.0 - 1e-15) return false;  // collinear pair cannot be split
    const double beta =
        a - cap * std::sqrt((1.0 - a * a) / (1.0 - cap * cap));
    const cx phase = gpq / a;
    x.col(wq) -= beta * phase * x.col(wp);
    const double norm = x.col(wq).norm();
    if (norm < 1e-300) return false;
    x.col(wq) /= norm;
  }
  return factor_coherence(x) <= cap + kFeasibilitySlack;
}

// Least-squares refit of the weights with all factor columns fixed.
void refit_lambda(const Tensor3& a, Factors& f) {
  const int l = a.dim0(), m = a.dim1(), n = a.dim2();
  const int r = static_cast<int>(f.lambda.size());
  Eigen::MatrixXcd basis(static_cast<Eigen::Index>(l) * m * n, r);
  for (int p = 0; p < r; ++p) {
    Eigen::Index row = 0;
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < n; ++k)
          basis(row++, p) = f.u(i, p) * f.v(j, p) * f.w(k, p);
  }
  const Eigen::Map<const Eigen::VectorXcd> rhs(a.data().data(),
                                               static_cast<Eigen::Index>(
                                                   a.size()));
  f.lambda = basis.completeOrthogonalDecomposition().solve(rhs);
}

// Coordinates in which a rank-deficiency escape is close to a straight
// line: the weights are folded into the first factor and the others stay
// unit scale.
Eigen::MatrixXcd folded_u(const Factors& f) {
  return f.u * f.lambda.asDiagonal();
}

// Displacement between two iterates in the folded coordinates, together
// with the move of the largest weight it produced.
struct JumpDirection {
  Eigen::MatrixXcd du, dv, dw;
  double dlam = 0.0;
};

// Point at f + s * dir in the folded coordinates, refactored into unit
// columns and weights. Returns false when a column collapses.
bool build_candidate(const Factors& f, const JumpDirection& dir, double s,
                     Factors& cand) {
  const Eigen::MatrixXcd gu = folded_u(f) + s * dir.du;
  const Eigen::MatrixXcd gv = f.v + s * dir.dv;
  const Eigen::MatrixXcd gw = f.w + s * dir.dw;
  cand = f;
  for (Eigen::Index p = 0; p < cand.lambda.size(); ++p) {
    const double nu = gu.col(p).norm();
    const double nv = gv.col(p).norm();
    const double nw = gw.col(p).norm();
    if (nu < 1e-300 || nv < 1e-300 || nw < 1e-300) return false;
    cand.u.col(p) = gu.col(p) / nu;
    cand.v.col(p) = gv.col(p) / nv;
    cand.w.col(p) = gw.col(p) / nw;
    cand.lambda(p) = cx(nu * nv * nw, 0.0);
  }
  return true;
}

// Extrapolated candidates as described at kExtrapolationRate: one along
// the sweep secant, one along the last accepted jump. Each is polished
// with one plain sweep; the best polished point replaces the sweep result
// only when it fits strictly better and, in capped runs, stays feasible,
// so monotonicity and the cap postcondition are preserved. An accepted
// point updates the stored jump.
void try_extrapolate(const Tensor3& a,
                     const std::array<Eigen::MatrixXcd, 3>& unf,
                     const Factors& before, Factors& f, bool constrained,
                     const std::array<double, 3>& caps,
                     std::optional<JumpDirection>& last_jump) {
  const double lam_after = f.lambda.cwiseAbs().maxCoeff();
  if (lam_after <= 0.0) return;

  // Polishes a raw candidate and scores it; infinity marks an unusable
  // point so plain rejection handles it.
  auto polished_residual = [&](Factors& cand) {
    for (int mode = 0; mode < 3; ++mode) update_mode(unf[mode], mode, cand);
    if (constrained &&
        (factor_coherence(cand.u) > caps[0] + kFeasibilitySlack ||
         factor_coherence(cand.v) > caps[1] + kFeasibilitySlack ||
         factor_coherence(cand.w) > caps[2] + kFeasibilitySlack))
      return std::numeric_limits<double>::infinity();
    return factors_residual(a, cand);
  };

  const double rf = factors_residual(a, f);
  Factors best;
  double best_res = rf;
  bool have_best = false;

  const double dl_sweep =
      std::abs(lam_after - before.lambda.cwiseAbs().maxCoeff());
  if (dl_sweep > 0.0) {
    const double s = kExtrapolationRate * lam_after / dl_sweep;
    if (s > 1.0) {
      JumpDirection secant{folded_u(f) - folded_u(before), f.v - before.v,
                           f.w - before.w, 0.0};
      Factors cand;
      if (build_candidate(f, secant, std::min(s, 1e12) - 1.0, cand)) {
        const double rc = polished_residual(cand);
        if (rc < best_res) {
          best = std::move(cand);
          best_res = rc;
          have_best = true;
        }
      }
    }
  }

  if (last_jump && std::abs(last_jump->dlam) > 0.0) {
    const double s = std::min(
        kExtrapolationRate * lam_after / std::abs(last_jump->dlam), 1e12);
    Factors cand;
    if (build_candidate(f, *last_jump, s, cand)) {
      const double rc = polished_residual(cand);
      if (rc < best_res) {
        best = std::move(cand);
        best_res = rc;
        have_best = true;
      }
    }
  }

  if (!have_best) return;
  last_jump = JumpDirection{
      folded_u(best) - folded_u(f), best.v - f.v, best.w - f.w,
      best.lambda.cwiseAbs().maxCoeff() - lam_after};
  if (std::abs(last_jump->dlam) == 0.0) last_jump.reset();
  f = std::move(best);
}

// Weight growth over the trailing window; 0 when the window is not full
// yet or the reference weight vanished.
double window_growth(const std::vector<IterRecord>& h) {
  const std::size_t t = h.size() - 1;
  if (t < static_cast<std::size_t>(kDivergenceWindow)) return 0.0;
  const IterRecord& past = h[t - kDivergenceWindow];
  if (past.lambda_max <= 0.0) return 0.0;
  return h[t].lambda_max / past.lambda_max;
}

bool diverging(const std::vector<IterRecord>& h, double a_norm) {
  if (window_growth(h) < kDivergenceGrowth) return false;
  const std::size_t t = h.size() - 1;
  const IterRecord& past = h[t - kDivergenceWindow];
  const double rel_dec =
      (past.residual - h[t].residual) / std::max(a_norm, 1e-300);
  return rel_dec < kDivergenceStall;
}

struct SingleRun {
  Factors factors;
  SolveTrace trace;
  double final_residual = 0.0;
};

SingleRun run_single(const Tensor3& a, const SolverOptions& opts,
                     int restart) {
  const int l = a.dim0(), m = a.dim1(), n = a.dim2();
  const int r = opts.r;
  const bool constrained = opts.mu_caps.has_value();
  const std::array<double, 3> caps =
      constrained ? *opts.mu_caps : std::array<double, 3>{1.0, 1.0, 1.0};

  std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(restart)));
  SingleRun run;
  Factors& f = run.factors;
  f.u = random_unit_columns(rng, l, r);
  f.v = random_unit_columns(rng, m, r);
  f.w = random_unit_columns(rng, n, r);
  f.lambda = Eigen::VectorXcd::Ones(r);

  const std::array<Eigen::MatrixXcd, 3> unf = {unfold(a, 0), unfold(a, 1),
                                               unfold(a, 2)};

  SolveTrace& trace = run.trace;
  trace.restart_index = restart;
  auto record = [&](int iter) {
    IterRecord rec;
    rec.iter = iter;
    rec.residual = factors_residual(a, f);
    rec.lambda_max = f.lambda.cwiseAbs().maxCoeff();
    rec.mu_u = factor_coherence(f.u);
    rec.mu_v = factor_coherence(f.v);
    rec.mu_w = factor_coherence(f.w);
    trace.iterations.push_back(rec);
  };
  record(0);

  const double a_norm = frobenius_norm(a);
  double weight = opts.penalty_weight;
  std::optional<JumpDirection> last_jump;
  trace.status = SolveStatus::max_iter;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const Factors before = f;
    bool corrected = false;
    for (int mode = 0; mode < 3; ++mode) {
      update_mode(unf[mode], mode, f);
      if (constrained && factor_coherence(factor(f, mode)) > caps[mode]) {
        descend_penalized(unf[mode], mode == 0
                              ? khatri_rao(f.v, f.w)
                              : (mode == 1 ? khatri_rao(f.u, f.w)
                                           : khatri_rao(f.u, f.v)),
                          factor(f, mode), f.lambda, caps[mode], weight, 25);
        corrected = true;
      }
    }
    if (corrected)
      refit_lambda(a, f);
    else
      try_extrapolate(a, unf, before, f, constrained, caps, last_jump);
    record(iter);

    if (diverging(trace.iterations, a_norm)) {
      trace.status = SolveStatus::diverging_weights;
      break;
    }
    bool sweep_feasible = true;
    if (constrained) {
      sweep_feasible = factor_coherence(f.u) <= caps[0] + kFeasibilitySlack &&
                       factor_coherence(f.v) <= caps[1] + kFeasibilitySlack &&
                       factor_coherence(f.w) <= caps[2] + kFeasibilitySlack;
      if (!sweep_feasible) weight *= opts.penalty_growth;
    }
    // Converged: the iterate is stationary (residual and largest weight
    // both stable over the sweep) and nothing in the trailing window
    // suggests an ongoing weight escape.
    const IterRecord& prev = trace.iterations[trace.iterations.size() - 2];
    const IterRecord& cur = trace.iterations.back();
    const bool res_stable =
        std::abs(prev.residual - cur.residual) < opts.rel_tol * a_norm;
    const bool lambda_stable =
        std::abs(cur.lambda_max - prev.lambda_max) <=
        kLambdaStability * std::max(prev.lambda_max, 1.0);
    const bool escaping =
        window_growth(trace.iterations) >= kDivergenceGrowth;
    if (sweep_feasible && !escaping &&
        (cur.residual == 0.0 || (res_stable && lambda_stable))) {
      trace.status = SolveStatus::converged;
      break;
    }
  }

  if (constrained) {
    // Hard feasibility phase: pull any remaining over-cap pairs onto the
    // caps, then refit the weights against the data.
    bool feasible = true;
    bool touched = false;
    for (int mode = 0; mode < 3; ++mode) {
      Eigen::MatrixXcd& x = factor(f, mode);
      if (factor_coherence(x) > caps[mode] + kFeasibilitySlack) {
        touched = true;
        if (!enforce_cap(x, caps[mode])) feasible = false;
      }
    }
    if (touched && feasible) {
      refit_lambda(a, f);
      IterRecord rec = trace.iterations.back();
      rec.iter += 1;
      rec.residual = factors_residual(a, f);
      rec.lambda_max = f.lambda.cwiseAbs().maxCoeff();
      rec.mu_u = factor_coherence(f.u);
      rec.mu_v = factor_coherence(f.v);
      rec.mu_w = factor_coherence(f.w);
      trace.iterations.push_back(rec);
    }
    trace.feasible = feasible &&
                     factor_coherence(f.u) <= caps[0] + kFeasibilitySlack &&
                     factor_coherence(f.v) <= caps[1] + kFeasibilitySlack &&
                     factor_coherence(f.w) <= caps[2] + kFeasibilitySlack;
  }

  run.final_residual = trace.iterations.back().residual;
  return run;
}

void validate_common(const Tensor3& a, const SolverOptions& opts) {
  if (opts.r < 1) throw domain_error("solver: rank must be >= 1");
  if (opts.max_iter < 1) throw domain_error("solver: max_iter must be >= 1");
  if (opts.restarts < 1) throw domain_error("solver: restarts must be >= 1");
  if (opts.rel_tol < 0.0) throw domain_error("solver: rel_tol must be >= 0");
  const long long mn = static_cast<long long>(a.dim1()) * a.dim2();
  const long long ln = static_cast<long long>(a.dim0()) * a.dim2();
  const long long lm = static_cast<long long>(a.dim0()) * a.dim1();
  if (opts.r > std::min({mn, ln, lm})) {
    throw domain_error(
        "solver: rank exceeds the smallest product of two mode dims");
  }
  if (frobenius_norm(a) == 0.0) {
    throw domain_error("solver: degenerate input, the zero tensor admits no "
                       "meaningful rank-r expansion");
  }
}

std::vector<SingleRun> run_restarts(const Tensor3& a,
                                    const SolverOptions& opts) {
  std::vector<SingleRun> runs(opts.restarts);
  const int threads =
      std::min(solver_thread_count(), opts.restarts);
  if (threads <= 1) {
    for (int i = 0; i < opts.restarts; ++i) runs[i] = run_single(a, opts, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < opts.restarts;
             i = next.fetch_add(1)) {
          runs[i] = run_single(a, opts, i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  return runs;
}

SolveResult pack_result(SingleRun&& run) {
  CpModel model(std::move(run.factors.lambda), std::move(run.factors.u),
                std::move(run.factors.v), std::move(run.factors.w));
  return SolveResult{std::move(model), std::move(run.trace)};
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    default: return "diverging_weights";
  }
}

int solver_thread_count() {
  if (const char* env = std::getenv("COHTEN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) {
      return static_cast<int>(std::min(v, 1024L));
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

SolveResult als_decompose(const Tensor3& a, const SolverOptions& opts) {
  if (opts.mu_caps.has_value()) {
    throw domain_error(
        "als_decompose: mu_caps set; use constrained_decompose");
  }
  validate_common(a, opts);
  std::vector<SingleRun> runs = run_restarts(a, opts);
  int best = 0;
  for (int i = 1; i < opts.restarts; ++i) {
    if (runs[i].final_residual < runs[best].final_residual) best = i;
  }
  return pack_result(std::move(runs[best]));
}

SolveResult constrained_decompose(const Tensor3& a,
                                  const SolverOptions& opts) {
  if (!opts.mu_caps.has_value()) {
    throw domain_error("constrained_decompose: mu_caps not set");
  }
  for (double cap : *opts.mu_caps) {
    if (!(cap > 0.0 && cap <= 1.0)) {
      throw domain_error("constrained_decompose: caps must be in (0, 1]");
    }
  }
  if (opts.penalty_weight <= 0.0 || opts.penalty_growth < 1.0) {
    throw domain_error("constrained_decompose: penalty_weight must be > 0 "
                       "and penalty_growth >= 1");
  }
  validate_common(a, opts);

  std::string warning;
  {
    const auto& c = *opts.mu_caps;
    const double prod = c[0] * c[1] * c[2];
    if (prod >= 1.0 / opts.r) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "cap product %.6g >= 1/r = %.6g: a best cap-feasible "
                    "approximation is not guaranteed to exist",
                    prod, 1.0 / opts.r);
      warning = buf;
    }
  }

  std::vector<SingleRun> runs = run_restarts(a, opts);
  int best_feasible = -1;
  int best_any = 0;
  for (int i = 0; i < opts.restarts; ++i) {
    if (runs[i].final_residual < runs[best_any].final_residual) best_any = i;
    if (runs[i].trace.feasible &&
        (best_feasible < 0 ||
         runs[i].final_residual < runs[best_feasible].final_residual)) {
      best_feasible = i;
    }
  }
  if (best_feasible < 0) {
    SolveTrace best = std::move(runs[best_any].trace);
    if (!warning.empty()) best.notes.push_back(warning);
    throw infeasible_error(
        "constrained_decompose: no restart satisfied the coherence caps",
        std::move(best));
  }
  SolveResult result = pack_result(std::move(runs[best_feasible]));
  if (!warning.empty()) result.trace.notes.push_back(warning);
  return result;
}

double AlignResult::score() const {
  return std::min({score_u, score_v, score_w});
}

AlignResult align_models(const CpModel& m, const CpModel& reference) {
  if (m.rank() != reference.rank()) {
    throw dimension_error("align_models: ranks differ");
  }
  if (m.dim0() != reference.dim0() || m.dim1() != reference.dim1() ||
      m.dim2() != reference.dim2()) {
    throw dimension_error("align_models: shapes differ");
  }
  const int r = m.rank();

  Eigen::MatrixXd su(r, r), sv(r, r), sw(r, r);
  for (int p = 0; p < r; ++p) {
    for (int q = 0; q < r; ++q) {
      su(p, q) = std::abs(cx(m.u().col(p).adjoint() * reference.u().col(q)));
      sv(p, q) = std::abs(cx(m.v().col(p).adjoint() * reference.v().col(q)));
      sw(p, q) = std::abs(cx(m.w().col(p).adjoint() * reference.w().col(q)));
    }
  }

  AlignResult out;
  out.permutation.assign(r, -1);
  out.phases.assign(r, {0.0, 0.0, 0.0});
  std::vector<bool> used_p(r, false), used_q(r, false);
  for (int step = 0; step < r; ++step) {
    double best = -1.0;
    int bp = -1, bq = -1;
    // Scan order (q outer, p inner) with strict improvement resolves ties
    // to the lexicographically smallest permutation.
    for (int q = 0; q < r; ++q) {
      if (used_q[q]) continue;
      for (int p = 0; p < r; ++p) {
        if (used_p[p]) continue;
        const double s = su(p, q) * sv(p, q) * sw(p, q);
        if (s > best) {
          best = s;
          bp = p;
          bq = q;
        }
      }
    }
    used_p[bp] = used_q[bq] = true;
    out.permutation[bq] = bp;
  }

  out.score_u = out.score_v = out.score_w = 1.0;
  for (int q = 0; q < r; ++q) {
    const int p = out.permutation[q];
    out.score_u = std::min(out.score_u, su(p, q));
    out.score_v = std::min(out.score_v, sv(p, q));
    out.score_w = std::min(out.score_w, sw(p, q));

    // Rotation aligning each model column with its reference column; the
    // common part is removed so the triple sums to zero mod 2*pi.
    const double au =
        std::arg(cx(m.u().col(p).adjoint() * reference.u().col(q)));
    const double av =
        std::arg(cx(m.v().col(p).adjoint() * reference.v().col(q)));
    const double aw =
        std::arg(cx(m.w().col(p).adjoint() * reference.w().col(q)));
    const double shift = (au + av + aw) / 3.0;
    auto wrap = [](double t) {
      const double two_pi = 2.0 * std::numbers::pi;
      t = std::fmod(t, two_pi);
      if (t > std::numbers::pi) t -= two_pi;
      if (t <= -std::numbers::pi) t += two_pi;
      return t;
    };
    out.phases[q] = {wrap(au - shift), wrap(av - shift), wrap(aw - shift)};
  }
  return out;
}

}  // namespace cohten
