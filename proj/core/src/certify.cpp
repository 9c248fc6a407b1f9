// SPDX-License-Identifier: Apache-2.0
#include "cohten/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cohten {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxExactKrank = 24;

void require_mu_01(double mu, const char* who) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw domain_error(std::string(who) + ": coherence must be in [0, 1]");
  }
}

void require_rank(int r, const char* who) {
  if (r < 1) throw domain_error(std::string(who) + ": rank must be >= 1");
}

double inverse_or_inf(double mu) { return mu == 0.0 ? kInf : 1.0 / mu; }

}  // namespace

Check check_kruskal(int krank_u, int krank_v, int krank_w, int r) {
  require_rank(r, "check_kruskal");
  if (krank_u < 1 || krank_v < 1 || krank_w < 1) {
    throw domain_error("check_kruskal: kranks must be >= 1");
  }
  Check c;
  c.name = "kruskal";
  c.lhs = static_cast<double>(krank_u) + krank_v + krank_w;
  c.rhs = 2.0 * r + 2.0;
  c.holds = c.lhs >= c.rhs;
  c.margin = c.lhs - c.rhs;
  return c;
}

Check check_coherence_kruskal(double mu_u, double mu_v, double mu_w, int r) {
  require_rank(r, "check_coherence_kruskal");
  require_mu_01(mu_u, "check_coherence_kruskal");
  require_mu_01(mu_v, "check_coherence_kruskal");
  require_mu_01(mu_w, "check_coherence_kruskal");
  Check c;
  c.name = "coherence_kruskal";
  c.lhs = 0.5 * (inverse_or_inf(mu_u) + inverse_or_inf(mu_v) +
                 inverse_or_inf(mu_w));
  c.rhs = static_cast<double>(r);
  c.holds = c.lhs > c.rhs;
  c.margin = c.lhs - c.rhs;
  return c;
}

Check check_existence_bound(double mu_u, double mu_v, double mu_w, int r) {
  require_rank(r, "check_existence_bound");
  require_mu_01(mu_u, "check_existence_bound");
  require_mu_01(mu_v, "check_existence_bound");
  require_mu_01(mu_w, "check_existence_bound");
  Check c;
  c.name = "existence_bound";
  c.lhs = mu_u * mu_v * mu_w;
  c.rhs = 1.0 / r;
  c.holds = c.lhs < c.rhs;
  // Margin measures distance to violation; a zero product can never be
  // pushed past the bound, hence infinite.
  c.margin = c.lhs == 0.0 ? kInf : c.rhs - c.lhs;
  return c;
}

Check check_corollary(double mu_u, double mu_v, double mu_w, int r) {
  require_rank(r, "check_corollary");
  if (mu_u < 0.0 || mu_v < 0.0 || mu_w < 0.0) {
    throw domain_error("check_corollary: coherences must be >= 0");
  }
  Check c;
  c.name = "corollary_bound";
  const double prod = mu_u * mu_v * mu_w;
  c.lhs = prod == 0.0 ? kInf : 1.0 / std::cbrt(prod);
  c.rhs = 2.0 * r / 3.0;
  // Decide in the cubed scale: 1/cbrt(p) > 2r/3 <=> 27 > 8 r^3 p. Products
  // round correctly while cbrt may not (1/cbrt(0.125) can land one ulp above
  // 2), so only the cubed form resolves boundary inputs exactly.
  const double rr = static_cast<double>(r);
  c.holds = 27.0 > 8.0 * rr * rr * rr * prod;
  c.margin = c.lhs == kInf ? kInf : c.lhs - c.rhs;
  return c;
}

Check check_spark_recovery(int spark_value, int k) {
  if (k < 0) throw domain_error("check_spark_recovery: k must be >= 0");
  if (!is_infinite_spark(spark_value) && spark_value < 2) {
    throw domain_error("check_spark_recovery: spark must be >= 2");
  }
  Check c;
  c.name = "spark_recovery";
  c.lhs = is_infinite_spark(spark_value) ? kInf : 0.5 * spark_value;
  c.rhs = static_cast<double>(k);
  c.holds = c.lhs >= c.rhs;
  c.margin = c.lhs == kInf ? kInf : c.lhs - c.rhs;
  return c;
}

Check check_coherence_recovery(double mu, int k) {
  if (k < 0) throw domain_error("check_coherence_recovery: k must be >= 0");
  require_mu_01(mu, "check_coherence_recovery");
  Check c;
  c.name = "coherence_recovery";
  c.lhs = mu == 0.0 ? kInf : 0.5 * (1.0 + 1.0 / mu);
  c.rhs = static_cast<double>(k);
  c.holds = c.lhs >= c.rhs;
  c.margin = c.lhs == kInf ? kInf : c.lhs - c.rhs;
  return c;
}

const Check& Certificate::check(const std::string& name) const {
  for (const Check& c : checks) {
    if (c.name == name) return c;
  }
  throw domain_error("Certificate: no check named '" + name + "'");
}

Certificate certify_model(const CpModel& m, const CertifyOptions& opts) {
  if (opts.tol < 0.0 || opts.lambda_min < 0.0) {
    throw domain_error("certify_model: tolerances must be >= 0");
  }
  Certificate cert;
  cert.r = m.rank();
  cert.mu_u = coherence(ColumnSet(m.u()));
  cert.mu_v = coherence(ColumnSet(m.v()));
  cert.mu_w = coherence(ColumnSet(m.w()));

  if (cert.r <= kMaxExactKrank) {
    cert.krank_exact = true;
    cert.krank_u = krank(ColumnSet(m.u()), opts.tol);
    cert.krank_v = krank(ColumnSet(m.v()), opts.tol);
    cert.krank_w = krank(ColumnSet(m.w()), opts.tol);
  } else {
    // Exhaustive spark search is out of reach; fall back to the clamped
    // coherence lower bound min(r, ceil(1/mu)).
    cert.krank_exact = false;
    auto lb = [&](double mu) {
      if (mu == 0.0) return cert.r;
      return std::min(cert.r, static_cast<int>(std::ceil(1.0 / mu)));
    };
    cert.krank_u = lb(cert.mu_u);
    cert.krank_v = lb(cert.mu_v);
    cert.krank_w = lb(cert.mu_w);
  }

  cert.weights_ok = m.lambda().cwiseAbs().minCoeff() > opts.lambda_min;

  cert.checks.push_back(
      check_kruskal(cert.krank_u, cert.krank_v, cert.krank_w, cert.r));
  cert.checks.push_back(
      check_coherence_kruskal(cert.mu_u, cert.mu_v, cert.mu_w, cert.r));
  cert.checks.push_back(
      check_existence_bound(cert.mu_u, cert.mu_v, cert.mu_w, cert.r));
  cert.checks.push_back(
      check_corollary(cert.mu_u, cert.mu_v, cert.mu_w, cert.r));

  cert.rank_certified =
      cert.weights_ok && cert.check("coherence_kruskal").holds;
  return cert;
}

}  // namespace cohten
