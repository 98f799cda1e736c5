#include "snl/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snl/error.hpp"
#include "snl/kernels.hpp"

namespace snl {

void RegionParams::validate() const {
  if (!(mu >= 0.0) || !(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0))
    throw InputError("region parameters mu, alpha, beta, gamma must be nonnegative");
}

std::string to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::R1: return "R1";
    case RegionLabel::R2: return "R2";
    case RegionLabel::R3a: return "R3a";
    case RegionLabel::R3b: return "R3b";
    case RegionLabel::R3c: return "R3c";
  }
  return "?";
}

bool RegionSet::empty() const {
  return std::none_of(flags_.begin(), flags_.end(), [](bool b) { return b; });
}

std::vector<std::string> RegionSet::names() const {
  std::vector<std::string> out;
  for (RegionLabel l : kAllRegions)
    if (contains(l)) out.push_back(to_string(l));
  return out;
}

std::string RegionSet::joined() const {
  std::string s;
  for (const auto& name : names()) {
    if (!s.empty()) s += ';';
    s += name;
  }
  return s;
}

Classification classify(const Factor& y, const SymMatrix& a, const SpectralTarget& target,
                        const RegionParams& p) {
  p.validate();
  if (y.n() != target.factor.n() || y.r() != target.r())
    throw InputError("classify: factor shape differs from the target");
  const SvdDecomp svd = thin_svd(y.mat());
  if (!(svd.s.back() > 1e-12 * svd.s.front()))
    throw InputError("classify: factor is rank-deficient");

  Classification c;
  c.distance = procrustes_align(y.mat(), target.factor.mat()).dist;
  c.grad_norm = frobenius_norm(riem_grad(y, a).entries);
  c.norm = svd.s.front();
  c.gram_norm = frobenius_norm(matmul_nt(y.mat(), y.mat()));

  const double sr = target.sigma_r_star();
  const double kappa = target.kappa_star;
  c.dist_threshold = p.mu * sr / kappa;
  c.grad_threshold = p.alpha * p.mu * sr * sr * sr / (4.0 * kappa);

  const bool norm_ok = c.norm <= p.beta * target.norm_star();
  const bool gram_ok = c.gram_norm <= p.gamma * target.gram_norm_star();
  const bool near = c.distance <= c.dist_threshold;
  const bool small_grad = c.grad_norm <= c.grad_threshold;

  if (near) c.labels.insert(RegionLabel::R1);
  if (!near && small_grad && norm_ok && gram_ok) c.labels.insert(RegionLabel::R2);
  if (!small_grad && norm_ok && gram_ok) c.labels.insert(RegionLabel::R3a);
  if (!norm_ok && gram_ok) c.labels.insert(RegionLabel::R3b);
  if (!gram_ok) c.labels.insert(RegionLabel::R3c);
  return c;
}

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t r) {
  std::vector<std::vector<std::size_t>> out;
  if (r > n) return out;
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

Factor enumerate_fosp(const EigDecomp& eig, const std::vector<std::size_t>& subset, std::size_t r) {
  if (subset.size() != r)
    throw InputError("enumerate_fosp: subset has " + std::to_string(subset.size()) +
                     " indices, expected r = " + std::to_string(r));
  const std::size_t n = eig.values.size();
  Matrix y(n, r);
  for (std::size_t j = 0; j < r; ++j) {
    const std::size_t idx = subset[j];
    if (idx >= n) throw InputError("enumerate_fosp: index out of range");
    if (!(eig.values[idx] > 0.0))
      throw InputError("enumerate_fosp: eigenvalue " + std::to_string(idx + 1) + " is not positive");
    const double scale = std::sqrt(eig.values[idx]);
    for (std::size_t i = 0; i < n; ++i) y(i, j) = scale * eig.vectors(i, idx);
  }
  return Factor(std::move(y));
}

Factor enumerate_fosp(const Operator& a, const std::vector<std::size_t>& subset, std::size_t r) {
  return enumerate_fosp(a.eig, subset, r);
}

bool is_fosp(const Factor& y, const SymMatrix& a) {
  return frobenius_norm(riem_grad(y, a).entries) <= 1e-8 * (1.0 + frobenius_norm(a.mat()));
}

std::string to_string(EscapeBranch b) { return b == EscapeBranch::theta1 ? "theta1" : "theta2"; }

std::string to_string(EscapeStatus s) {
  switch (s) {
    case EscapeStatus::escape: return "escape";
    case EscapeStatus::no_escape: return "no_escape";
    case EscapeStatus::near_optimum: return "near_optimum";
  }
  return "?";
}

namespace {

// Unit top eigenvector of A restricted to the orthogonal complement of the
// columns of u (orthonormal), i.e. argmax a^T A a / |a|^2 over U^T a = 0.
std::vector<double> constrained_rayleigh_maximizer(const SymMatrix& a, const Matrix& u) {
  const std::size_t n = a.dim();
  Matrix proj = Matrix::identity(n) - matmul_nt(u, u);
  const Matrix pap = matmul(proj, matmul(a.mat(), proj));
  const EigDecomp eig = sym_eig(SymMatrix(pap));
  // Eigenvectors spanning range(U) carry eigenvalue 0 in PAP; skip them.
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v = eig.vectors.column(k);
    std::vector<double> pv(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) pv[i] = kernels::dot(proj.row(i), v);
    const double norm = std::sqrt(kernels::dot(pv, pv));
    if (norm > 0.5) {
      for (double& x : pv) x /= norm;
      return pv;
    }
  }
  throw NumericalError("escape_direction: null space of Y^T is empty");
}

double rayleigh(const SymMatrix& a, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * kernels::dot(a.mat().row(i), v);
  return acc;
}

}  // namespace

EscapeReport escape_direction(const Factor& y, const SymMatrix& a, const SpectralTarget& target,
                              const std::optional<RegionParams>& params) {
  if (y.n() != a.dim()) throw InputError("escape_direction: factor and operator disagree");
  if (y.n() != target.factor.n() || y.r() != target.r())
    throw InputError("escape_direction: factor shape differs from the target");
  const std::size_t n = y.n();
  const std::size_t r = y.r();
  if (r >= n) throw InputError("escape_direction: needs r < n");
  const SvdDecomp svd = thin_svd(y.mat());
  if (!(svd.s.back() > 1e-12 * svd.s.front()))
    throw InputError("escape_direction: factor is rank-deficient");

  EscapeReport rep;

  // theta1
  std::size_t tilde = 0;
  for (std::size_t j = 1; j < r; ++j)
    if (svd.s[j] < svd.s[tilde]) tilde = j;
  const std::vector<double> avec = constrained_rayleigh_maximizer(a, svd.u);
  Matrix placed(n, r);
  placed.set_column(tilde, avec);
  Matrix theta1 = matmul(placed, svd.vt);
  rep.hess_theta1 = hess_form(y, a, theta1);

  rep.certificate.a_norm = 1.0;
  rep.certificate.tilde_i = tilde;
  rep.certificate.d_tilde = svd.s[tilde];
  rep.certificate.rayleigh = rayleigh(a, avec);
  const double d2 = svd.s[tilde] * svd.s[tilde];
  const double next = target.sigma_next();
  double e1 = 0.0;
  if (params && next > 0.0) {
    e1 = params->alpha * params->mu * std::pow(target.sigma_r_star(), 3) /
         (2.0 * std::sqrt(2.0) * target.kappa_star * std::sqrt(next));
  }
  if (d2 < next / 2.0) {
    rep.certificate.regime = "case1";
  } else if (d2 <= e1 + next) {
    rep.certificate.regime = "case2.1";
  } else {
    rep.certificate.regime = "case2.2";
  }

  // theta2
  const ProcrustesResult align = procrustes_align(y.mat(), target.factor.mat());
  Matrix theta2 = y.mat() - matmul(target.factor.mat(), align.q);
  const double t2norm = frobenius_norm(theta2);
  if (t2norm > 0.0) {
    theta2 *= 1.0 / t2norm;
    rep.hess_theta2 = hess_form(y, a, theta2);
  } else {
    rep.hess_theta2 = std::numeric_limits<double>::infinity();
  }

  if (rep.hess_theta2 < rep.hess_theta1) {
    rep.which = EscapeBranch::theta2;
    rep.hess_value = rep.hess_theta2;
    rep.direction = {std::move(theta2), true};
  } else {
    rep.which = EscapeBranch::theta1;
    rep.hess_value = rep.hess_theta1;
    rep.direction = {std::move(theta1), true};
  }

  const double fosp_tol = 1e-8 * (1.0 + frobenius_norm(a.mat()));
  const double gnorm = frobenius_norm(riem_grad(y, a).entries);
  const double excess = loss(y, a) - target.residual;
  const double a_sq = frobenius_norm(a.mat()) * frobenius_norm(a.mat());
  if (gnorm <= fosp_tol && std::abs(excess) <= 1e-8 * (1.0 + a_sq)) {
    rep.status = EscapeStatus::near_optimum;
  } else {
    rep.status = rep.hess_value < 0.0 ? EscapeStatus::escape : EscapeStatus::no_escape;
  }
  return rep;
}

R1Bounds r1_bounds(const SpectralTarget& target, double mu) {
  const double kappa = target.kappa_star;
  if (!(mu >= 0.0) || mu > kappa / 3.0)
    throw InputError("r1_bounds: mu must lie in [0, kappa*/3]");
  const double sr_a = target.eigvals.back();
  const double next = target.sigma_next();
  const double s1 = target.norm_star();
  const double sr = target.sigma_r_star();
  R1Bounds b;
  const double shrink = 1.0 - mu / kappa;
  b.lower = (2.0 * shrink * shrink - (14.0 / 3.0) * mu) * sr_a - 2.0 * next;
  const double reach = s1 + mu * sr / kappa;
  b.upper = 4.0 * reach * reach + (14.0 / 3.0) * mu * sr * sr;
  b.convex = b.lower > 0.0;
  return b;
}

double max_convex_mu(const SpectralTarget& target, double tol) {
  double lo = 0.0;
  double hi = target.kappa_star / 3.0;
  if (!r1_bounds(target, lo).convex) return 0.0;
  if (r1_bounds(target, hi).convex) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (r1_bounds(target, mid).convex ? lo : hi) = mid;
  }
  return lo;
}

R3Checks r3_checks(const Factor& y, const SymMatrix& a, const SpectralTarget& target,
                   const RegionParams& p) {
  const Classification c = classify(y, a, target, p);
  R3Checks out;
  out.in_r3a = c.labels.contains(RegionLabel::R3a);
  out.in_r3b = c.labels.contains(RegionLabel::R3b);
  out.in_r3c = c.labels.contains(RegionLabel::R3c);
  const Matrix grad = riem_grad(y, a).entries;

  if (out.in_r3a) out.gradient_large = c.grad_norm > c.grad_threshold;
  if (out.in_r3b) {
    const double ny = c.norm;
    const double ns = target.norm_star();
    const double growth = 2.0 * (ny * ny * ny - ny * ns * ns);
    // The first inequality is tight for rank-one multiples of Y*; allow rounding.
    const double slack = 1e-12 * (1.0 + std::abs(growth));
    out.norm_growth = c.grad_norm >= growth - slack &&
                      growth > 2.0 * (p.beta * p.beta * p.beta - p.beta) * ns * ns * ns;
  }
  if (out.in_r3c) {
    out.inner_product =
        frobenius_dot(grad, y.mat()) > 2.0 * (1.0 - 1.0 / p.gamma) * c.gram_norm * c.gram_norm;
  }
  return out;
}

AssumptionParams assumption_alpha_check(const SpectralTarget& target, double alpha, double mu) {
  if (!(alpha >= 0.0) || !(mu >= 0.0)) throw InputError("assumption check: alpha, mu must be >= 0");
  const double sr_a = target.eigvals.back();  // sigma_r(A) = sigma_r^2(Lambda)
  const double next = target.sigma_next();    // sigma_{r+1}^2(Lambda)
  if (!(sr_a > next)) throw InputError("assumption check: no eigengap sigma_r(A) > sigma_{r+1}(A)");
  if (!(next > 0.0)) throw InputError("assumption check: sigma_{r+1}(A) must be positive");
  const double sr_star = target.sigma_r_star();
  const double kappa = target.kappa_star;
  AssumptionParams out;
  out.e1 = alpha * mu * sr_star * sr_star * sr_star / (2.0 * std::sqrt(2.0) * kappa * std::sqrt(next));
  out.e2 = out.e1 / std::sqrt(2.0);
  out.e3 = out.e2 * std::sqrt(next);

  out.cond1 = sr_a - 2.0 * out.e1 - next > 0.0;
  const double gap1 = std::abs(sr_a - out.e1 - next);
  out.cond2 = sr_a * (1.0 - out.e1 * out.e1 / (gap1 * gap1)) - out.e1 - next > 0.0;
  const double gap2 = std::abs(sr_a - out.e2 - next);
  const double sr4 = sr_a * sr_a;  // sigma_r^4(Y*)
  out.cond3 = (alpha - 2.0 * (std::sqrt(2.0) - 1.0)) * sr_a +
                  6.0 * (alpha * alpha * sr4 * next / 16.0) / (gap2 * gap2) <
              0.0;
  return out;
}

double max_admissible_alpha(const SpectralTarget& target, double mu, double rel_tol) {
  double lo = 0.0;
  if (!assumption_alpha_check(target, lo, mu).all()) return 0.0;
  double hi = 1.0;
  while (assumption_alpha_check(target, hi, mu).all()) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return lo;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (assumption_alpha_check(target, mid, mu).all() ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace snl
