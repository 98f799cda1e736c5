#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "snl/ambient.hpp"

namespace snl {

// Thresholds that carve the factor space into regions (see classify).
struct RegionParams {
  double mu = 0.05;
  double alpha = 1e-3;
  double beta = 1.2;
  double gamma = 1.2;

  void validate() const;
};

enum class RegionLabel { R1, R2, R3a, R3b, R3c };

inline constexpr std::array<RegionLabel, 5> kAllRegions{RegionLabel::R1, RegionLabel::R2,
                                                       RegionLabel::R3a, RegionLabel::R3b,
                                                       RegionLabel::R3c};

std::string to_string(RegionLabel label);

// Regions may overlap, so classification yields a set.
class RegionSet {
 public:
  void insert(RegionLabel l) { flags_[static_cast<std::size_t>(l)] = true; }
  bool contains(RegionLabel l) const { return flags_[static_cast<std::size_t>(l)]; }
  bool empty() const;
  std::vector<std::string> names() const;
  // Semicolon-joined names, e.g. "R1;R3a".
  std::string joined() const;

 private:
  std::array<bool, 5> flags_{};
};

struct Classification {
  RegionSet labels;
  double distance = 0.0;      // d([Y], [Y*])
  double grad_norm = 0.0;     // ||grad H||_F
  double norm = 0.0;          // ||Y|| (spectral)
  double gram_norm = 0.0;     // ||Y Y^T||_F
  double dist_threshold = 0.0;  // mu sigma_r(Y*) / kappa*
  double grad_threshold = 0.0;  // alpha mu sigma_r(Y*)^3 / (4 kappa*)
};

// Evaluates every region predicate:
//   R1   d <= mu sigma_r(Y*)/kappa*
//   R2   d > mu sigma_r(Y*)/kappa*, ||grad|| <= alpha mu sigma_r(Y*)^3/(4 kappa*),
//        ||Y|| <= beta ||Y*||, ||YY^T||_F <= gamma ||Y*Y*^T||_F
//   R3a  ||grad|| > alpha mu sigma_r(Y*)^3/(4 kappa*), ||Y|| <= beta ||Y*||,
//        ||YY^T||_F <= gamma ||Y*Y*^T||_F
//   R3b  ||Y|| > beta ||Y*||, ||YY^T||_F <= gamma ||Y*Y*^T||_F
//   R3c  ||YY^T||_F > gamma ||Y*Y*^T||_F
Classification classify(const Factor& y, const SymMatrix& a, const SpectralTarget& target,
                        const RegionParams& p);

// All r-subsets of {0, ..., n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t r);

// First-order stationary point built from the eigenpairs in `subset`
// (0-based): columns sqrt(sigma_i) u_i in subset order, right factor = I.
Factor enumerate_fosp(const EigDecomp& eig, const std::vector<std::size_t>& subset, std::size_t r);
Factor enumerate_fosp(const Operator& a, const std::vector<std::size_t>& subset, std::size_t r);

// ||grad||_F <= 1e-8 (1 + ||A||_F)
bool is_fosp(const Factor& y, const SymMatrix& a);

enum class EscapeBranch { theta1, theta2 };
enum class EscapeStatus { escape, no_escape, near_optimum };

std::string to_string(EscapeBranch b);
std::string to_string(EscapeStatus s);

struct EscapeCertificate {
  double a_norm = 0.0;           // ||a|| before normalization to the unit direction
  std::size_t tilde_i = 0;       // 0-based argmin_j D_jj
  double d_tilde = 0.0;          // D_{~i ~i}
  double rayleigh = 0.0;         // a^T A a for the unit a
  std::string regime;            // "case1", "case2.1" or "case2.2"
};

struct EscapeReport {
  TangentDirection direction;  // unit Frobenius norm
  double hess_value = 0.0;
  EscapeBranch which = EscapeBranch::theta1;
  double hess_theta1 = 0.0;
  double hess_theta2 = 0.0;
  EscapeStatus status = EscapeStatus::no_escape;
  EscapeCertificate certificate;
};

// Builds both candidate directions and returns the one with the smaller
// Hessian form:
//   theta1 = [0 .. a .. 0] V^T with a the top eigenvector of A restricted to
//            null(Y^T), placed in column argmin_j D_jj of Y = U D V^T;
//   theta2 = Y - Y* Q with Q the Procrustes alignment of Y* onto Y.
// Both are normalized to unit Frobenius norm. `params` only feeds the regime
// label of the certificate (e1 is taken as 0 without it).
EscapeReport escape_direction(const Factor& y, const SymMatrix& a, const SpectralTarget& target,
                              const std::optional<RegionParams>& params = std::nullopt);

struct R1Bounds {
  double lower = 0.0;
  double upper = 0.0;
  bool convex = false;
};

// Curvature bounds of the Hessian over R1 for 0 <= mu <= kappa*/3:
//   lower = (2 (1 - mu/kappa*)^2 - 14 mu / 3) sigma_r(A) - 2 sigma_{r+1}(A)
//   upper = 4 (sigma_1(Y*) + mu sigma_r(Y*)/kappa*)^2 + 14 mu sigma_r(Y*)^2 / 3
R1Bounds r1_bounds(const SpectralTarget& target, double mu);

// Largest mu in [0, kappa*/3] with a positive lower bound, by bisection.
double max_convex_mu(const SpectralTarget& target, double tol = 1e-10);

struct R3Checks {
  bool in_r3a = false, in_r3b = false, in_r3c = false;
  // Each check is vacuously true when y is outside the matching region.
  bool gradient_large = true;   // R3a: ||grad|| > alpha mu sigma_r(Y*)^3 / (4 kappa*)
  bool norm_growth = true;      // R3b: ||grad|| >= 2(||Y||^3 - ||Y|| ||Y*||^2) > 2(beta^3 - beta)||Y*||^3
  bool inner_product = true;    // R3c: <grad, Y> > 2 (1 - 1/gamma) ||YY^T||_F^2

  bool all_hold() const { return gradient_large && norm_growth && inner_product; }
};

R3Checks r3_checks(const Factor& y, const SymMatrix& a, const SpectralTarget& target,
                   const RegionParams& p);

struct AssumptionParams {
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  bool cond1 = false, cond2 = false, cond3 = false;
  bool all() const { return cond1 && cond2 && cond3; }
};

// Error terms and the three smallness conditions on alpha (at fixed mu) under
// which the escape directions are guaranteed. Requires an eigengap and
// sigma_{r+1}(A) > 0.
AssumptionParams assumption_alpha_check(const SpectralTarget& target, double alpha, double mu);

// Largest alpha for which all three conditions hold, to relative tolerance.
double max_admissible_alpha(const SpectralTarget& target, double mu, double rel_tol = 1e-6);

}  // namespace snl
