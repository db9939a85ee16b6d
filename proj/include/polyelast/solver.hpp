// Preconditioned conjugate gradients on the reduced system.
#pragma once

#include "polyelast/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyelast {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

enum class Preconditioner { none, diagonal };

struct SolverConfig {
  double tolerance = 1e-10;
  /// 0 selects max(1000, 20 sqrt(n_free)).
  int max_iterations = 0;
  Preconditioner preconditioner = Preconditioner::diagonal;

  void validate() const {
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("solver tolerance must lie in (0,1)");
    if (max_iterations < 0) throw std::invalid_argument("solver max iterations must be >= 1");
  }
  int iteration_cap(Eigen::Index n_free) const {
    if (max_iterations > 0) return max_iterations;
    return std::max(1000, static_cast<int>(std::ceil(20.0 * std::sqrt(static_cast<double>(n_free)))));
  }
};

struct SolveResult {
  /// Values over all DofMap slots (lifting merged in).
  Eigen::VectorXd values;
  int iterations = 0;
  /// ||b - A x|| / ||b|| of the reduced system (0 when b = 0), evaluated in
  /// extended precision on the extended-precision iterate.
  double residual = 0.0;
  /// Refinement passes (1 when plain PCG already met the tolerance).
  int passes = 0;
  /// Quadratic functional 1/2 x.Ax - b.x after each iteration; non-increasing.
  std::vector<double> energy_history;
};

namespace detail {

using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// b - A x with extended-precision accumulation.
inline VectorXld residual_ld(const SparseMatrix& a, const VectorXld& b, const VectorXld& x) {
  VectorXld r(b.size());
  for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
    long double acc = b(i);
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) acc -= static_cast<long double>(it.value()) * x(it.col());
    r(i) = acc;
  }
  return r;
}

/// One PCG run from x = 0 until ||r|| <= target (recurrence residual).
/// Appends the functional of the combined iterate offset + x to `energy`.
inline Eigen::VectorXd pcg_pass(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& inv_diag,
                                double target, int cap, int& it, double bnorm_total, double energy0,
                                std::vector<double>& energy) {
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(n);
  double rz = r.dot(z);
  double phi = energy0;
  while (r.norm() > target) {
    if (it >= cap) throw SolverError("CG iteration cap reached (" + std::to_string(cap) + ")", it, r.norm() / bnorm_total);
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!std::isfinite(pap) || pap <= 0.0)
      throw SolverError("non-positive curvature in CG: matrix is singular or indefinite", it, r.norm() / bnorm_total);
    const double alpha = rz / pap;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    ++it;
    if (!r.allFinite()) throw SolverError("non-finite residual in CG", it, INFINITY);
    // the functional drops by alpha * rz / 2 per step
    const double drop = 0.5 * alpha * rz;
    if (!(drop >= 0.0)) throw SolverError("CG functional increased: preconditioner or matrix is not SPD", it, r.norm() / bnorm_total);
    phi -= drop;
    energy.push_back(phi);
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return x;
}

}  // namespace detail

/// Solve A x = b with diagonally preconditioned CG. The iterate is kept in
/// extended precision and refined with further PCG passes on the true
/// residual until ||b - A x|| <= tol ||b||; at large lambda the double
/// precision floor eps ||A|| ||x|| otherwise sits above the tolerance.
/// Throws SolverError at the iteration cap, on a non-finite value, or on a
/// non-positive curvature p.Ap.
inline SolveResult pcg(const SparseMatrix& a, const Eigen::VectorXd& b, const SolverConfig& config) {
  config.validate();
  const Eigen::Index n = b.size();
  SolveResult out;
  const double bnorm = b.norm();
  if (n == 0 || bnorm == 0.0) {
    out.values = Eigen::VectorXd::Zero(n);
    return out;
  }
  if (!b.allFinite()) throw SolverError("non-finite right-hand side", 0, INFINITY);

  Eigen::VectorXd inv_diag = Eigen::VectorXd::Ones(n);
  if (config.preconditioner == Preconditioner::diagonal)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = a.coeff(i, i);
      if (!(d > 0.0)) throw SolverError("non-positive diagonal entry: matrix is not SPD", 0, 1.0);
      inv_diag(i) = 1.0 / d;
    }

  const int cap = config.iteration_cap(n);
  const double target = config.tolerance * bnorm;
  const detail::VectorXld b_ld = b.cast<long double>();
  detail::VectorXld x = detail::VectorXld::Zero(n);
  detail::VectorXld r = b_ld;
  double rnorm = bnorm;
  int it = 0;
  constexpr int kMaxPasses = 8;
  for (int pass = 0; pass < kMaxPasses && rnorm > target; ++pass) {
    const Eigen::VectorXd rd = r.cast<double>();
    const double energy0 = out.energy_history.empty() ? 0.0 : out.energy_history.back();
    // a pass only needs to close the remaining gap, not to re-reach tol ||b||
    const double pass_target = std::max(target, 1e-14 * rnorm);
    const Eigen::VectorXd d = detail::pcg_pass(a, rd, inv_diag, pass_target, cap, it, bnorm, energy0, out.energy_history);
    x += d.cast<long double>();
    r = detail::residual_ld(a, b_ld, x);
    const double new_norm = static_cast<double>(r.norm());
    ++out.passes;
    if (!std::isfinite(new_norm)) throw SolverError("non-finite residual in CG", it, INFINITY);
    if (pass > 0 && new_norm >= rnorm) break;  // refinement stagnated
    rnorm = new_norm;
  }
  out.iterations = it;
  out.residual = rnorm / bnorm;
  if (rnorm > target) throw SolverError("CG did not reach the tolerance on the true residual", it, out.residual);
  out.values = x.cast<double>();
  return out;
}

/// Solve the reduced system and merge the result with the lifting.
inline SolveResult solve_spd(const SparseSystem& sys, const SolverConfig& config = {}) {
  SolveResult res = pcg(sys.matrix, sys.rhs, config);
  res.values = sys.expand(res.values);
  return res;
}

}  // namespace polyelast
