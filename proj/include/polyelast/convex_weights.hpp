// Nonnegative barycentric weights expressing a centroid as a convex
// combination of polygon/polyhedron vertices.
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace polyelast {

/// Weights w >= 0 with sum(w) = 1 and sum(w_s p_s) = target, closest (in the
/// Euclidean sense) to the uniform weights. Points are the columns of
/// `points`; the coordinate dimension is arbitrary but the affine hull of the
/// points must have full dimension. Negative weights are repaired by an
/// active-set loop that pins them to zero and re-solves on the rest.
/// Returns nullopt when no nonnegative solution is found.
inline std::optional<std::vector<double>> convex_weights(const Eigen::MatrixXd& points,
                                                         const Eigen::VectorXd& target,
                                                         double tol = 1e-13) {
  const Eigen::Index dim = points.rows();
  const Eigen::Index m = points.cols();
  if (m == 0 || target.size() != dim) return std::nullopt;

  Eigen::VectorXd rhs(dim + 1);
  rhs(0) = 1.0;
  rhs.tail(dim) = target;

  std::vector<bool> active(static_cast<std::size_t>(m), true);
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(m);
  const double uniform = 1.0 / static_cast<double>(m);

  for (Eigen::Index pass = 0; pass <= m; ++pass) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < m; ++j)
      if (active[j]) idx.push_back(j);
    const auto nf = static_cast<Eigen::Index>(idx.size());
    if (nf == 0) return std::nullopt;

    Eigen::MatrixXd constraints(dim + 1, nf);
    Eigen::VectorXd start(nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
      constraints(0, j) = 1.0;
      constraints.col(j).tail(dim) = points.col(idx[j]);
      start(j) = uniform;
    }
    const Eigen::MatrixXd gram = constraints * constraints.transpose();
    const Eigen::VectorXd y = gram.completeOrthogonalDecomposition().solve(rhs - constraints * start);
    const Eigen::VectorXd w = start + constraints.transpose() * y;

    if ((constraints * w - rhs).norm() > 1e3 * tol * (1.0 + rhs.norm())) return std::nullopt;

    weights.setZero();
    bool clamped = false;
    for (Eigen::Index j = 0; j < nf; ++j) {
      if (w(j) < -tol) {
        active[idx[j]] = false;
        clamped = true;
      }
      weights(idx[j]) = w(j);
    }
    if (!clamped) {
      std::vector<double> out(static_cast<std::size_t>(m));
      for (Eigen::Index j = 0; j < m; ++j) out[j] = weights(j) < 0.0 ? 0.0 : weights(j);
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace polyelast
