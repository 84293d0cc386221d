#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace forge {

/// Deterministic Nelder-Mead configuration. The initial simplex is x0 plus one
/// per-coordinate step; there is no randomness anywhere.
struct SimplexConfig {
  std::vector<double> initial_step;  // per-parameter; broadcasts if it has one entry
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double f_tol = 1e-10;  // absolute spread of simplex values
  double x_tol = 1e-9;   // absolute simplex diameter
  int max_evals = 10000;

  void validate(int dim) const;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;  // false means the eval budget ran out (best-so-far returned)
};

/// Minimizes f over R^k. The objective may return +infinity as a constraint
/// barrier anywhere except the initial simplex vertices. Best-so-far value is
/// non-increasing; identical inputs give bit-identical iterates.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0, const SimplexConfig& cfg);

/// Orthonormal basis of {v : Av = 0} from the SVD, with per-vector residuals.
struct NullSpaceBasis {
  Eigen::MatrixXd vectors;    // n x k, orthonormal columns
  Eigen::VectorXd residuals;  // ||A v_i||
};

/// Throws EmptyNullSpace when rank(A) == cols(A).
NullSpaceBasis null_space(const Eigen::MatrixXd& A, double rank_tol = 1e-10);

}  // namespace forge
