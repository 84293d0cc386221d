#include "forge/optim.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace forge {

void SimplexConfig::validate(int dim) const {
  if (reflection <= 0 || expansion <= 1 || contraction <= 0 || contraction >= 1 || shrink <= 0 ||
      shrink >= 1)
    throw Error("SimplexConfig: coefficients outside admissible ranges");
  if (f_tol <= 0 || x_tol <= 0) throw Error("SimplexConfig: tolerances must be > 0");
  if (!initial_step.empty() && initial_step.size() != 1 &&
      static_cast<int>(initial_step.size()) != dim)
    throw Error("SimplexConfig: initial_step size mismatch");
}

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0, const SimplexConfig& cfg) {
  const int n = static_cast<int>(x0.size());
  cfg.validate(n);

  auto step_of = [&](int i) {
    if (cfg.initial_step.empty()) return 1.0;
    if (cfg.initial_step.size() == 1) return cfg.initial_step[0];
    return cfg.initial_step[i];
  };

  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  fs[0] = eval(xs[0]);
  for (int i = 0; i < n; ++i) {
    xs[i + 1](i) += step_of(i);
    fs[i + 1] = eval(xs[i + 1]);
  }
  for (int i = 0; i <= n; ++i)
    if (std::isinf(fs[i])) throw Error("nelder_mead: objective infinite at initial simplex");

  std::vector<int> order(n + 1);
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  };

  SimplexResult best;
  auto finish = [&](bool converged) {
    sort_order();
    best.x = xs[order[0]];
    best.f = fs[order[0]];
    best.evals = evals;
    best.converged = converged;
    return best;
  };

  while (true) {
    sort_order();
    const int lo = order[0], hi = order[n], second_hi = order[n - 1];

    // Termination: value spread, simplex diameter, or budget.
    const double spread = fs[hi] - fs[lo];
    double diameter = 0;
    for (int i = 1; i <= n; ++i) diameter = std::max(diameter, (xs[order[i]] - xs[lo]).norm());
    if (spread < cfg.f_tol || diameter < cfg.x_tol) return finish(true);
    if (evals >= cfg.max_evals) return finish(false);

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != hi) centroid += xs[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + cfg.reflection * (centroid - xs[hi]);
    const double f_ref = eval(reflected);

    if (f_ref < fs[lo]) {
      const Eigen::VectorXd expanded = centroid + cfg.expansion * (reflected - centroid);
      const double f_exp = eval(expanded);
      if (f_exp < f_ref) {
        xs[hi] = expanded;
        fs[hi] = f_exp;
      } else {
        xs[hi] = reflected;
        fs[hi] = f_ref;
      }
      continue;
    }
    if (f_ref < fs[second_hi]) {
      xs[hi] = reflected;
      fs[hi] = f_ref;
      continue;
    }

    // Contraction: outside if the reflection helped at all, inside otherwise.
    if (f_ref < fs[hi]) {
      const Eigen::VectorXd c = centroid + cfg.contraction * (reflected - centroid);
      const double fc = eval(c);
      if (fc <= f_ref) {
        xs[hi] = c;
        fs[hi] = fc;
        continue;
      }
    } else {
      const Eigen::VectorXd c = centroid - cfg.contraction * (centroid - xs[hi]);
      const double fc = eval(c);
      if (fc < fs[hi]) {
        xs[hi] = c;
        fs[hi] = fc;
        continue;
      }
    }

    // Shrink toward the best vertex.
    for (int i = 0; i <= n; ++i) {
      if (i == lo) continue;
      xs[i] = xs[lo] + cfg.shrink * (xs[i] - xs[lo]);
      fs[i] = eval(xs[i]);
    }
  }
}

NullSpaceBasis null_space(const Eigen::MatrixXd& A, double rank_tol) {
  const Eigen::Index n = A.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = rank_tol * (sv.size() > 0 ? sv(0) : 0.0);

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;

  const Eigen::Index k = n - rank;
  if (k <= 0) throw EmptyNullSpace("null_space: matrix has full column rank");

  NullSpaceBasis basis;
  basis.vectors = svd.matrixV().rightCols(k);
  basis.residuals.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) basis.residuals(i) = (A * basis.vectors.col(i)).norm();
  return basis;
}

}  // namespace forge
