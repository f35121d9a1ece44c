#include "treelab/linear.hpp"

#include <cmath>

#include "treelab/error.hpp"
#include "treelab/rng.hpp"

namespace treelab::linear {

namespace {

struct Centered {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::RowVectorXd x_mean;
  double y_mean;
};

Centered center(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Centered c;
  c.x_mean = X.colwise().mean();
  c.y_mean = y.mean();
  c.X = X.rowwise() - c.x_mean;
  c.y = y.array() - c.y_mean;
  return c;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double smoothed_hinge(double z) {
  if (z >= 1.0) return 0.0;
  if (z <= 0.0) return 0.5 - z;
  return 0.5 * (1.0 - z) * (1.0 - z);
}

double smoothed_hinge_deriv(double z) {
  if (z >= 1.0) return 0.0;
  if (z <= 0.0) return -1.0;
  return z - 1.0;
}

double hinge_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, double b, double lambda_reg) {
  const Eigen::VectorXd margins =
      y.array() * ((X * w).array() + b);
  double loss = (1.0 - margins.array()).cwiseMax(0.0).sum() /
                static_cast<double>(X.rows());
  return 0.5 * lambda_reg * w.squaredNorm() + loss;
}

}  // namespace

FitResult least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size() || X.rows() == 0)
    throw MathError("least_squares: shape mismatch or empty input");
  Centered c = center(X, y);
  FitResult r;
  r.w = c.X.colPivHouseholderQr().solve(c.y);
  r.bias = c.y_mean - c.x_mean.dot(r.w);
  r.objective = (c.X * r.w - c.y).squaredNorm();
  r.iterations = 1;
  return r;
}

FitResult ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                double lambda) {
  if (lambda < 0.0) throw ConfigError("ridge: lambda must be >= 0");
  if (lambda == 0.0) return least_squares(X, y);
  Centered c = center(X, y);
  const Eigen::Index m = X.cols();
  Eigen::MatrixXd gram = c.X.transpose() * c.X;
  gram.diagonal().array() += lambda;
  FitResult r;
  r.w = gram.ldlt().solve(c.X.transpose() * c.y);
  r.bias = c.y_mean - c.x_mean.dot(r.w);
  r.objective = (c.X * r.w - c.y).squaredNorm() + lambda * r.w.squaredNorm();
  r.iterations = 1;
  (void)m;
  return r;
}

FitResult elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda, double eta, double tol, int max_iter) {
  if (lambda < 0.0 || eta < 0.0 || eta > 1.0)
    throw ConfigError("elastic_net: need lambda >= 0 and eta in [0, 1]");
  Centered c = center(X, y);
  const auto n = static_cast<double>(X.rows());
  const Eigen::Index m = X.cols();

  Eigen::VectorXd col_sq(m);
  for (Eigen::Index j = 0; j < m; ++j)
    col_sq(j) = c.X.col(j).squaredNorm() / n;

  FitResult r;
  r.w = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd residual = c.y;

  r.converged = false;
  int sweep = 0;
  for (; sweep < max_iter; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double old = r.w(j);
      const double rho = c.X.col(j).dot(residual) / n + col_sq(j) * old;
      const double updated =
          soft_threshold(rho, lambda * eta) / (col_sq(j) + lambda * (1.0 - eta));
      if (updated != old) {
        residual += c.X.col(j) * (old - updated);
        r.w(j) = updated;
        max_delta = std::max(max_delta, std::abs(updated - old));
      }
    }
    if (max_delta < tol) {
      r.converged = true;
      ++sweep;
      break;
    }
  }
  r.iterations = sweep;
  r.bias = c.y_mean - c.x_mean.dot(r.w);
  r.objective = residual.squaredNorm() / (2.0 * n) +
                lambda * (eta * r.w.lpNorm<1>() +
                          0.5 * (1.0 - eta) * r.w.squaredNorm());
  return r;
}

FitResult svm_subgradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double cost, double tol, int max_iter,
                          std::uint64_t seed) {
  if (cost <= 0.0) throw ConfigError("svm_subgradient: cost must be > 0");
  const auto n = static_cast<std::uint64_t>(X.rows());
  const Eigen::Index m = X.cols();
  const double lambda_reg = 1.0 / (cost * static_cast<double>(n));

  Rng rng(seed);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  double b = 0.0;

  FitResult best;
  best.w = w;
  best.bias = b;
  best.objective = hinge_objective(X, y, w, b, lambda_reg);
  best.converged = false;

  const int check_stride = std::max<int>(static_cast<int>(n), 64);
  // The objective at zero is exactly 1, so the optimum lies inside the
  // radius sqrt(2/lambda) ball; projecting onto it and starting the step
  // schedule at 1/lambda keeps early iterates from exploding when the
  // regularization is weak.
  const double radius = std::sqrt(2.0 / lambda_reg);
  const double t_shift = 1.0 / lambda_reg;
  double prev_checked = best.objective;
  int t = 0;
  while (t < max_iter) {
    ++t;
    const auto i = static_cast<Eigen::Index>(rng.below(n));
    const double step =
        1.0 / (lambda_reg * (static_cast<double>(t) + t_shift));
    const double margin = y(i) * (w.dot(X.row(i)) + b);
    w *= 1.0 - step * lambda_reg;
    if (margin < 1.0) {
      w += (step * y(i)) * X.row(i).transpose();
      b += step * y(i);
    }
    const double norm = w.norm();
    if (norm > radius) w *= radius / norm;
    if (t % check_stride == 0 || t == max_iter) {
      const double obj = hinge_objective(X, y, w, b, lambda_reg);
      if (obj < best.objective) {
        best.objective = obj;
        best.w = w;
        best.bias = b;
      }
      if (std::abs(prev_checked - obj) <= tol * std::max(1.0, std::abs(obj))) {
        best.converged = true;
        break;
      }
      prev_checked = obj;
    }
  }
  best.iterations = t;
  return best;
}

FitResult svm_smoothed_gradient(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, double cost,
                                double tol, int max_iter) {
  if (cost <= 0.0) throw ConfigError("svm_smoothed_gradient: cost must be > 0");
  const auto n = static_cast<double>(X.rows());
  const Eigen::Index m = X.cols();
  const double lambda_reg = 1.0 / (cost * n);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  double b = 0.0;

  auto objective = [&](const Eigen::VectorXd& wv, double bv) {
    double loss = 0.0;
    const Eigen::VectorXd z = y.array() * ((X * wv).array() + bv);
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += smoothed_hinge(z(i));
    return 0.5 * lambda_reg * wv.squaredNorm() + loss / n;
  };

  FitResult r;
  r.converged = false;
  double obj = objective(w, b);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Eigen::VectorXd z = y.array() * ((X * w).array() + b);
    Eigen::VectorXd coeff(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      coeff(i) = smoothed_hinge_deriv(z(i)) * y(i);
    Eigen::VectorXd grad_w = lambda_reg * w + (X.transpose() * coeff) / n;
    const double grad_b = coeff.sum() / n;

    const double grad_norm =
        std::max(grad_w.lpNorm<Eigen::Infinity>(), std::abs(grad_b));
    if (grad_norm <= tol) {
      r.converged = true;
      break;
    }

    // Armijo backtracking on the full gradient step.
    const double g_sq = grad_w.squaredNorm() + grad_b * grad_b;
    double step = 1.0;
    double next_obj = obj;
    Eigen::VectorXd next_w;
    double next_b = 0.0;
    for (int halvings = 0; halvings < 50; ++halvings) {
      next_w = w - step * grad_w;
      next_b = b - step * grad_b;
      next_obj = objective(next_w, next_b);
      if (next_obj <= obj - 0.5 * step * g_sq) break;
      step *= 0.5;
    }
    if (next_obj >= obj) {
      r.converged = true;  // no descent direction left at double precision
      break;
    }
    w = next_w;
    b = next_b;
    obj = next_obj;
  }
  r.w = w;
  r.bias = b;
  r.objective = obj;
  r.iterations = iter;
  return r;
}

}  // namespace treelab::linear
