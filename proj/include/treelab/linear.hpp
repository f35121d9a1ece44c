#pragma once
#include <Eigen/Dense>
#include <cstdint>

namespace treelab::linear {

struct FitResult {
  Eigen::VectorXd w;
  double bias = 0.0;
  bool converged = true;
  int iterations = 0;
  double objective = 0.0;
};

// Ordinary least squares of y on X with an unpenalized intercept,
// solved by rank-revealing QR on the centered system.
FitResult least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Ridge regression: minimize ||y - Xw - b||^2 + lambda * ||w||^2 with the
// intercept left unpenalized. Solved through the normal equations
// (Xc'Xc + lambda I) w = Xc'y on centered data.
FitResult ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                double lambda);

// Elastic-net coordinate descent in the glmnet parametrization:
//   minimize (1/2n)||y - Xw - b||^2
//            + lambda * (eta*||w||_1 + (1-eta)/2*||w||_2^2)
// eta = 1 gives the lasso. Cyclic updates until the largest coordinate
// change in a sweep drops below tol.
FitResult elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda, double eta, double tol, int max_iter);

// Hinge-loss linear SVM trained by stochastic subgradient descent
// (Pegasos steps, unregularized bias). Labels must be -1/+1.
//   minimize (lambda_reg/2)||w||^2 + (1/n) sum_i max(0, 1 - y_i(w.x_i + b))
// with lambda_reg = 1/(cost * n). Returns the best iterate by objective.
FitResult svm_subgradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double cost, double tol, int max_iter,
                          std::uint64_t seed);

// Full-batch gradient descent on the quadratically smoothed hinge
//   l(z) = 0           for z >= 1
//        = (1-z)^2 / 2 for 0 < z < 1
//        = 1/2 - z     for z <= 0
// with the same L2 term as svm_subgradient and Armijo backtracking steps.
FitResult svm_smoothed_gradient(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, double cost,
                                double tol, int max_iter);

}  // namespace treelab::linear
