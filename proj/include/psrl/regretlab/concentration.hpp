#pragma once

#include <Eigen/Dense>
#include <random>

#include "psrl/bayes/blr.hpp"

namespace psrl::regretlab {

struct ConcentrationResult {
  double coverage = 0.0;   // fraction of trials satisfying the bound
  long n_trials = 0;
  double delta = 0.0;
  double binomial_se = 0.0;
  double threshold = 0.0;  // 1 - 2 delta - 3 SE
  bool holds = false;      // coverage >= threshold
};

// Empirical check of the concentration event: draw independent posterior
// samples f^k, f~ (standing in for f*), and test
//   ||f^k(h) - f~(h)||_2 <= 2 sqrt(2 d_s sigma_k^2(h) log(2 d_s / delta))
// for query rows h cycled per trial.
ConcentrationResult concentration_check(const bayes::GaussianLinearPosterior& posterior,
                                        const Eigen::MatrixXd& query_features, double delta,
                                        long n_trials, std::mt19937_64& rng);

}  // namespace psrl::regretlab
