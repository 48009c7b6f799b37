#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace psrl::regretlab {

struct VarianceSumResult {
  // sigma'^2_k at the selected (max-variance) point of each episode.
  std::vector<double> variances;
  // Prefix sums in s^2 = sigma_f^{-2} sigma'^2 units, and the matching bound
  // prefix sums C2 * log(1 + s^2_k).
  std::vector<double> sum_curve;
  std::vector<double> bound_curve;
  double C1 = 0.0;  // max eigenvalue of the prior covariance (variance cap)
  double C2 = 0.0;  // S / log(1 + S) with S = sigma_f^{-2} C1
  double sum = 0.0;    // final sum_curve value
  double bound = 0.0;  // final bound_curve value
  bool pointwise_ok = true;  // s^2 <= C2 log(1 + s^2) for every episode
};

// Simulates BLR on the kmax-subsequence: each episode draws its candidate
// rows from `candidates` (m rows per episode), selects the max-predictive-
// variance row under the posterior conditioned on previously selected points
// only, records that variance, then conditions on the selected row.
VarianceSumResult variance_sum_run(const Eigen::MatrixXd& candidates, int per_episode,
                                   const Eigen::MatrixXd& prior_cov, double noise_var);

// Unit-ball candidate stream (10 per episode), identity prior, sigma_f = 1.
VarianceSumResult variance_sum_experiment(int d, int n, std::uint64_t seed);

}  // namespace psrl::regretlab
