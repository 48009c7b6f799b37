#include "psrl/regretlab/concentration.hpp"

#include <cmath>
#include <stdexcept>

namespace psrl::regretlab {

ConcentrationResult concentration_check(const bayes::GaussianLinearPosterior& posterior,
                                        const Eigen::MatrixXd& query_features, double delta,
                                        long n_trials, std::mt19937_64& rng) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("concentration: delta must be in (0,1)");
  if (query_features.rows() < 1 || query_features.cols() != posterior.feature_dim())
    throw std::invalid_argument("concentration: bad query features");
  if (n_trials < 1) throw std::invalid_argument("concentration: n_trials must be >= 1");

  const int d_s = posterior.output_dim();
  const long n_queries = query_features.rows();
  const double log_term = std::log(2.0 * d_s / delta);

  // Precompute per-query predictive variances and radii.
  Eigen::VectorXd radius(n_queries);
  for (long q = 0; q < n_queries; ++q) {
    const double var = posterior.predictive_variance(query_features.row(q).transpose());
    radius(q) = 2.0 * std::sqrt(2.0 * d_s * var * log_term);
  }

  long hits = 0;
  for (long t = 0; t < n_trials; ++t) {
    const long q = t % n_queries;
    const Eigen::VectorXd phi = query_features.row(q).transpose();
    const Eigen::MatrixXd w1 = posterior.sample(rng).weights;
    const Eigen::MatrixXd w2 = posterior.sample(rng).weights;
    const double dist = ((w1 - w2).transpose() * phi).norm();
    if (dist <= radius(q)) ++hits;
  }

  ConcentrationResult out;
  out.n_trials = n_trials;
  out.delta = delta;
  out.coverage = static_cast<double>(hits) / static_cast<double>(n_trials);
  out.binomial_se =
      std::sqrt(std::max(out.coverage * (1.0 - out.coverage), 1.0 / n_trials) /
                static_cast<double>(n_trials));
  out.threshold = 1.0 - 2.0 * delta - 3.0 * out.binomial_se;
  out.holds = out.coverage >= out.threshold;
  return out;
}

}  // namespace psrl::regretlab
