#pragma once

#include <Eigen/Dense>
#include <random>

namespace psrl::ser {
class Writer;
class Reader;
}  // namespace psrl::ser

namespace psrl::bayes {

/** Zero-mean Gaussian prior over regression weights plus the observation
 *  noise variance of the head it belongs to (sigma_r^2 or sigma_f^2). */
struct GaussianLinearPrior {
  Eigen::MatrixXd covariance;  // Sigma_p, d_phi x d_phi
  double noise_variance = 1.0;

  static GaussianLinearPrior isotropic(int d_phi, double scale = 1.0, double noise_var = 1.0);
  /// Throws std::invalid_argument unless covariance is symmetric PD and noise_variance > 0.
  void validate() const;
};

struct WeightSample {
  Eigen::MatrixXd weights;  // d_phi x d_out
};

/** Posterior over weight columns, N(mean column j, A^{-1}) with the precision
 *  A = sigma^{-2} Phi^T Phi + Sigma_p^{-1} shared across output dimensions.
 *  Immutable after construction: updates return new values, reads are
 *  concurrency safe. All solves go through a cached LDLT of A, never an
 *  explicit inverse. */
class GaussianLinearPosterior {
 public:
  // features: N x d_phi (rows are phi^T), targets: N x d_out. N = 0 returns
  // the prior as a posterior.
  static GaussianLinearPosterior from_data(const GaussianLinearPrior& prior,
                                           const Eigen::MatrixXd& features,
                                           const Eigen::MatrixXd& targets);

  /// Absorbs M more rows; equals from_data on the concatenated data.
  GaussianLinearPosterior updated(const Eigen::MatrixXd& features,
                                  const Eigen::MatrixXd& targets) const;

  /// One draw of the full weight matrix; deterministic given the engine state.
  WeightSample sample(std::mt19937_64& rng) const;

  /// Epistemic predictive variance phi^T A^{-1} phi, clamped at 0.
  double predictive_variance(const Eigen::VectorXd& feature) const;

  const Eigen::MatrixXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::MatrixXd& prior_precision() const { return prior_precision_; }
  long n_points() const { return n_points_; }
  double noise_variance() const { return noise_variance_; }
  int feature_dim() const { return static_cast<int>(precision_.rows()); }
  int output_dim() const { return static_cast<int>(mean_.cols()); }
  /// Set when cond(A) exceeded 1e12 at construction; solves still go through LDLT.
  bool ill_conditioned() const { return ill_conditioned_; }

  void save(ser::Writer& w) const;
  static GaussianLinearPosterior load(ser::Reader& r);

 private:
  GaussianLinearPosterior() = default;
  void finalize();  // factorizations + conditioning flag

  Eigen::MatrixXd mean_;             // d_phi x d_out
  Eigen::MatrixXd precision_;        // A
  Eigen::MatrixXd prior_precision_;  // Sigma_p^{-1}
  double noise_variance_ = 1.0;
  long n_points_ = 0;
  bool ill_conditioned_ = false;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace psrl::bayes
