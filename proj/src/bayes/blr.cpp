#include "psrl/bayes/blr.hpp"

#include <stdexcept>

#include "psrl/common/rng.hpp"
#include "psrl/common/serialize.hpp"

namespace psrl::bayes {

using Eigen::MatrixXd;
using Eigen::VectorXd;

GaussianLinearPrior GaussianLinearPrior::isotropic(int d_phi, double scale, double noise_var) {
  GaussianLinearPrior p;
  p.covariance = scale * MatrixXd::Identity(d_phi, d_phi);
  p.noise_variance = noise_var;
  return p;
}

void GaussianLinearPrior::validate() const {
  if (covariance.rows() != covariance.cols() || covariance.rows() < 1)
    throw std::invalid_argument("prior: covariance must be square and nonempty");
  if (!covariance.allFinite()) throw std::invalid_argument("prior: non-finite covariance");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("prior: covariance not symmetric within 1e-10");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(covariance, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("prior: covariance not positive-definite");
  if (!(noise_variance > 0.0)) throw std::invalid_argument("prior: noise_variance must be > 0");
}

namespace {

void check_data(const MatrixXd& features, const MatrixXd& targets, int d_phi) {
  if (features.rows() != targets.rows())
    throw std::invalid_argument("blr: feature/target row counts differ");
  if (features.rows() > 0 && features.cols() != d_phi)
    throw std::invalid_argument("blr: feature dimension mismatch");
  if (!features.allFinite() || !targets.allFinite())
    throw std::invalid_argument("blr: non-finite data rejected");
}

}  // namespace

void GaussianLinearPosterior::finalize() {
  precision_ = 0.5 * (precision_ + precision_.transpose());  // keep exact symmetry
  ldlt_.compute(precision_);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("blr: LDLT factorization of precision failed");
  llt_.compute(precision_);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("blr: precision not positive-definite (invalid posterior)");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(precision_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  ill_conditioned_ = !(lo > 0.0) || hi / lo > 1e12;
}

GaussianLinearPosterior GaussianLinearPosterior::from_data(const GaussianLinearPrior& prior,
                                                           const MatrixXd& features,
                                                           const MatrixXd& targets) {
  prior.validate();
  check_data(features, targets, static_cast<int>(prior.covariance.rows()));

  GaussianLinearPosterior post;
  post.noise_variance_ = prior.noise_variance;
  post.prior_precision_ =
      prior.covariance.ldlt().solve(MatrixXd::Identity(prior.covariance.rows(), prior.covariance.cols()));
  post.prior_precision_ = 0.5 * (post.prior_precision_ + post.prior_precision_.transpose());
  const double inv_noise = 1.0 / prior.noise_variance;
  post.precision_ = post.prior_precision_ + inv_noise * features.transpose() * features;
  post.n_points_ = features.rows();
  post.finalize();
  // mean = A^{-1} (sigma^{-2} Phi^T Y); prior mean is zero.
  MatrixXd b = inv_noise * features.transpose() * targets;
  post.mean_ = post.ldlt_.solve(b);
  if (!post.mean_.allFinite()) throw std::runtime_error("blr: non-finite posterior mean");
  return post;
}

GaussianLinearPosterior GaussianLinearPosterior::updated(const MatrixXd& features,
                                                         const MatrixXd& targets) const {
  check_data(features, targets, feature_dim());
  if (features.rows() > 0 && targets.cols() != mean_.cols())
    throw std::invalid_argument("blr: target dimension mismatch");
  if (features.rows() == 0) return *this;

  GaussianLinearPosterior post;
  post.noise_variance_ = noise_variance_;
  post.prior_precision_ = prior_precision_;
  const double inv_noise = 1.0 / noise_variance_;
  post.precision_ = precision_ + inv_noise * features.transpose() * features;
  post.n_points_ = n_points_ + features.rows();
  post.finalize();
  // A_old * mean_old recovers sigma^{-2} Phi_old^T Y_old without storing it.
  MatrixXd b = precision_ * mean_ + inv_noise * features.transpose() * targets;
  post.mean_ = post.ldlt_.solve(b);
  if (!post.mean_.allFinite()) throw std::runtime_error("blr: non-finite posterior mean");
  return post;
}

WeightSample GaussianLinearPosterior::sample(std::mt19937_64& rng_eng) const {
  // A = L L^T, so L^{-T} z has covariance A^{-1}.
  MatrixXd z(mean_.rows(), mean_.cols());
  for (long j = 0; j < z.cols(); ++j)
    for (long i = 0; i < z.rows(); ++i) z(i, j) = rng::normal(rng_eng);
  WeightSample s;
  s.weights = mean_ + llt_.matrixU().solve(z);
  if (!s.weights.allFinite()) throw std::runtime_error("blr: non-finite weight sample");
  return s;
}

double GaussianLinearPosterior::predictive_variance(const VectorXd& feature) const {
  if (feature.size() != precision_.rows())
    throw std::invalid_argument("blr: predictive_variance dimension mismatch");
  const double v = feature.dot(ldlt_.solve(feature));
  return v > 0.0 ? v : 0.0;
}

void GaussianLinearPosterior::save(ser::Writer& w) const {
  w.mat(mean_);
  w.mat(precision_);
  w.mat(prior_precision_);
  w.f64(noise_variance_);
  w.i64(n_points_);
}

GaussianLinearPosterior GaussianLinearPosterior::load(ser::Reader& r) {
  GaussianLinearPosterior p;
  p.mean_ = r.mat();
  p.precision_ = r.mat();
  p.prior_precision_ = r.mat();
  p.noise_variance_ = r.f64();
  p.n_points_ = r.i64();
  p.finalize();
  return p;
}

}  // namespace psrl::bayes
