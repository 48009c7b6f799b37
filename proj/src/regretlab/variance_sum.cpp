#include "psrl/regretlab/variance_sum.hpp"

#include <cmath>
#include <stdexcept>

#include "psrl/common/rng.hpp"

namespace psrl::regretlab {

VarianceSumResult variance_sum_run(const Eigen::MatrixXd& candidates, int per_episode,
                                   const Eigen::MatrixXd& prior_cov, double noise_var) {
  const int d = static_cast<int>(prior_cov.rows());
  if (per_episode < 1) throw std::invalid_argument("variance_sum: per_episode must be >= 1");
  if (candidates.cols() != d) throw std::invalid_argument("variance_sum: feature dim mismatch");
  if (candidates.rows() % per_episode != 0)
    throw std::invalid_argument("variance_sum: candidate rows not a multiple of per_episode");
  if (!(noise_var > 0.0)) throw std::invalid_argument("variance_sum: noise_var must be > 0");

  const long n = candidates.rows() / per_episode;
  VarianceSumResult out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prior_cov);
  out.C1 = es.eigenvalues().maxCoeff();
  const double S = out.C1 / noise_var;
  out.C2 = S / std::log1p(S);

  Eigen::MatrixXd precision = prior_cov.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
  precision = 0.5 * (precision + precision.transpose());

  out.variances.reserve(static_cast<std::size_t>(n));
  out.sum_curve.reserve(static_cast<std::size_t>(n));
  out.bound_curve.reserve(static_cast<std::size_t>(n));
  double sum = 0.0, bound = 0.0;
  for (long k = 0; k < n; ++k) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
    double best_var = -1.0;
    long best_row = -1;
    for (int j = 0; j < per_episode; ++j) {
      const long row = k * per_episode + j;
      const Eigen::VectorXd phi = candidates.row(row).transpose();
      const double var = std::max(0.0, phi.dot(ldlt.solve(phi)));
      if (var > best_var) {
        best_var = var;
        best_row = row;
      }
    }
    const Eigen::VectorXd phi = candidates.row(best_row).transpose();
    precision += phi * phi.transpose() / noise_var;

    const double s2 = best_var / noise_var;
    if (s2 > out.C2 * std::log1p(s2) + 1e-12) out.pointwise_ok = false;
    out.variances.push_back(best_var);
    sum += s2;
    bound += out.C2 * std::log1p(s2);
    out.sum_curve.push_back(sum);
    out.bound_curve.push_back(bound);
  }
  out.sum = sum;
  out.bound = bound;
  return out;
}

VarianceSumResult variance_sum_experiment(int d, int n, std::uint64_t seed) {
  if (d < 1 || n < 1) throw std::invalid_argument("variance_sum: d, n must be >= 1");
  const int m = 10;
  auto eng = rng::engine(rng::derive(seed, 0x5a));
  Eigen::MatrixXd cand(static_cast<long>(n) * m, d);
  for (long i = 0; i < cand.rows(); ++i) {
    Eigen::VectorXd g(d);
    for (int j = 0; j < d; ++j) g(j) = rng::normal(eng);
    const double norm = g.norm();
    // Uniform in the unit ball: direction times U^(1/d).
    const double r = std::pow(rng::uniform(eng, 0.0, 1.0), 1.0 / d);
    cand.row(i) = (norm > 0 ? (r / norm) * g : g).transpose();
  }
  return variance_sum_run(cand, m, Eigen::MatrixXd::Identity(d, d), 1.0);
}

}  // namespace psrl::regretlab
