#pragma once

#include <Eigen/Dense>
#include <string>

namespace psrl::regretlab {

enum class NoiseFamily { gaussian, laplace, uniform };

NoiseFamily family_from_name(const std::string& name);
std::string family_name(NoiseFamily f);

// Per-dimension i.i.d. symmetric noise; scale is the per-dimension std.
struct SymmetricNoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  double scale = 1.0;
  int dim = 1;
  void validate() const;
};

// Exact total-variation distance (half the L1 density distance) between
// N(mu1, sigma^2 I) and N(mu2, sigma^2 I): erf(||mu1-mu2|| / (2 sqrt(2) sigma)).
// Depends on the means only through ||mu1 - mu2||_2.
double tv_gaussian_shared_cov(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                              double sigma);

// Density mode height p_max of the centered 1-D density with std `scale`.
double density_mode_height(NoiseFamily family, double scale);

// Closed-form L1 distance between the 1-D density and its shift by delta >= 0:
// 2 (F(delta/2) - F(-delta/2)) for symmetric unimodal families.
double exact_l1_shifted(NoiseFamily family, double scale, double delta);

// L1 distance by numerical integration (trapezoid, step 1e-4, kink-aware
// segments; the uniform family integrates its piecewise-constant difference
// exactly). error_estimate is a Richardson estimate of the quadrature error.
double numeric_l1_shifted(NoiseFamily family, double scale, double delta,
                          double* error_estimate = nullptr);

struct Lemma1Result {
  double numeric_tv = 0.0;      // half-L1 (standard TV)
  double numeric_l1 = 0.0;      // the L1 norm convention used by the bound
  double bound = 0.0;           // C * ||mu1 - mu2||_2 with C = 2 p_max
  bool holds = false;           // numeric_l1 <= bound + 1e-9
  double quadrature_error = 0.0;
  bool quadrature_flagged = false;  // error estimate > 1e-7
};

// Multivariate TV reduced to the 1-D marginal along the mean-difference axis,
// against the linear bound C ||mu1 - mu2||_2.
Lemma1Result lemma1_bound_check(const SymmetricNoiseSpec& spec, const Eigen::VectorXd& mu1,
                                const Eigen::VectorXd& mu2);

}  // namespace psrl::regretlab
