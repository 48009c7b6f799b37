#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "psrl/common/rng.hpp"

namespace psrl::planner {

struct CemConfig {
  int popsize = 500;
  int n_elites = 50;
  int horizon = 30;    // planning horizon tau
  int max_iter = 5;
  int n_particles = 20;
  double init_std = 1.0;  // fraction of the half box width
  double alpha = 0.1;     // smoothing weight kept on the previous distribution

  void validate() const {
    if (n_elites < 1 || n_elites > popsize)
      throw std::invalid_argument("cem: need 1 <= n_elites <= popsize");
    if (horizon < 1 || max_iter < 1 || n_particles < 1)
      throw std::invalid_argument("cem: horizon, max_iter, n_particles must be >= 1");
    if (!(init_std > 0.0) || alpha < 0.0 || alpha > 1.0)
      throw std::invalid_argument("cem: init_std must be > 0 and alpha in [0,1]");
  }
};

struct PlanResult {
  Eigen::VectorXd action;
  double elite_mean_return = 0.0;
  std::vector<double> best_return_trace;  // running max of observed candidate scores
  bool all_nonfinite = false;
  std::int64_t nonfinite_particles = 0;
};

// Anything the rollout loop needs from a model. SampledModel satisfies this;
// tests can plug in deterministic stubs.
template <class M>
concept PlannerModel = requires(const M& m, const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) {
  { m.state_dim() } -> std::convertible_to<int>;
  { m.action_dim() } -> std::convertible_to<int>;
  { m.transition_noise_std() } -> std::convertible_to<double>;
  { m.reward_bound() } -> std::convertible_to<double>;
  { m.predict_mean_batch(s, a) } -> std::convertible_to<Eigen::MatrixXd>;
  { m.reward_batch(s, a) } -> std::convertible_to<Eigen::VectorXd>;
};

namespace detail {

// Scores `cands` (popsize x horizon*d_a, already inside the box). Particle
// noise is drawn from counter streams keyed by (key, iteration, row), so the
// result is independent of evaluation order. A particle whose state or reward
// goes non-finite is frozen and scored -horizon * reward_bound.
template <PlannerModel M>
Eigen::VectorXd score_candidates(const M& model, const Eigen::VectorXd& state,
                                 const Eigen::MatrixXd& cands, int horizon, int n_particles,
                                 std::uint64_t key, std::uint64_t iteration,
                                 std::int64_t* flagged, std::vector<char>* all_dead = nullptr) {
  const int pop = static_cast<int>(cands.rows());
  const int d_s = model.state_dim();
  const int d_a = model.action_dim();
  const long n = static_cast<long>(pop) * n_particles;
  const double sigma = model.transition_noise_std();
  const double fail_return = -static_cast<double>(horizon) * model.reward_bound();

  Eigen::MatrixXd S(n, d_s);
  for (long r = 0; r < n; ++r) S.row(r) = state.transpose();
  Eigen::MatrixXd A(n, d_a);
  Eigen::VectorXd returns = Eigen::VectorXd::Zero(n);
  std::vector<char> dead(static_cast<std::size_t>(n), 0);
  std::vector<std::uint64_t> stream(static_cast<std::size_t>(n));
  for (long r = 0; r < n; ++r) stream[static_cast<std::size_t>(r)] = rng::derive(key, 0xB, iteration, static_cast<std::uint64_t>(r));

  for (int t = 0; t < horizon; ++t) {
    for (long r = 0; r < n; ++r) {
      const long c = r / n_particles;
      A.row(r) = cands.row(c).segment(static_cast<long>(t) * d_a, d_a);
    }
    Eigen::VectorXd rew = model.reward_batch(S, A);
    Eigen::MatrixXd next = model.predict_mean_batch(S, A);
    for (long r = 0; r < n; ++r) {
      auto& is_dead = dead[static_cast<std::size_t>(r)];
      if (is_dead) continue;
      if (sigma > 0.0) {
        const std::uint64_t sk = stream[static_cast<std::size_t>(r)];
        for (int j = 0; j < d_s; ++j)
          next(r, j) += sigma * rng::counter_gaussian(sk, static_cast<std::uint64_t>(t) * d_s + j);
      }
      bool ok = std::isfinite(rew(r));
      for (int j = 0; ok && j < d_s; ++j) ok = std::isfinite(next(r, j));
      if (!ok) {
        is_dead = 1;
        next.row(r).setZero();  // keep later GEMMs finite
        continue;
      }
      returns(r) += rew(r);
      S.row(r) = next.row(r);
    }
  }

  Eigen::VectorXd scores(pop);
  if (all_dead) all_dead->assign(static_cast<std::size_t>(pop), 0);
  for (int c = 0; c < pop; ++c) {
    double acc = 0.0;
    int n_dead = 0;
    for (int p = 0; p < n_particles; ++p) {
      const long r = static_cast<long>(c) * n_particles + p;
      if (dead[static_cast<std::size_t>(r)]) {
        acc += fail_return;
        ++n_dead;
        if (flagged) ++*flagged;
      } else {
        acc += returns(r);
      }
    }
    scores(c) = acc / n_particles;
    if (all_dead && n_dead == n_particles) (*all_dead)[static_cast<std::size_t>(c)] = 1;
  }
  return scores;
}

}  // namespace detail

// Mean return over n_particles noisy rollouts of one action sequence
// (horizon x d_a). Actions are clamped to the box first. Deterministic in key.
template <PlannerModel M>
double evaluate_sequence(const M& model, const Eigen::VectorXd& state,
                         const Eigen::MatrixXd& actions, int n_particles, std::uint64_t key,
                         const Eigen::VectorXd& action_low, const Eigen::VectorXd& action_high,
                         std::int64_t* flagged = nullptr) {
  const int horizon = static_cast<int>(actions.rows());
  const int d_a = model.action_dim();
  if (actions.cols() != d_a) throw std::invalid_argument("cem: action sequence dim mismatch");
  Eigen::MatrixXd flat(1, static_cast<long>(horizon) * d_a);
  for (int t = 0; t < horizon; ++t)
    for (int j = 0; j < d_a; ++j)
      flat(0, static_cast<long>(t) * d_a + j) =
          std::min(std::max(actions(t, j), action_low(j)), action_high(j));
  std::int64_t local_flagged = 0;
  Eigen::VectorXd s = detail::score_candidates(model, state, flat, horizon, n_particles, key,
                                               0, &local_flagged);
  if (flagged) *flagged += local_flagged;
  return s(0);
}

class CemPlanner {
 public:
  CemPlanner(CemConfig cfg, Eigen::VectorXd action_low, Eigen::VectorXd action_high)
      : cfg_(cfg), low_(std::move(action_low)), high_(std::move(action_high)) {
    cfg_.validate();
    if (low_.size() != high_.size() || low_.size() < 1)
      throw std::invalid_argument("cem: bad action box");
  }

  const CemConfig& config() const { return cfg_; }

  // Forget the warm start (call at episode boundaries).
  void reset() { have_warm_ = false; }

  // Draws popsize candidate sequences from the diagonal Gaussian (mean, std),
  // clamped to the box. Exposed so tests can reproduce the exact proposals.
  Eigen::MatrixXd sample_candidates(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& std_dev,
                                    int popsize, std::uint64_t key,
                                    std::uint64_t iteration) const {
    const int tau = static_cast<int>(mean.rows());
    const int d_a = static_cast<int>(mean.cols());
    const std::uint64_t sk = rng::derive(key, 0xA, iteration);
    Eigen::MatrixXd cands(popsize, static_cast<long>(tau) * d_a);
    std::uint64_t ctr = 0;
    for (int c = 0; c < popsize; ++c)
      for (int t = 0; t < tau; ++t)
        for (int j = 0; j < d_a; ++j) {
          double v = mean(t, j) + std_dev(t, j) * rng::counter_gaussian(sk, ctr++);
          cands(c, static_cast<long>(t) * d_a + j) = std::min(std::max(v, low_(j)), high_(j));
        }
    return cands;
  }

  template <PlannerModel M>
  PlanResult plan(const Eigen::VectorXd& state, const M& model, std::uint64_t key) {
    const int tau = cfg_.horizon;
    const int d_a = static_cast<int>(low_.size());
    if (model.action_dim() != d_a) throw std::invalid_argument("cem: model action dim mismatch");

    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(tau, d_a);
    if (have_warm_ && warm_mean_.rows() == tau) {
      mean.topRows(tau - 1) = warm_mean_.bottomRows(tau - 1);
      mean.row(tau - 1) = warm_mean_.row(tau - 1);
    }
    clamp_rows(mean);
    Eigen::MatrixXd std_dev(tau, d_a);
    for (int j = 0; j < d_a; ++j)
      std_dev.col(j).setConstant(cfg_.init_std * 0.5 * (high_(j) - low_(j)));

    PlanResult result;
    double best = -std::numeric_limits<double>::infinity();
    bool saw_finite = false;
    std::vector<int> order(static_cast<std::size_t>(cfg_.popsize));

    for (int iter = 0; iter < cfg_.max_iter; ++iter) {
      Eigen::MatrixXd cands = sample_candidates(mean, std_dev, cfg_.popsize, key,
                                                static_cast<std::uint64_t>(iter));
      std::vector<char> all_dead;
      Eigen::VectorXd scores =
          detail::score_candidates(model, state, cands, tau, cfg_.n_particles, key,
                                   static_cast<std::uint64_t>(iter),
                                   &result.nonfinite_particles, &all_dead);
      for (char d : all_dead)
        if (!d) saw_finite = true;
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;
      });
      double elite_sum = 0.0;
      Eigen::MatrixXd elite_mean = Eigen::MatrixXd::Zero(tau, d_a);
      Eigen::MatrixXd elite_sq = Eigen::MatrixXd::Zero(tau, d_a);
      for (int e = 0; e < cfg_.n_elites; ++e) {
        const int c = order[static_cast<std::size_t>(e)];
        elite_sum += scores(c);
        for (int t = 0; t < tau; ++t)
          for (int j = 0; j < d_a; ++j) {
            const double v = cands(c, static_cast<long>(t) * d_a + j);
            elite_mean(t, j) += v;
            elite_sq(t, j) += v * v;
          }
      }
      elite_mean /= cfg_.n_elites;
      Eigen::MatrixXd elite_std =
          (elite_sq / cfg_.n_elites - elite_mean.cwiseProduct(elite_mean))
              .cwiseMax(0.0)
              .cwiseSqrt();
      result.elite_mean_return = elite_sum / cfg_.n_elites;

      const double top = scores(order[0]);
      if (std::isfinite(top) && top > best) best = top;
      result.best_return_trace.push_back(best);

      mean = cfg_.alpha * mean + (1.0 - cfg_.alpha) * elite_mean;
      clamp_rows(mean);
      std_dev = (cfg_.alpha * std_dev + (1.0 - cfg_.alpha) * elite_std).cwiseMax(1e-8);
    }

    if (!saw_finite) {
      result.action = Eigen::VectorXd::Zero(d_a);
      result.all_nonfinite = true;
      have_warm_ = false;
      return result;
    }
    result.action = mean.row(0).transpose();
    warm_mean_ = mean;
    have_warm_ = true;
    return result;
  }

 private:
  void clamp_rows(Eigen::MatrixXd& m) const {
    for (int t = 0; t < m.rows(); ++t)
      for (int j = 0; j < m.cols(); ++j)
        m(t, j) = std::min(std::max(m(t, j), low_(j)), high_(j));
  }

  CemConfig cfg_;
  Eigen::VectorXd low_, high_;
  Eigen::MatrixXd warm_mean_;
  bool have_warm_ = false;
};

}  // namespace psrl::planner
