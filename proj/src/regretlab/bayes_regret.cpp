#include "psrl/regretlab/bayes_regret.hpp"

#include <cmath>
#include <stdexcept>

#include "psrl/bayes/blr.hpp"
#include "psrl/common/parallel.hpp"
#include "psrl/common/rng.hpp"
#include "psrl/envs/linear_mdp.hpp"

namespace psrl::regretlab {

void RegretConfig::validate() const {
  if (d_s != 1) throw std::invalid_argument("bayes_regret: grid oracle requires d_s = 1");
  if (d_a != 1) throw std::invalid_argument("bayes_regret: requires d_a = 1");
  if (H < 1 || episodes < 1 || n_mdps < 1)
    throw std::invalid_argument("bayes_regret: H, episodes, n_mdps must be >= 1");
  if (eval_rollouts < 1 || baseline_rollouts < 1)
    throw std::invalid_argument("bayes_regret: rollout counts must be >= 1");
  if (!(sigma_f > 0.0) || !(sigma_r >= 0.0) || !(r_max > 0.0))
    throw std::invalid_argument("bayes_regret: bad noise/reward parameters");
  if (!(grid_low < grid_high) || grid_points < 2 || n_actions < 1 || gh_points < 1)
    throw std::invalid_argument("bayes_regret: bad grid parameters");
}

double RegretCurve::cumulative_at_T(long T) const {
  if (H < 1 || T % H != 0) throw std::invalid_argument("regret: T must be a multiple of H");
  const long k = T / H;
  if (k < 1 || k > static_cast<long>(records.size()))
    throw std::out_of_range("regret: T outside the recorded range");
  return records[static_cast<std::size_t>(k - 1)].cumulative;
}

namespace {

// Mean return of the DP policy on the true MDP from the point-mass initial
// state; rewards use the oracle mean (noise is zero-mean) for lower variance.
double mc_policy_return(const envs::SyntheticLinearMdp& env, const GridDp& dp, int n_rollouts,
                        std::mt19937_64& eng) {
  const auto& spec = env.spec();
  Eigen::VectorXd s(1), a(1);
  double total = 0.0;
  for (int r = 0; r < n_rollouts; ++r) {
    s(0) = 0.0;
    for (int t = 0; t < spec.H; ++t) {
      a(0) = dp.act(t, s);
      total += env.mean_reward(s, a);
      s = env.mean_dynamics(s, a);
      s(0) += spec.sigma_f * rng::normal(eng);
    }
  }
  return total / n_rollouts;
}

GridSpec make_grid(const RegretConfig& cfg, const envs::MdpSpec& spec) {
  GridSpec g;
  g.low = Eigen::VectorXd::Constant(1, cfg.grid_low);
  g.high = Eigen::VectorXd::Constant(1, cfg.grid_high);
  g.points = {cfg.grid_points};
  g.n_actions = cfg.n_actions;
  g.action_low = spec.action_low(0);
  g.action_high = spec.action_high(0);
  g.gh_points = cfg.gh_points;
  return g;
}

DpModel linear_dp_model(Eigen::MatrixXd W_f, Eigen::VectorXd w_r, double sigma_f, int H,
                        double clip) {
  DpModel m;
  m.H = H;
  m.noise_std = Eigen::VectorXd::Constant(1, sigma_f);
  m.mean_next = [W_f = std::move(W_f)](const Eigen::VectorXd& s, double a) {
    Eigen::VectorXd out(1);
    out(0) = W_f(0, 0) * s(0) + W_f(0, 1) * a;
    return out;
  };
  m.reward = [w_r = std::move(w_r), clip](const Eigen::VectorXd& s, double a) {
    const double r = w_r(0) * s(0) + w_r(1) * a;
    return clip > 0.0 ? std::min(std::max(r, -clip), clip) : r;
  };
  return m;
}

struct DrawResult {
  std::vector<double> delta;  // per-episode regret estimates
  long escapes = 0;
  long queries = 0;
};

DrawResult run_draw(const RegretConfig& cfg, int draw) {
  DrawResult out;
  out.delta.resize(static_cast<std::size_t>(cfg.episodes), 0.0);

  const auto env = envs::SyntheticLinearMdp::sample(cfg.d_s, cfg.d_a, cfg.H, cfg.sigma_f,
                                                    cfg.sigma_r, cfg.r_max,
                                                    rng::derive(cfg.seed, 1, draw));
  const GridSpec grid = make_grid(cfg, env.spec());

  auto sample_rng = rng::engine(rng::derive(cfg.seed, 2, draw));
  auto env_rng = rng::engine(rng::derive(cfg.seed, 3, draw));
  auto baseline_rng = rng::engine(rng::derive(cfg.seed, 4, draw));
  auto eval_rng = rng::engine(rng::derive(cfg.seed, 5, draw));

  // True reward is clipped at +-r_max; the optimal policy plans with it.
  const GridDp dp_star = solve_grid_dp(
      linear_dp_model(env.W_f(), env.w_r(), cfg.sigma_f, cfg.H, cfg.r_max), grid);
  const double baseline = mc_policy_return(env, dp_star, cfg.baseline_rollouts, baseline_rng);
  out.escapes += dp_star.escape_count();
  out.queries += dp_star.query_count();

  if (cfg.known_mdp_control) {
    for (int k = 0; k < cfg.episodes; ++k) {
      const double eval = mc_policy_return(env, dp_star, cfg.eval_rollouts, eval_rng);
      out.delta[static_cast<std::size_t>(k)] = baseline - eval;
    }
    out.escapes = dp_star.escape_count();
    out.queries = dp_star.query_count();
    return out;
  }

  // Exact PSRL with identity features [s; a] regressing s' and r directly.
  bayes::GaussianLinearPrior f_prior;
  f_prior.covariance = Eigen::Vector2d(0.3 * 0.3, 0.5 * 0.5).asDiagonal();
  f_prior.noise_variance = cfg.sigma_f * cfg.sigma_f;
  bayes::GaussianLinearPrior r_prior;
  r_prior.covariance = Eigen::Vector2d(0.5 * 0.5, 0.5 * 0.5).asDiagonal();
  r_prior.noise_variance = std::max(cfg.sigma_r * cfg.sigma_r, 1e-8);

  auto posterior_f = bayes::GaussianLinearPosterior::from_data(
      f_prior, Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1));
  auto posterior_r = bayes::GaussianLinearPosterior::from_data(
      r_prior, Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1));

  Eigen::MatrixXd phi(cfg.H, 2), y_f(cfg.H, 1), y_r(cfg.H, 1);
  for (int k = 0; k < cfg.episodes; ++k) {
    const Eigen::MatrixXd W_k = posterior_f.sample(sample_rng).weights;  // 2 x 1
    const Eigen::MatrixXd w_rk = posterior_r.sample(sample_rng).weights;
    Eigen::MatrixXd W_row(1, 2);
    W_row << W_k(0, 0), W_k(1, 0);
    const GridDp dp_k = solve_grid_dp(
        linear_dp_model(W_row, w_rk.col(0), cfg.sigma_f, cfg.H, 0.0), grid);

    // One real episode following the realized policy.
    Eigen::VectorXd s(1), a(1);
    s(0) = 0.0;
    for (int t = 0; t < cfg.H; ++t) {
      a(0) = dp_k.act(t, s);
      const auto tr = env.step(s, a, env_rng, k, t + 1);
      phi(t, 0) = s(0);
      phi(t, 1) = a(0);
      y_f(t, 0) = tr.next_state(0);
      y_r(t, 0) = tr.reward;
      s = tr.next_state;
    }

    const double eval = mc_policy_return(env, dp_k, cfg.eval_rollouts, eval_rng);
    out.delta[static_cast<std::size_t>(k)] = baseline - eval;
    out.escapes += dp_k.escape_count();
    out.queries += dp_k.query_count();

    posterior_f = posterior_f.updated(phi, y_f);
    posterior_r = posterior_r.updated(phi, y_r);
  }
  return out;
}

}  // namespace

RegretCurve bayes_regret_experiment(const RegretConfig& cfg) {
  cfg.validate();
  std::vector<DrawResult> draws(static_cast<std::size_t>(cfg.n_mdps));
  psrl::parallel_for(cfg.n_mdps, cfg.workers,
                         [&](int i) { draws[static_cast<std::size_t>(i)] = run_draw(cfg, i); });

  RegretCurve curve;
  curve.H = cfg.H;
  curve.d = cfg.d_s + cfg.d_a;
  curve.per_draw_cumulative.resize(static_cast<std::size_t>(cfg.n_mdps));
  long escapes = 0, queries = 0;
  for (int i = 0; i < cfg.n_mdps; ++i) {
    auto& cum = curve.per_draw_cumulative[static_cast<std::size_t>(i)];
    cum.resize(static_cast<std::size_t>(cfg.episodes));
    double acc = 0.0;
    for (int k = 0; k < cfg.episodes; ++k) {
      acc += draws[static_cast<std::size_t>(i)].delta[static_cast<std::size_t>(k)];
      cum[static_cast<std::size_t>(k)] = acc;
    }
    escapes += draws[static_cast<std::size_t>(i)].escapes;
    queries += draws[static_cast<std::size_t>(i)].queries;
  }
  curve.escape_rate = queries > 0 ? static_cast<double>(escapes) / static_cast<double>(queries)
                                  : 0.0;
  curve.valid = curve.escape_rate <= 0.01;

  curve.records.resize(static_cast<std::size_t>(cfg.episodes));
  for (int k = 0; k < cfg.episodes; ++k) {
    double mean = 0.0;
    for (int i = 0; i < cfg.n_mdps; ++i)
      mean += draws[static_cast<std::size_t>(i)].delta[static_cast<std::size_t>(k)];
    mean /= cfg.n_mdps;
    double cum_mean = 0.0, cum_sq = 0.0;
    for (int i = 0; i < cfg.n_mdps; ++i) {
      const double c = curve.per_draw_cumulative[static_cast<std::size_t>(i)]
                                                [static_cast<std::size_t>(k)];
      cum_mean += c;
      cum_sq += c * c;
    }
    cum_mean /= cfg.n_mdps;
    const double var =
        cfg.n_mdps > 1
            ? std::max(0.0, (cum_sq - cfg.n_mdps * cum_mean * cum_mean) / (cfg.n_mdps - 1))
            : 0.0;
    auto& rec = curve.records[static_cast<std::size_t>(k)];
    rec.episode_index = k + 1;
    rec.T = static_cast<long>(k + 1) * cfg.H;
    rec.per_episode = mean;
    rec.cumulative = cum_mean;
    rec.stderr_cum = cfg.n_mdps > 1 ? std::sqrt(var / cfg.n_mdps) : 0.0;
  }
  return curve;
}

}  // namespace psrl::regretlab
