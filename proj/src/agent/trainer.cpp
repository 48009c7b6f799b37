#include "psrl/agent/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "psrl/common/rng.hpp"
#include "psrl/common/serialize.hpp"

namespace psrl::agent {

namespace {
constexpr std::uint64_t kEnvStream = 1, kSampleStream = 2, kTrainStream = 3, kPlanStream = 4,
                        kInitF = 5, kInitR = 6;
}

void AgentConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("agent: episodes must be >= 1");
  if (retrain_every < 1) throw std::invalid_argument("agent: retrain_every must be >= 1");
  f_spec.validate();
  r_spec.validate();
  f_prior.validate();
  r_prior.validate();
  cem.validate();
}

void AgentConfig::resolve(const envs::MdpSpec& spec) {
  f_spec.input_dim = spec.d_s + spec.d_a;
  f_spec.output_dim = spec.d_s;
  r_spec.input_dim = spec.d_s + spec.d_a;
  r_spec.output_dim = 1;
  if (!train_features) {
    // Frozen identity feature maps: features are [s; a] itself.
    f_spec.hidden = {};
    r_spec.hidden = {};
    f_spec.penultimate_width = f_spec.input_dim;
    r_spec.penultimate_width = r_spec.input_dim;
    f_spec.normalize_inputs = false;
    r_spec.normalize_inputs = false;
    f_spec.center_targets = false;
    r_spec.center_targets = false;
  }
  if (f_prior.covariance.size() == 0)
    f_prior.covariance = Eigen::MatrixXd::Identity(f_spec.penultimate_width,
                                                   f_spec.penultimate_width);
  if (r_prior.covariance.size() == 0)
    r_prior.covariance = Eigen::MatrixXd::Identity(r_spec.penultimate_width,
                                                   r_spec.penultimate_width);
  // Known-noise model; keep the likelihood proper for deterministic tasks.
  f_prior.noise_variance = std::max(spec.sigma_f * spec.sigma_f, 1e-6);
  r_prior.noise_variance = std::max(spec.sigma_r * spec.sigma_r, 1e-6);
}

EpisodeRecord run_episode(const envs::Environment& env,
                          const bayes::GaussianLinearPosterior& posterior_f,
                          const bayes::GaussianLinearPosterior& posterior_r,
                          const featnet::Mlp& f_net, const featnet::Mlp& r_net,
                          planner::CemPlanner& planner, int episode_index,
                          std::mt19937_64& sample_rng, std::mt19937_64& env_rng,
                          std::uint64_t planner_key, std::vector<envs::Transition>* out,
                          bool delta_dynamics) {
  const auto& spec = env.spec();
  const auto t0 = std::chrono::steady_clock::now();
  EpisodeRecord rec;
  rec.episode_index = episode_index;

  planner::SampledModel model;
  model.f_net = f_net;
  model.r_net = r_net;
  model.W_f = posterior_f.sample(sample_rng).weights;
  model.w_r = posterior_r.sample(sample_rng).weights.col(0);
  model.sigma_f = std::sqrt(posterior_f.noise_variance());
  model.sigma_r = std::sqrt(posterior_r.noise_variance());
  model.r_max = spec.r_max;
  model.delta_dynamics = delta_dynamics;
  rec.n_posterior_samples = 1;
  model.validate();

  planner.reset();
  Eigen::VectorXd s = env.reset(env_rng);
  double var_sum = 0.0;
  Eigen::VectorXd x(spec.d_s + spec.d_a);
  for (int i = 1; i <= spec.H; ++i) {
    const auto plan = planner.plan(s, model, rng::derive(planner_key, static_cast<std::uint64_t>(i)));
    envs::Transition t;
    try {
      t = env.step(s, plan.action, env_rng, episode_index, i);
    } catch (const envs::EpisodeAbort& e) {
      std::cerr << "[agent] episode " << episode_index << " aborted: " << e.what() << "\n";
      rec.truncated = true;
      break;
    }
    x.head(spec.d_s) = t.state;
    x.tail(spec.d_a) = t.action;
    const double v = posterior_f.predictive_variance(f_net.embed(x));
    var_sum += v;
    if (rec.steps == 0 || v > rec.max_pred_variance) {
      rec.max_pred_variance = v;
      rec.kmax = i;
    }
    rec.total_reward += t.reward;
    ++rec.steps;
    if (out) out->push_back(t);
    s = t.next_state;
  }
  if (rec.steps > 0) rec.mean_pred_variance = var_sum / rec.steps;
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0).count();
  return rec;
}

Trainer::Trainer(const envs::Environment& env, AgentConfig cfg)
    : env_(env),
      cfg_([&] {
        cfg.resolve(env.spec());
        cfg.validate();
        return cfg;
      }()),
      f_net_(cfg_.train_features
                 ? [&] {
                     auto eng = rng::engine(rng::derive(cfg_.seed, kInitF));
                     return featnet::Mlp::init(cfg_.f_spec, eng);
                   }()
                 : featnet::Mlp::identity_features(cfg_.f_spec.input_dim, cfg_.f_spec.output_dim)),
      r_net_(cfg_.train_features
                 ? [&] {
                     auto eng = rng::engine(rng::derive(cfg_.seed, kInitR));
                     return featnet::Mlp::init(cfg_.r_spec, eng);
                   }()
                 : featnet::Mlp::identity_features(cfg_.r_spec.input_dim, 1)),
      planner_(cfg_.cem, env.spec().action_low, env.spec().action_high),
      env_rng_(rng::engine(rng::derive(cfg_.seed, kEnvStream))),
      sample_rng_(rng::engine(rng::derive(cfg_.seed, kSampleStream))),
      train_rng_(rng::engine(rng::derive(cfg_.seed, kTrainStream))) {
  const Eigen::MatrixXd empty_f(0, cfg_.f_spec.penultimate_width);
  posterior_f_ = std::make_unique<bayes::GaussianLinearPosterior>(
      bayes::GaussianLinearPosterior::from_data(cfg_.f_prior, empty_f,
                                                Eigen::MatrixXd(0, env.spec().d_s)));
  const Eigen::MatrixXd empty_r(0, cfg_.r_spec.penultimate_width);
  posterior_r_ = std::make_unique<bayes::GaussianLinearPosterior>(
      bayes::GaussianLinearPosterior::from_data(cfg_.r_prior, empty_r, Eigen::MatrixXd(0, 1)));
}

void Trainer::retrain_nets() {
  const Eigen::MatrixXd X = data_.inputs();
  const Eigen::MatrixXd Yf = data_.delta_targets();
  const Eigen::MatrixXd Yr = data_.reward_targets();
  auto retrain_one = [&](featnet::Mlp& net, const Eigen::MatrixXd& Y, const char* head) {
    const featnet::Mlp backup = net;
    try {
      const auto report = net.train(X, Y, train_rng_);
      if (report.nan_abort) throw std::runtime_error("non-finite loss");
    } catch (const std::exception& e) {
      std::cerr << "[agent] " << head << " retrain failed (" << e.what()
                << "); keeping previous net\n";
      net = backup;
      ++retrain_failures_;
    }
  };
  retrain_one(f_net_, Yf, "dynamics");
  retrain_one(r_net_, Yr, "reward");
}

void Trainer::rebuild_or_update_posteriors(long first_new_row) {
  const bool delta = cfg_.train_features;
  if (data_.features_fresh() && first_new_row == 0) {
    // Full rebuild from the refreshed caches.
    Eigen::MatrixXd Yf = delta ? data_.delta_targets() : data_.next_state_targets();
    Yf.rowwise() -= f_net_.target_mean().transpose();
    Eigen::MatrixXd Yr = data_.reward_targets();
    Yr.array() -= r_net_.target_mean()(0);
    posterior_f_ = std::make_unique<bayes::GaussianLinearPosterior>(
        bayes::GaussianLinearPosterior::from_data(cfg_.f_prior, data_.phi_f(), Yf));
    posterior_r_ = std::make_unique<bayes::GaussianLinearPosterior>(
        bayes::GaussianLinearPosterior::from_data(cfg_.r_prior, data_.phi_r(), Yr));
    return;
  }
  data_.append_features(f_net_, r_net_);
  const long n_new = data_.size() - first_new_row;
  Eigen::MatrixXd Yf =
      delta ? data_.delta_targets(first_new_row) : data_.next_state_targets(first_new_row);
  Yf.rowwise() -= f_net_.target_mean().transpose();
  Eigen::MatrixXd Yr = data_.reward_targets(first_new_row);
  Yr.array() -= r_net_.target_mean()(0);
  posterior_f_ = std::make_unique<bayes::GaussianLinearPosterior>(
      posterior_f_->updated(data_.phi_f().bottomRows(n_new), Yf));
  posterior_r_ = std::make_unique<bayes::GaussianLinearPosterior>(
      posterior_r_->updated(data_.phi_r().bottomRows(n_new), Yr));
}

EpisodeRecord Trainer::run_one_episode() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& spec = env_.spec();
  EpisodeRecord rec;
  std::vector<envs::Transition> fresh;
  fresh.reserve(static_cast<std::size_t>(spec.H));

  if (episode_ == 0) {
    rec.episode_index = 0;
    Eigen::VectorXd s = env_.reset(env_rng_);
    Eigen::VectorXd a(spec.d_a);
    Eigen::VectorXd x(spec.d_s + spec.d_a);
    double var_sum = 0.0;
    for (int i = 1; i <= spec.H; ++i) {
      for (int j = 0; j < spec.d_a; ++j)
        a(j) = rng::uniform(env_rng_, spec.action_low(j), spec.action_high(j));
      envs::Transition t;
      try {
        t = env_.step(s, a, env_rng_, 0, i);
      } catch (const envs::EpisodeAbort& e) {
        std::cerr << "[agent] episode 0 aborted: " << e.what() << "\n";
        rec.truncated = true;
        break;
      }
      x.head(spec.d_s) = t.state;
      x.tail(spec.d_a) = t.action;
      const double v = posterior_f_->predictive_variance(f_net_.embed(x));
      var_sum += v;
      if (rec.steps == 0 || v > rec.max_pred_variance) {
        rec.max_pred_variance = v;
        rec.kmax = i;
      }
      rec.total_reward += t.reward;
      ++rec.steps;
      fresh.push_back(t);
      s = t.next_state;
    }
    if (rec.steps > 0) rec.mean_pred_variance = var_sum / rec.steps;
  } else {
    rec = run_episode(env_, *posterior_f_, *posterior_r_, f_net_, r_net_, planner_, episode_,
                      sample_rng_, env_rng_, rng::derive(cfg_.seed, kPlanStream,
                                                         static_cast<std::uint64_t>(episode_)),
                      &fresh, cfg_.train_features);
  }

  const long first_new = data_.size();
  for (const auto& t : fresh) data_.append(t);

  if (data_.size() > 0) {
    const bool retrain = cfg_.train_features && (episode_ % cfg_.retrain_every == 0);
    if (retrain) {
      retrain_nets();
      data_.refresh_features(f_net_, r_net_);
      rebuild_or_update_posteriors(0);
    } else {
      rebuild_or_update_posteriors(first_new);
    }
  }

  ++episode_;
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0).count();
  records_.push_back(rec);
  return rec;
}

void Trainer::save(ser::Writer& w) const {
  data_.save(w);
  f_net_.save(w);
  r_net_.save(w);
  posterior_f_->save(w);
  posterior_r_->save(w);
  w.str(rng::engine_state(env_rng_));
  w.str(rng::engine_state(sample_rng_));
  w.str(rng::engine_state(train_rng_));
  w.i64(episode_);
  w.i64(retrain_failures_);
  w.u64(static_cast<std::uint64_t>(records_.size()));
  for (const auto& r : records_) {
    w.i64(r.episode_index);
    w.f64(r.total_reward);
    w.i64(r.steps);
    w.f64(r.wall_ms);
    w.f64(r.mean_pred_variance);
    w.f64(r.max_pred_variance);
    w.i64(r.kmax);
    w.i64(r.n_posterior_samples);
    w.u32(r.truncated ? 1 : 0);
  }
}

Trainer Trainer::load(ser::Reader& r, const envs::Environment& env, AgentConfig cfg) {
  Trainer t(env, std::move(cfg));
  t.data_ = Dataset::load(r);
  t.f_net_ = featnet::Mlp::load(r);
  t.r_net_ = featnet::Mlp::load(r);
  t.posterior_f_ =
      std::make_unique<bayes::GaussianLinearPosterior>(bayes::GaussianLinearPosterior::load(r));
  t.posterior_r_ =
      std::make_unique<bayes::GaussianLinearPosterior>(bayes::GaussianLinearPosterior::load(r));
  rng::restore_engine(t.env_rng_, r.str());
  rng::restore_engine(t.sample_rng_, r.str());
  rng::restore_engine(t.train_rng_, r.str());
  t.episode_ = static_cast<int>(r.i64());
  t.retrain_failures_ = static_cast<int>(r.i64());
  const auto n = r.u64();
  t.records_.resize(n);
  for (auto& rec : t.records_) {
    rec.episode_index = static_cast<int>(r.i64());
    rec.total_reward = r.f64();
    rec.steps = static_cast<int>(r.i64());
    rec.wall_ms = r.f64();
    rec.mean_pred_variance = r.f64();
    rec.max_pred_variance = r.f64();
    rec.kmax = static_cast<int>(r.i64());
    rec.n_posterior_samples = static_cast<int>(r.i64());
    rec.truncated = r.u32() != 0;
  }
  return t;
}

std::vector<EpisodeRecord> run_training(const envs::Environment& env, AgentConfig cfg) {
  Trainer trainer(env, std::move(cfg));
  const int episodes = trainer.config().episodes;
  for (int e = 0; e < episodes; ++e) trainer.run_one_episode();
  return trainer.records();
}

}  // namespace psrl::agent
