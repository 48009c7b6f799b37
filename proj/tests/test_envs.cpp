#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "psrl/envs/cartpole.hpp"
#include "psrl/envs/env.hpp"
#include "psrl/envs/linear_mdp.hpp"
#include "psrl/envs/pendulum.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace psrl::envs;

TEST_CASE("make_env covers the three tasks and rejects unknown names") {
  for (const char* name : {"cartpole", "pendulum", "synthetic"}) {
    auto env = make_env(name);
    CHECK(env->spec().name == name);
    CHECK(env->spec().H == (env->spec().name == "synthetic" ? 50 : 200));
    CHECK(env->spec().sigma_f == doctest::Approx(0.1));
  }
  CHECK(make_env("cartpole")->spec().d_s == 4);
  CHECK(make_env("pendulum")->spec().d_s == 3);
  CHECK(make_env("synthetic")->spec().d_s == 4);
  CHECK(make_env("cartpole")->spec().r_max == doctest::Approx(1.0));
  CHECK(make_env("pendulum")->spec().r_max == doctest::Approx(18.0));
  CHECK_THROWS_AS(make_env("mountaincar"), std::invalid_argument);
}

TEST_CASE("near-zero noise: step reproduces the mean dynamics") {
  EnvParams p;
  p.sigma_f = 1e-12;
  p.sigma_r = 1e-12;
  for (const char* name : {"cartpole", "pendulum", "synthetic"}) {
    auto env = make_env(name, p);
    std::mt19937_64 rng(1);
    VectorXd s = env->reset(rng);
    VectorXd a = 0.3 * env->spec().action_high;
    Transition t = env->step(s, a, rng);
    auto [mean_next, mean_rew] = env->oracle_mean_dynamics(s, a);
    CHECK((t.next_state - mean_next).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(t.reward - mean_rew) < 1e-9);
  }
}

TEST_CASE("synthetic mean dynamics is the exact linear map") {
  MatrixXd W_f(1, 2);
  W_f << 0.9, 0.5;  // s' = 0.9 s + 0.5 a
  VectorXd w_r(2);
  w_r << 1.0, 0.0;
  SyntheticLinearMdp env(W_f, w_r, 10, 0.1, 0.1, 5.0);
  VectorXd s(1), a(1);
  s << 1.0;
  a << 0.0;
  CHECK(env.mean_dynamics(s, a)(0) == doctest::Approx(0.9).epsilon(1e-15));
  a << 1.0;
  CHECK(env.mean_dynamics(s, a)(0) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(env.mean_reward(s, a) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sampled synthetic instances keep the state block stable") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto env = SyntheticLinearMdp::sample(4, 2, 10, 0.1, 0.1, 5.0, seed);
    MatrixXd W_ss = env.W_f().leftCols(4);
    CHECK(W_ss.eigenvalues().cwiseAbs().maxCoeff() <= 0.95 + 1e-12);
    CHECK(env.W_f().cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("cartpole noise variance matches sigma_f^2 within 10% over 1e4 steps") {
  auto env = make_env("cartpole");
  std::mt19937_64 rng(7);
  VectorXd s(4), a(1);
  s << 0.1, -0.2, 0.05, 0.3;
  a << 2.0;
  VectorXd mean_next = env->mean_dynamics(s, a);
  const int n = 10000;
  MatrixXd noise(n, 4);
  for (int i = 0; i < n; ++i) {
    Transition t = env->step(s, a, rng);
    noise.row(i) = (t.next_state - mean_next).transpose();
  }
  for (int j = 0; j < 4; ++j) {
    const double var = noise.col(j).squaredNorm() / n -
                       std::pow(noise.col(j).mean(), 2);
    CHECK(var == doctest::Approx(0.01).epsilon(0.10));
  }
}

TEST_CASE("cartpole upright rest state is a fixed point under zero force") {
  auto env = make_env("cartpole");
  VectorXd s = VectorXd::Zero(4), a = VectorXd::Zero(1);
  auto [next, rew] = env->oracle_mean_dynamics(s, a);
  CHECK((next - s).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rew == doctest::Approx(1.0).epsilon(1e-15));  // (1 + cos 0) / 2
}

TEST_CASE("cartpole angle subsystem is exactly the closed pair dynamics") {
  auto env = make_env("cartpole");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    VectorXd s(4);
    s << u(rng), u(rng), u(rng), u(rng);
    VectorXd a(1);
    a << 10.0 * u(rng);
    VectorXd next = env->mean_dynamics(s, a);
    Eigen::Vector2d ang = StochasticCartpole::angle_step(Eigen::Vector2d(s(2), s(3)), a(0));
    CHECK(std::abs(next(2) - ang(0)) < 1e-14);
    CHECK(std::abs(next(3) - ang(1)) < 1e-14);
  }
}

TEST_CASE("pendulum resets near the hanging position, synthetic at the origin") {
  auto pend = make_env("pendulum");
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    VectorXd s = pend->reset(rng);
    REQUIRE(s.size() == 3);
    CHECK(s(0) <= -std::cos(0.1) + 1e-12);           // cos(theta) with theta in pi +- 0.1
    CHECK(std::abs(s.head(2).norm() - 1.0) < 1e-12);  // on the unit circle
    CHECK(std::abs(s(2)) <= 0.1 + 1e-12);
  }
  auto synth = make_env("synthetic");
  CHECK(synth->reset(rng).cwiseAbs().maxCoeff() == 0.0);

  auto cart = make_env("cartpole");
  for (int i = 0; i < 100; ++i) CHECK(cart->reset(rng).cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
}

TEST_CASE("same-seed resets are identical") {
  for (const char* name : {"cartpole", "pendulum", "synthetic"}) {
    auto env = make_env(name);
    std::mt19937_64 a(13), b(13);
    CHECK((env->reset(a) - env->reset(b)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("mean reward obeys the advertised bound over random probes") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto probe = [&](Environment& env, double state_scale, long n) {
    const auto& spec = env.spec();
    for (long i = 0; i < n; ++i) {
      VectorXd s(spec.d_s), a(spec.d_a);
      for (int j = 0; j < spec.d_s; ++j) s(j) = state_scale * u(rng);
      for (int j = 0; j < spec.d_a; ++j)
        a(j) = spec.action_low(j) + (u(rng) + 1.0) * 0.5 * (spec.action_high(j) - spec.action_low(j));
      CHECK(std::abs(env.mean_reward(s, a)) <= spec.r_max + 1e-12);
    }
  };
  auto cart = make_env("cartpole");
  probe(*cart, 5.0, 300000);
  auto pend = make_env("pendulum");
  // plausible states live on the cylinder |(cos, sin)| = 1, |thetadot| <= 8
  const auto& pspec = pend->spec();
  for (long i = 0; i < 300000; ++i) {
    const double th = M_PI * u(rng);
    VectorXd s(3), a(1);
    s << std::cos(th), std::sin(th), 8.0 * u(rng);
    a << 2.0 * u(rng);
    CHECK(std::abs(pend->mean_reward(s, a)) <= pspec.r_max + 1e-12);
  }
  auto synth = make_env("synthetic");
  probe(*synth, 50.0, 300000);  // clipped even far outside the typical range
}

TEST_CASE("a rollout produces exactly H transitions with contract fields") {
  EnvParams p;
  p.horizon = 25;
  auto env = make_env("pendulum", p);
  REQUIRE(env->spec().H == 25);
  std::mt19937_64 rng(19);
  VectorXd s = env->reset(rng);
  for (int k = 1; k <= env->spec().H; ++k) {
    VectorXd a = VectorXd::Constant(1, 1.5);
    Transition t = env->step(s, a, rng, 3, k);
    CHECK(t.episode_index == 3);
    CHECK(t.step_index == k);
    CHECK(t.state == s);
    CHECK(t.action(0) == 1.5);
    CHECK(t.next_state.allFinite());
    CHECK(std::isfinite(t.reward));
    s = t.next_state;
  }
}

TEST_CASE("state and reward noise draws are uncorrelated across steps") {
  auto env = make_env("synthetic");
  std::mt19937_64 rng(23);
  VectorXd s = VectorXd::Zero(4), a = VectorXd::Zero(1);
  VectorXd mean_next = env->mean_dynamics(s, a);
  const double mean_rew = env->mean_reward(s, a);
  const long n = 100000;
  MatrixXd eps(n, 5);
  for (long i = 0; i < n; ++i) {
    Transition t = env->step(s, a, rng);
    eps.row(i).head(4) = (t.next_state - mean_next).transpose();
    eps(i, 4) = t.reward - mean_rew;
  }
  // lag-1 autocorrelation and cross-coordinate correlation both near zero
  for (int j = 0; j < 5; ++j) {
    VectorXd col = eps.col(j).array() - eps.col(j).mean();
    const double denom = col.squaredNorm();
    const double lag1 = col.head(n - 1).dot(col.tail(n - 1)) / denom;
    CHECK(std::abs(lag1) < 0.05);
    for (int k = j + 1; k < 5; ++k) {
      VectorXd other = eps.col(k).array() - eps.col(k).mean();
      const double corr = col.dot(other) / std::sqrt(denom * other.squaredNorm());
      CHECK(std::abs(corr) < 0.05);
    }
  }
}

TEST_CASE("out-of-box actions are clamped and counted") {
  auto env = make_env("cartpole");
  env->reset_clamp_count();
  std::mt19937_64 rng(29);
  VectorXd s = VectorXd::Zero(4);
  VectorXd wild(1);
  wild << 25.0;
  Transition t = env->step(s, wild, rng);
  CHECK(t.action(0) == 10.0);  // executed action is the clamped one
  CHECK(env->clamp_count() == 1);
  wild << -11.0;
  env->step(s, wild, rng);
  CHECK(env->clamp_count() == 2);
  VectorXd fine(1);
  fine << 3.0;
  env->step(s, fine, rng);
  CHECK(env->clamp_count() == 2);
  env->reset_clamp_count();
  CHECK(env->clamp_count() == 0);
}

TEST_CASE("non-finite states abort the episode") {
  auto env = make_env("pendulum");
  std::mt19937_64 rng(31);
  VectorXd bad(3);
  bad << 1.0, 0.0, std::numeric_limits<double>::infinity();
  VectorXd a = VectorXd::Zero(1);
  CHECK_THROWS_AS(env->step(bad, a, rng), EpisodeAbort);
  VectorXd nan_state(3);
  nan_state << std::nan(""), 0.0, 0.0;
  CHECK_THROWS_AS(env->step(nan_state, a, rng), EpisodeAbort);
  VectorXd good = env->reset(rng);
  VectorXd bad_action(1);
  bad_action << std::nan("");
  CHECK_THROWS_AS(env->step(good, bad_action, rng), EpisodeAbort);
}
