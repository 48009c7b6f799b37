#include "psrl/agent/dataset.hpp"

#include <stdexcept>

#include "psrl/common/serialize.hpp"

namespace psrl::agent {

void Dataset::append(const envs::Transition& t) {
  if (transitions_.empty()) {
    d_s_ = static_cast<int>(t.state.size());
    d_a_ = static_cast<int>(t.action.size());
  } else if (t.state.size() != d_s_ || t.action.size() != d_a_) {
    throw std::invalid_argument("dataset: transition dimension mismatch");
  }
  if (t.next_state.size() != d_s_)
    throw std::invalid_argument("dataset: next_state dimension mismatch");
  transitions_.push_back(t);
}

Eigen::MatrixXd Dataset::inputs(long first_row) const {
  const long n = size() - first_row;
  Eigen::MatrixXd X(n, d_s_ + d_a_);
  for (long i = 0; i < n; ++i) {
    const auto& t = transitions_[static_cast<std::size_t>(first_row + i)];
    X.row(i).head(d_s_) = t.state.transpose();
    X.row(i).tail(d_a_) = t.action.transpose();
  }
  return X;
}

Eigen::MatrixXd Dataset::delta_targets(long first_row) const {
  const long n = size() - first_row;
  Eigen::MatrixXd Y(n, d_s_);
  for (long i = 0; i < n; ++i) {
    const auto& t = transitions_[static_cast<std::size_t>(first_row + i)];
    Y.row(i) = (t.next_state - t.state).transpose();
  }
  return Y;
}

Eigen::MatrixXd Dataset::next_state_targets(long first_row) const {
  const long n = size() - first_row;
  Eigen::MatrixXd Y(n, d_s_);
  for (long i = 0; i < n; ++i)
    Y.row(i) = transitions_[static_cast<std::size_t>(first_row + i)].next_state.transpose();
  return Y;
}

Eigen::MatrixXd Dataset::reward_targets(long first_row) const {
  const long n = size() - first_row;
  Eigen::MatrixXd Y(n, 1);
  for (long i = 0; i < n; ++i)
    Y(i, 0) = transitions_[static_cast<std::size_t>(first_row + i)].reward;
  return Y;
}

void Dataset::refresh_features(const featnet::Mlp& f_net, const featnet::Mlp& r_net) {
  if (size() == 0) {
    phi_f_.resize(0, f_net.feature_dim());
    phi_r_.resize(0, r_net.feature_dim());
    cached_rows_ = 0;
    return;
  }
  const Eigen::MatrixXd X = inputs();
  phi_f_ = f_net.embed_all(X);
  phi_r_ = r_net.embed_all(X);
  cached_rows_ = size();
}

void Dataset::append_features(const featnet::Mlp& f_net, const featnet::Mlp& r_net) {
  if (cached_rows_ == size()) return;
  if (cached_rows_ == 0) {
    refresh_features(f_net, r_net);
    return;
  }
  const Eigen::MatrixXd X = inputs(cached_rows_);
  const long n_new = X.rows();
  phi_f_.conservativeResize(cached_rows_ + n_new, Eigen::NoChange);
  phi_r_.conservativeResize(cached_rows_ + n_new, Eigen::NoChange);
  phi_f_.bottomRows(n_new) = f_net.embed_all(X);
  phi_r_.bottomRows(n_new) = r_net.embed_all(X);
  cached_rows_ += n_new;
}

void Dataset::clear_features() {
  phi_f_.resize(0, 0);
  phi_r_.resize(0, 0);
  cached_rows_ = 0;
}

const Eigen::MatrixXd& Dataset::phi_f() const {
  if (!features_fresh()) throw std::logic_error("dataset: stale dynamics feature cache");
  return phi_f_;
}

const Eigen::MatrixXd& Dataset::phi_r() const {
  if (!features_fresh()) throw std::logic_error("dataset: stale reward feature cache");
  return phi_r_;
}

void Dataset::save(ser::Writer& w) const {
  w.u32(static_cast<std::uint32_t>(d_s_));
  w.u32(static_cast<std::uint32_t>(d_a_));
  w.u64(static_cast<std::uint64_t>(transitions_.size()));
  for (const auto& t : transitions_) {
    w.vec(t.state);
    w.vec(t.action);
    w.f64(t.reward);
    w.vec(t.next_state);
    w.i64(t.episode_index);
    w.i64(t.step_index);
  }
  w.u64(static_cast<std::uint64_t>(cached_rows_));
  if (cached_rows_ > 0) {
    w.mat(phi_f_);
    w.mat(phi_r_);
  }
}

Dataset Dataset::load(ser::Reader& r) {
  Dataset d;
  d.d_s_ = static_cast<int>(r.u32());
  d.d_a_ = static_cast<int>(r.u32());
  const auto n = r.u64();
  d.transitions_.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    envs::Transition t;
    t.state = r.vec();
    t.action = r.vec();
    t.reward = r.f64();
    t.next_state = r.vec();
    t.episode_index = static_cast<int>(r.i64());
    t.step_index = static_cast<int>(r.i64());
    d.transitions_.push_back(std::move(t));
  }
  d.cached_rows_ = static_cast<long>(r.u64());
  if (d.cached_rows_ > 0) {
    d.phi_f_ = r.mat();
    d.phi_r_ = r.mat();
  }
  return d;
}

}  // namespace psrl::agent
