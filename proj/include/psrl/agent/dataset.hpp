#pragma once

#include <Eigen/Dense>
#include <vector>

#include "psrl/envs/env.hpp"
#include "psrl/featnet/mlp.hpp"

namespace psrl::ser {
class Writer;
class Reader;
}  // namespace psrl::ser

namespace psrl::agent {

// Append-only transition store with feature caches for both heads. Caches are
// either empty or row-aligned with the transitions; refresh_features rebuilds
// them from scratch, append_features extends them for sequential posterior
// updates between retrains.
class Dataset {
 public:
  void append(const envs::Transition& t);
  long size() const { return static_cast<long>(transitions_.size()); }
  const std::vector<envs::Transition>& transitions() const { return transitions_; }

  int state_dim() const { return d_s_; }
  int action_dim() const { return d_a_; }

  // Row i = [s_i; a_i].
  Eigen::MatrixXd inputs(long first_row = 0) const;
  // Row i = s'_i - s_i.
  Eigen::MatrixXd delta_targets(long first_row = 0) const;
  // Row i = s'_i.
  Eigen::MatrixXd next_state_targets(long first_row = 0) const;
  // Row i = r_i (single column).
  Eigen::MatrixXd reward_targets(long first_row = 0) const;

  void refresh_features(const featnet::Mlp& f_net, const featnet::Mlp& r_net);
  // Embeds rows [cached_rows, size) with the same nets and appends to the
  // caches; requires caches non-empty unless the dataset was empty.
  void append_features(const featnet::Mlp& f_net, const featnet::Mlp& r_net);
  void clear_features();

  bool features_fresh() const { return cached_rows_ == size(); }
  long cached_rows() const { return cached_rows_; }
  const Eigen::MatrixXd& phi_f() const;
  const Eigen::MatrixXd& phi_r() const;

  void save(ser::Writer& w) const;
  static Dataset load(ser::Reader& r);

 private:
  std::vector<envs::Transition> transitions_;
  int d_s_ = 0, d_a_ = 0;
  Eigen::MatrixXd phi_f_, phi_r_;
  long cached_rows_ = 0;
};

}  // namespace psrl::agent
