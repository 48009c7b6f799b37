#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace psrl::regretlab {

// Physicists' Gauss-Hermite rule: integral of exp(-t^2) f(t) dt ~ sum w_q f(t_q).
// Nodes/weights from the Golub-Welsch eigenvalue problem.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n);

struct GridSpec {
  Eigen::VectorXd low, high;  // state box, d_s <= 2
  std::vector<int> points;    // grid points per axis (>= 2)
  int n_actions = 21;
  double action_low = -1.0, action_high = 1.0;
  int gh_points = 16;
  void validate() const;
};

struct DpModel {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> mean_next;
  std::function<double(const Eigen::VectorXd&, double)> reward;
  Eigen::VectorXd noise_std;  // per state dimension
  int H = 1;
};

// Finite-horizon DP tables on the grid. Transition expectations use per-axis
// Gauss-Hermite convolution of the multilinear value interpolant (exact for
// the interpolant under independent per-axis noise) followed by interpolation
// at the deterministic mean next state.
class GridDp {
 public:
  const GridSpec& grid() const { return grid_; }
  int horizon() const { return static_cast<int>(policy_.size()); }
  long nodes() const { return n_nodes_; }

  // Multilinear interpolation of the stage-value table; off-grid states clamp
  // to the boundary and count as escapes.
  double value_at(int stage, const Eigen::VectorXd& s) const;
  // Greedy action at the nearest grid node.
  int policy_index(int stage, const Eigen::VectorXd& s) const;
  double action_value(int index) const { return actions_(index); }
  double act(int stage, const Eigen::VectorXd& s) const {
    return actions_(policy_index(stage, s));
  }

  long escape_count() const { return escapes_; }
  long query_count() const { return queries_; }
  void reset_escape_count() const { escapes_ = 0; queries_ = 0; }
  // Off-grid mean-next-state clamps hit while solving (boundary truncation).
  long solve_clamp_count() const { return solve_clamps_; }

  const std::vector<Eigen::VectorXd>& values() const { return value_; }
  const std::vector<std::vector<int>>& policy() const { return policy_; }
  const Eigen::VectorXd& actions() const { return actions_; }

  friend GridDp solve_grid_dp(const DpModel& model, const GridSpec& grid);

 private:
  double interp(const Eigen::VectorXd& table, const Eigen::VectorXd& s, bool count) const;

  GridSpec grid_;
  int d_ = 1;
  long n_nodes_ = 0;
  Eigen::VectorXd actions_;
  std::vector<Eigen::VectorXd> axis_;      // node coordinates per axis
  std::vector<Eigen::VectorXd> value_;     // [H+1] tables, flattened row-major
  std::vector<std::vector<int>> policy_;   // [H] action index per node
  long solve_clamps_ = 0;
  mutable long escapes_ = 0;
  mutable long queries_ = 0;
};

GridDp solve_grid_dp(const DpModel& model, const GridSpec& grid);

}  // namespace psrl::regretlab
