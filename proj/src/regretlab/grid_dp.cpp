#include "psrl/regretlab/grid_dp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace psrl::regretlab {

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(0.5 * i);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd nodes = es.eigenvalues();
  Eigen::VectorXd weights(n);
  const double total = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = total * v0 * v0;
  }
  return {nodes, weights};
}

void GridSpec::validate() const {
  const int d = static_cast<int>(points.size());
  if (d < 1 || d > 2) throw std::invalid_argument("grid_dp: supports d_s in {1, 2}");
  if (low.size() != d || high.size() != d)
    throw std::invalid_argument("grid_dp: box dimension mismatch");
  for (int i = 0; i < d; ++i) {
    if (points[static_cast<std::size_t>(i)] < 2)
      throw std::invalid_argument("grid_dp: need >= 2 points per axis");
    if (!(low(i) < high(i))) throw std::invalid_argument("grid_dp: low must be < high");
  }
  if (n_actions < 1) throw std::invalid_argument("grid_dp: n_actions must be >= 1");
  if (!(action_low <= action_high)) throw std::invalid_argument("grid_dp: bad action range");
  if (gh_points < 1) throw std::invalid_argument("grid_dp: gh_points must be >= 1");
}

namespace {

// 1-D linear interpolation with boundary clamping on a uniform axis laid out
// with the given stride.
double interp1(const Eigen::VectorXd& axis, const double* v, long stride, int n, double x,
               bool* clamped) {
  const double lo = axis(0), hi = axis(n - 1);
  if (x <= lo) {
    if (clamped && x < lo) *clamped = true;
    return v[0];
  }
  if (x >= hi) {
    if (clamped && x > hi) *clamped = true;
    return v[static_cast<long>(n - 1) * stride];
  }
  const double step = (hi - lo) / (n - 1);
  const double u = (x - lo) / step;
  const int i = std::min(static_cast<int>(u), n - 2);
  const double frac = u - i;
  return (1.0 - frac) * v[static_cast<long>(i) * stride] +
         frac * v[(static_cast<long>(i) + 1) * stride];
}

// Multilinear interpolation over a flattened (row-major) 1-D or 2-D table.
double interp_nd(const std::vector<Eigen::VectorXd>& axes, const std::vector<int>& points,
                 const Eigen::VectorXd& table, const Eigen::VectorXd& s, bool* clamped) {
  if (points.size() == 1) return interp1(axes[0], table.data(), 1, points[0], s(0), clamped);
  const int n0 = points[0], n1 = points[1];
  const double lo = axes[0](0), hi = axes[0](n0 - 1);
  double x = s(0);
  if (x < lo) {
    x = lo;
    if (clamped) *clamped = true;
  } else if (x > hi) {
    x = hi;
    if (clamped) *clamped = true;
  }
  const double step = (hi - lo) / (n0 - 1);
  const double u = (x - lo) / step;
  const int i = std::min(static_cast<int>(u), n0 - 2);
  const double frac = u - i;
  const double a =
      interp1(axes[1], table.data() + static_cast<long>(i) * n1, 1, n1, s(1), clamped);
  const double b =
      interp1(axes[1], table.data() + (static_cast<long>(i) + 1) * n1, 1, n1, s(1), clamped);
  return (1.0 - frac) * a + frac * b;
}

}  // namespace

double GridDp::interp(const Eigen::VectorXd& table, const Eigen::VectorXd& s, bool count) const {
  bool clamped = false;
  const double out = interp_nd(axis_, grid_.points, table, s, &clamped);
  if (count) {
    ++queries_;
    if (clamped) ++escapes_;
  }
  return out;
}

double GridDp::value_at(int stage, const Eigen::VectorXd& s) const {
  return interp(value_[static_cast<std::size_t>(stage)], s, true);
}

int GridDp::policy_index(int stage, const Eigen::VectorXd& s) const {
  ++queries_;
  long idx = 0;
  for (int ax = 0; ax < d_; ++ax) {
    const int n = grid_.points[static_cast<std::size_t>(ax)];
    const double lo = axis_[static_cast<std::size_t>(ax)](0);
    const double hi = axis_[static_cast<std::size_t>(ax)](n - 1);
    double x = s(ax);
    if (x < lo || x > hi) {
      ++escapes_;
      x = std::min(std::max(x, lo), hi);
    }
    const double step = (hi - lo) / (n - 1);
    const int i = std::min(static_cast<int>(std::lround((x - lo) / step)), n - 1);
    idx = idx * n + i;
  }
  return policy_[static_cast<std::size_t>(stage)][static_cast<std::size_t>(idx)];
}

GridDp solve_grid_dp(const DpModel& model, const GridSpec& grid) {
  grid.validate();
  if (model.H < 1) throw std::invalid_argument("grid_dp: H must be >= 1");
  const int d = static_cast<int>(grid.points.size());
  if (model.noise_std.size() != d)
    throw std::invalid_argument("grid_dp: noise_std dimension mismatch");

  GridDp dp;
  dp.grid_ = grid;
  dp.d_ = d;
  dp.axis_.resize(static_cast<std::size_t>(d));
  long n_nodes = 1;
  for (int ax = 0; ax < d; ++ax) {
    const int n = grid.points[static_cast<std::size_t>(ax)];
    dp.axis_[static_cast<std::size_t>(ax)] =
        Eigen::VectorXd::LinSpaced(n, grid.low(ax), grid.high(ax));
    n_nodes *= n;
  }
  dp.n_nodes_ = n_nodes;
  if (grid.n_actions == 1)
    dp.actions_ = Eigen::VectorXd::Constant(1, 0.5 * (grid.action_low + grid.action_high));
  else
    dp.actions_ = Eigen::VectorXd::LinSpaced(grid.n_actions, grid.action_low, grid.action_high);

  const auto [gh_t, gh_w] = gauss_hermite(grid.gh_points);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);

  // E[V(. + eps_ax)] by GH convolution of the 1-D interpolant along one axis.
  auto smooth_axis = [&](const Eigen::VectorXd& in, int ax) {
    const double sigma = model.noise_std(ax);
    if (sigma <= 0.0) return in;
    Eigen::VectorXd out(in.size());
    const int n = grid.points[static_cast<std::size_t>(ax)];
    const auto& axis = dp.axis_[static_cast<std::size_t>(ax)];
    const long stride = (d == 2 && ax == 0) ? grid.points[1] : 1;
    const long n_lines = n_nodes / n;
    for (long line = 0; line < n_lines; ++line) {
      const long base = (d == 1) ? 0 : (ax == 0 ? line : line * grid.points[1]);
      const double* src = in.data() + base;
      double* dst = out.data() + base;
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int q = 0; q < grid.gh_points; ++q) {
          const double x = axis(i) + std::sqrt(2.0) * sigma * gh_t(q);
          acc += gh_w(q) * interp1(axis, src, stride, n, x, nullptr);
        }
        dst[static_cast<long>(i) * stride] = acc * inv_sqrt_pi;
      }
    }
    return out;
  };

  dp.value_.assign(static_cast<std::size_t>(model.H) + 1, Eigen::VectorXd::Zero(n_nodes));
  dp.policy_.assign(static_cast<std::size_t>(model.H),
                    std::vector<int>(static_cast<std::size_t>(n_nodes), 0));

  Eigen::VectorXd s(d);
  for (int t = model.H - 1; t >= 0; --t) {
    Eigen::VectorXd smoothed = dp.value_[static_cast<std::size_t>(t) + 1];
    for (int ax = 0; ax < d; ++ax) smoothed = smooth_axis(smoothed, ax);

    auto& vt = dp.value_[static_cast<std::size_t>(t)];
    auto& pt = dp.policy_[static_cast<std::size_t>(t)];
    for (long node = 0; node < n_nodes; ++node) {
      if (d == 1) {
        s(0) = dp.axis_[0](node);
      } else {
        s(0) = dp.axis_[0](node / grid.points[1]);
        s(1) = dp.axis_[1](node % grid.points[1]);
      }
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int ai = 0; ai < static_cast<int>(dp.actions_.size()); ++ai) {
        const double a = dp.actions_(ai);
        const Eigen::VectorXd sn = model.mean_next(s, a);
        bool clamped = false;
        const double cont = interp_nd(dp.axis_, grid.points, smoothed, sn, &clamped);
        if (clamped) ++dp.solve_clamps_;
        const double q = model.reward(s, a) + cont;
        if (q > best) {
          best = q;
          best_a = ai;
        }
      }
      vt(node) = best;
      pt[static_cast<std::size_t>(node)] = best_a;
    }
  }
  return dp;
}

}  // namespace psrl::regretlab
