#include "psrl/featnet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "psrl/common/rng.hpp"
#include "psrl/common/serialize.hpp"

namespace psrl::featnet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "swish") return Activation::swish;
  throw std::invalid_argument("mlp: unknown activation '" + name + "'");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::swish: return "swish";
  }
  return "swish";
}

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("mlp: dims must be >= 1");
  if (penultimate_width < 1) throw std::invalid_argument("mlp: penultimate_width must be >= 1");
  for (int w : hidden)
    if (w < 1) throw std::invalid_argument("mlp: hidden widths must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("mlp: learning_rate must be > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("mlp: weight_decay must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("mlp: batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("mlp: epochs must be >= 0");
}

namespace {

void apply_activation(Activation a, MatrixXd& z) {
  switch (a) {
    case Activation::identity:
      return;
    case Activation::relu:
      z = z.cwiseMax(0.0);
      return;
    case Activation::tanh:
      z = z.array().tanh().matrix();
      return;
    case Activation::swish: {
      // x * sigmoid(x)
      z = (z.array() / (1.0 + (-z.array()).exp())).matrix();
      return;
    }
  }
}

MatrixXd activation_deriv(Activation a, const MatrixXd& z) {
  switch (a) {
    case Activation::identity:
      return MatrixXd::Ones(z.rows(), z.cols());
    case Activation::relu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - z.array().tanh().square()).matrix();
    case Activation::swish: {
      Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
      return (s * (1.0 + z.array() * (1.0 - s))).matrix();
    }
  }
  return MatrixXd::Ones(z.rows(), z.cols());
}

double activation_slope_bound(Activation a) {
  switch (a) {
    case Activation::identity:
    case Activation::relu:
    case Activation::tanh:
      return 1.0;
    case Activation::swish:
      return 1.1;  // max |swish'| is ~1.0998
  }
  return 1.0;
}

}  // namespace

std::vector<int> Mlp::layer_dims() const {
  std::vector<int> dims;
  dims.push_back(spec_.input_dim);
  for (int h : spec_.hidden) dims.push_back(h);
  dims.push_back(spec_.penultimate_width);
  dims.push_back(spec_.output_dim);
  return dims;
}

Mlp Mlp::init(const MlpSpec& spec, std::mt19937_64& rng_eng) {
  spec.validate();
  Mlp net;
  net.spec_ = spec;
  auto dims = net.layer_dims();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    const double scale = std::sqrt(2.0 / in);
    MatrixXd w(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w(i, j) = scale * rng::normal(rng_eng);
    net.w_.push_back(std::move(w));
    net.b_.push_back(VectorXd::Zero(out));
  }
  net.in_mean_ = VectorXd::Zero(spec.input_dim);
  net.in_std_ = VectorXd::Ones(spec.input_dim);
  net.target_mean_ = VectorXd::Zero(spec.output_dim);
  return net;
}

Mlp Mlp::identity_features(int input_dim, int output_dim, int width) {
  if (width < 1) width = input_dim;
  MlpSpec spec;
  spec.input_dim = input_dim;
  spec.output_dim = output_dim;
  spec.hidden = {};
  spec.penultimate_width = width;
  spec.activation = Activation::identity;
  spec.normalize_inputs = false;
  spec.center_targets = false;
  Mlp net;
  net.spec_ = spec;
  MatrixXd w0 = MatrixXd::Zero(width, input_dim);
  const int k = std::min(width, input_dim);
  w0.topLeftCorner(k, k).setIdentity();
  net.w_.push_back(std::move(w0));
  net.b_.push_back(VectorXd::Zero(width));
  net.w_.push_back(MatrixXd::Zero(output_dim, width));
  net.b_.push_back(VectorXd::Zero(output_dim));
  net.in_mean_ = VectorXd::Zero(input_dim);
  net.in_std_ = VectorXd::Ones(input_dim);
  net.target_mean_ = VectorXd::Zero(output_dim);
  return net;
}

MatrixXd Mlp::normalize(const MatrixXd& X) const {
  MatrixXd Xn = X;
  Xn.rowwise() -= in_mean_.transpose();
  Xn.array().rowwise() /= in_std_.transpose().array();
  return Xn;
}

void Mlp::forward_cached(const MatrixXd& Xn, std::vector<MatrixXd>& acts) const {
  // acts[0] = Xn; acts[l+1] = activations after layer l (output layer linear).
  acts.clear();
  acts.reserve(w_.size() + 1);
  acts.push_back(Xn);
  for (std::size_t l = 0; l < w_.size(); ++l) {
    MatrixXd z = acts.back() * w_[l].transpose();
    z.rowwise() += b_[l].transpose();
    if (l + 1 < w_.size()) apply_activation(spec_.activation, z);
    acts.push_back(std::move(z));
  }
}

MatrixXd Mlp::embed_all(const MatrixXd& X) const {
  if (X.cols() != spec_.input_dim) throw std::invalid_argument("mlp: embed dimension mismatch");
  MatrixXd a = normalize(X);
  // stop after the penultimate layer
  for (std::size_t l = 0; l + 1 < w_.size(); ++l) {
    MatrixXd z = a * w_[l].transpose();
    z.rowwise() += b_[l].transpose();
    apply_activation(spec_.activation, z);
    a = std::move(z);
  }
  return a;
}

VectorXd Mlp::embed(const VectorXd& x) const {
  return embed_all(x.transpose()).row(0).transpose();
}

MatrixXd Mlp::forward_all(const MatrixXd& X) const {
  MatrixXd phi = embed_all(X);
  MatrixXd y = phi * w_.back().transpose();
  y.rowwise() += (b_.back() + target_mean_).transpose();
  return y;
}

VectorXd Mlp::forward(const VectorXd& x) const {
  return forward_all(x.transpose()).row(0).transpose();
}

double Mlp::mse(const MatrixXd& inputs, const MatrixXd& targets) const {
  if (inputs.rows() == 0) return 0.0;
  MatrixXd err = forward_all(inputs) - targets;
  return err.squaredNorm() / static_cast<double>(err.rows() * err.cols());
}

double Mlp::loss_gradients(const MatrixXd& inputs, const MatrixXd& targets,
                           std::vector<MatrixXd>& gw, std::vector<VectorXd>& gb) const {
  const long n = inputs.rows();
  gw.assign(w_.size(), MatrixXd());
  gb.assign(b_.size(), VectorXd());
  if (n == 0) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      gw[l] = MatrixXd::Zero(w_[l].rows(), w_[l].cols());
      gb[l] = VectorXd::Zero(b_[l].size());
    }
    return 0.0;
  }

  // Recompute pre-activations layer by layer for the backward pass.
  std::vector<MatrixXd> pre(w_.size());   // z_l
  std::vector<MatrixXd> post(w_.size() + 1);  // a_{-1} = Xn
  post[0] = normalize(inputs);
  for (std::size_t l = 0; l < w_.size(); ++l) {
    pre[l] = post[l] * w_[l].transpose();
    pre[l].rowwise() += b_[l].transpose();
    post[l + 1] = pre[l];
    if (l + 1 < w_.size()) apply_activation(spec_.activation, post[l + 1]);
  }
  MatrixXd err = post[w_.size()];
  err.rowwise() += target_mean_.transpose();
  err -= targets;
  const double loss = err.squaredNorm() / static_cast<double>(n);

  MatrixXd delta = (2.0 / static_cast<double>(n)) * err;
  for (std::size_t li = w_.size(); li-- > 0;) {
    gw[li] = delta.transpose() * post[li];
    gb[li] = delta.colwise().sum().transpose();
    if (li > 0)
      delta = (delta * w_[li]).cwiseProduct(activation_deriv(spec_.activation, pre[li - 1]));
  }
  return loss;
}

Mlp::TrainReport Mlp::train(const MatrixXd& inputs, const MatrixXd& targets,
                            std::mt19937_64& rng_eng) {
  TrainReport report;
  const long n = inputs.rows();
  if (n == 0) return report;
  if (inputs.cols() != spec_.input_dim || targets.cols() != spec_.output_dim ||
      targets.rows() != n)
    throw std::invalid_argument("mlp: train data shape mismatch");
  if (!inputs.allFinite() || !targets.allFinite())
    throw std::invalid_argument("mlp: non-finite training data");

  if (spec_.normalize_inputs) {
    in_mean_ = inputs.colwise().mean().transpose();
    VectorXd var = (inputs.rowwise() - in_mean_.transpose()).array().square().colwise().mean();
    in_std_ = var.array().sqrt().max(1e-8).matrix();
  }
  if (spec_.center_targets) target_mean_ = targets.colwise().mean().transpose();

  const int batch = static_cast<int>(std::min<long>(spec_.batch_size, n));
  std::vector<long> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0L);

  // Adam state, reset each call; warm starts carry parameters only.
  std::vector<MatrixXd> mw(w_.size()), vw(w_.size());
  std::vector<VectorXd> mb(b_.size()), vb(b_.size());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    mw[l] = MatrixXd::Zero(w_[l].rows(), w_[l].cols());
    vw[l] = mw[l];
    mb[l] = VectorXd::Zero(b_[l].size());
    vb[l] = mb[l];
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  auto snapshot_w = w_;
  auto snapshot_b = b_;
  std::vector<MatrixXd> gw;
  std::vector<VectorXd> gb;
  MatrixXd Xb(batch, spec_.input_dim), Yb(batch, spec_.output_dim);

  int t = 0;
  for (int epoch = 0; epoch < spec_.epochs && t < spec_.max_grad_steps; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng_eng);
    for (long start = 0; start + batch <= n && t < spec_.max_grad_steps; start += batch) {
      for (int i = 0; i < batch; ++i) {
        Xb.row(i) = inputs.row(perm[static_cast<std::size_t>(start + i)]);
        Yb.row(i) = targets.row(perm[static_cast<std::size_t>(start + i)]);
      }
      const double loss = loss_gradients(Xb, Yb, gw, gb);
      if (!std::isfinite(loss)) {
        w_ = snapshot_w;
        b_ = snapshot_b;
        report.nan_abort = true;
        return report;
      }
      ++t;
      const double corr = spec_.learning_rate * std::sqrt(1.0 - std::pow(beta2, t)) /
                          (1.0 - std::pow(beta1, t));
      for (std::size_t l = 0; l < w_.size(); ++l) {
        mw[l] = beta1 * mw[l] + (1.0 - beta1) * gw[l];
        vw[l] = beta2 * vw[l] + (1.0 - beta2) * gw[l].cwiseProduct(gw[l]);
        w_[l].array() -= corr * mw[l].array() / (vw[l].array().sqrt() + eps);
        if (spec_.weight_decay > 0.0)
          w_[l] *= 1.0 - spec_.learning_rate * spec_.weight_decay;
        mb[l] = beta1 * mb[l] + (1.0 - beta1) * gb[l];
        vb[l] = beta2 * vb[l] + (1.0 - beta2) * gb[l].cwiseProduct(gb[l]);
        b_[l].array() -= corr * mb[l].array() / (vb[l].array().sqrt() + eps);
      }
    }
    report.epoch_mse.push_back(mse(inputs, targets));
    snapshot_w = w_;
    snapshot_b = b_;
  }
  report.steps = t;
  return report;
}

double Mlp::gradient_norm(const VectorXd& input, const VectorXd& target) const {
  std::vector<MatrixXd> gw;
  std::vector<VectorXd> gb;
  loss_gradients(input.transpose(), target.transpose(), gw, gb);
  double sq = 0.0;
  for (const auto& g : gw) sq += g.squaredNorm();
  for (const auto& g : gb) sq += g.squaredNorm();
  return std::sqrt(sq);
}

double Mlp::gradient_check(const VectorXd& input, const VectorXd& target, double fd_step) const {
  std::vector<MatrixXd> gw;
  std::vector<VectorXd> gb;
  loss_gradients(input.transpose(), target.transpose(), gw, gb);

  Mlp pert = *this;
  auto loss_of = [&]() {
    Eigen::VectorXd err = pert.forward(input) - target;
    return err.squaredNorm();
  };
  double worst = 0.0;
  auto check_param = [&](double& p, double analytic) {
    const double saved = p;
    p = saved + fd_step;
    const double up = loss_of();
    p = saved - fd_step;
    const double dn = loss_of();
    p = saved;
    const double fd = (up - dn) / (2.0 * fd_step);
    const double rel = std::abs(analytic - fd) /
                       std::max(1e-8, std::abs(analytic) + std::abs(fd));
    if (rel > worst) worst = rel;
  };
  for (std::size_t l = 0; l < w_.size(); ++l) {
    auto& wm = pert.w_[l];
    for (long i = 0; i < wm.rows(); ++i)
      for (long j = 0; j < wm.cols(); ++j) check_param(wm(i, j), gw[l](i, j));
    auto& bv = pert.b_[l];
    for (long i = 0; i < bv.size(); ++i) check_param(bv(i), gb[l](i));
  }
  return worst;
}

double Mlp::embed_lipschitz_bound() const {
  double bound = 1.0 / in_std_.minCoeff();  // normalization layer
  const double slope = activation_slope_bound(spec_.activation);
  for (std::size_t l = 0; l + 1 < w_.size(); ++l) {
    Eigen::JacobiSVD<MatrixXd> svd(w_[l]);
    bound *= svd.singularValues()(0) * slope;
  }
  return bound;
}

bool Mlp::same_parameters(const Mlp& other) const {
  if (w_.size() != other.w_.size()) return false;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    if (w_[l].rows() != other.w_[l].rows() || w_[l].cols() != other.w_[l].cols()) return false;
    if (std::memcmp(w_[l].data(), other.w_[l].data(),
                    sizeof(double) * static_cast<std::size_t>(w_[l].size())) != 0)
      return false;
    if (std::memcmp(b_[l].data(), other.b_[l].data(),
                    sizeof(double) * static_cast<std::size_t>(b_[l].size())) != 0)
      return false;
  }
  return in_mean_ == other.in_mean_ && in_std_ == other.in_std_ &&
         target_mean_ == other.target_mean_;
}

void Mlp::save(ser::Writer& w) const {
  w.u32(static_cast<std::uint32_t>(spec_.input_dim));
  w.u32(static_cast<std::uint32_t>(spec_.output_dim));
  w.u32(static_cast<std::uint32_t>(spec_.hidden.size()));
  for (int h : spec_.hidden) w.u32(static_cast<std::uint32_t>(h));
  w.u32(static_cast<std::uint32_t>(spec_.penultimate_width));
  w.str(activation_name(spec_.activation));
  w.f64(spec_.learning_rate);
  w.f64(spec_.weight_decay);
  w.u32(static_cast<std::uint32_t>(spec_.batch_size));
  w.u32(static_cast<std::uint32_t>(spec_.epochs));
  w.u32(static_cast<std::uint32_t>(spec_.max_grad_steps));
  w.u32(spec_.normalize_inputs ? 1 : 0);
  w.u32(spec_.center_targets ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(w_.size()));
  for (std::size_t l = 0; l < w_.size(); ++l) {
    w.mat(w_[l]);
    w.vec(b_[l]);
  }
  w.vec(in_mean_);
  w.vec(in_std_);
  w.vec(target_mean_);
}

Mlp Mlp::load(ser::Reader& r) {
  Mlp net;
  net.spec_.input_dim = static_cast<int>(r.u32());
  net.spec_.output_dim = static_cast<int>(r.u32());
  const auto nh = r.u32();
  net.spec_.hidden.resize(nh);
  for (auto& h : net.spec_.hidden) h = static_cast<int>(r.u32());
  net.spec_.penultimate_width = static_cast<int>(r.u32());
  net.spec_.activation = activation_from_name(r.str());
  net.spec_.learning_rate = r.f64();
  net.spec_.weight_decay = r.f64();
  net.spec_.batch_size = static_cast<int>(r.u32());
  net.spec_.epochs = static_cast<int>(r.u32());
  net.spec_.max_grad_steps = static_cast<int>(r.u32());
  net.spec_.normalize_inputs = r.u32() != 0;
  net.spec_.center_targets = r.u32() != 0;
  const auto nl = r.u32();
  net.w_.resize(nl);
  net.b_.resize(nl);
  for (std::uint32_t l = 0; l < nl; ++l) {
    net.w_[l] = r.mat();
    net.b_[l] = r.vec();
  }
  net.in_mean_ = r.vec();
  net.in_std_ = r.vec();
  net.target_mean_ = r.vec();
  return net;
}

}  // namespace psrl::featnet
