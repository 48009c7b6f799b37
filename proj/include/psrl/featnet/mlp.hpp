#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace psrl::ser {
class Writer;
class Reader;
}  // namespace psrl::ser

namespace psrl::featnet {

enum class Activation { identity, relu, tanh, swish };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

struct MlpSpec {
  int input_dim = 1;    // d_s + d_a
  int output_dim = 1;   // d_out
  std::vector<int> hidden;  // widths before the penultimate layer
  int penultimate_width = 8;  // d_phi
  Activation activation = Activation::swish;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;  // decoupled L2 on weights (not biases)
  int batch_size = 32;
  int epochs = 5;             // passes over the data per train() call
  int max_grad_steps = 2000;  // cap per train() call
  bool normalize_inputs = true;
  bool center_targets = true;

  void validate() const;  // throws std::invalid_argument
};

/** Fully connected net: input -> hidden... -> penultimate -> linear output.
 *  All layers up to and including the penultimate use `activation`; the
 *  penultimate activations are the feature map phi. Inputs are normalized and
 *  targets centered with statistics frozen inside the net, so embed() and the
 *  cached features downstream always agree. */
class Mlp {
 public:
  Mlp() = default;

  static Mlp init(const MlpSpec& spec, std::mt19937_64& rng);
  /// Identity feature map: linear activation, identity penultimate weights,
  /// no normalization/centering. embed(x) = x padded or truncated to width.
  static Mlp identity_features(int input_dim, int output_dim, int width = -1);

  const MlpSpec& spec() const { return spec_; }
  int feature_dim() const { return spec_.penultimate_width; }
  const Eigen::VectorXd& target_mean() const { return target_mean_; }

  Eigen::VectorXd embed(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd embed_all(const Eigen::MatrixXd& X) const;  // rows are inputs
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;    // full head output
  Eigen::MatrixXd forward_all(const Eigen::MatrixXd& X) const;

  struct TrainReport {
    std::vector<double> epoch_mse;  // training MSE after each pass
    int steps = 0;
    bool nan_abort = false;
  };

  /// Mini-batch Adam on squared loss. N = 0 leaves the net unchanged;
  /// N < batch_size falls back to full batch. Deterministic given (rng, data).
  TrainReport train(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    std::mt19937_64& rng);

  /// Mean over rows of ||f(x) - y||^2 / d_out.
  double mse(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) const;

  /// Parameter gradients of L = mean over rows of ||f(x) - y||^2 (sum over
  /// output dims). Returns the loss.
  double loss_gradients(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                        std::vector<Eigen::MatrixXd>& gw,
                        std::vector<Eigen::VectorXd>& gb) const;

  /// Worst relative error between analytic and central finite-difference
  /// gradients (step 1e-5) on a single sample.
  double gradient_check(const Eigen::VectorXd& input, const Eigen::VectorXd& target,
                        double fd_step = 1e-5) const;

  /// L2 norm of the analytic gradient on a single sample.
  double gradient_norm(const Eigen::VectorXd& input, const Eigen::VectorXd& target) const;

  /// Product of layer operator norms times activation slope bounds: a global
  /// Lipschitz bound for embed().
  double embed_lipschitz_bound() const;

  int n_layers() const { return static_cast<int>(w_.size()); }
  const Eigen::MatrixXd& weights(int layer) const { return w_[static_cast<std::size_t>(layer)]; }
  const Eigen::VectorXd& biases(int layer) const { return b_[static_cast<std::size_t>(layer)]; }
  Eigen::MatrixXd& mutable_weights(int layer) { return w_[static_cast<std::size_t>(layer)]; }
  Eigen::VectorXd& mutable_biases(int layer) { return b_[static_cast<std::size_t>(layer)]; }

  bool same_parameters(const Mlp& other) const;  // bitwise comparison

  void save(ser::Writer& w) const;
  static Mlp load(ser::Reader& r);

 private:
  std::vector<int> layer_dims() const;
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& X) const;
  // Forward pass on normalized rows keeping post-activations per layer.
  void forward_cached(const Eigen::MatrixXd& Xn, std::vector<Eigen::MatrixXd>& acts) const;

  MlpSpec spec_;
  std::vector<Eigen::MatrixXd> w_;  // layer l: (out x in)
  std::vector<Eigen::VectorXd> b_;
  Eigen::VectorXd in_mean_, in_std_, target_mean_;
};

}  // namespace psrl::featnet
