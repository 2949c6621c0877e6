#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hexcpg/rng.hpp"

namespace hexcpg {

// Fully connected network with ELU hidden activations and a linear output.
// Parameters live in one flat vector (per layer: W out x in column-major,
// then b), which keeps the optimizer, checkpoints and finite-difference
// checks simple.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  int in_dim() const { return sizes_.front(); }
  int out_dim() const { return sizes_.back(); }
  int param_count() const { return static_cast<int>(params_.size()); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // He-style init scaled by fan-in; the output layer additionally scaled by
  // `final_scale` (small values keep initial outputs near zero).
  void init(Rng& rng, double final_scale = 1.0);

  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // activation entering each layer
    std::vector<Eigen::MatrixXd> pre;     // preactivation of each layer
  };

  // Rows of x are samples. Pass a cache to enable backward().
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;

  // Accumulates dL/dparams into `grad` (same layout as params) and returns
  // dL/dx. `dout` is dL/d(output), same shape as forward's result.
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& dout,
                           Eigen::VectorXd& grad) const;

  // Views into the flat parameter vector.
  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

 private:
  int weight_offset(int layer) const;
  int bias_offset(int layer) const;

  std::vector<int> sizes_;
  std::vector<int> offsets_;  // parameter offset of each layer
  Eigen::VectorXd params_;
};

// Adam over a flat parameter vector.
struct Adam {
  Eigen::VectorXd m, v;
  int t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit Adam(int n = 0)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
};

}  // namespace hexcpg
