#include "hexcpg/mlp.hpp"

#include <cmath>

namespace hexcpg {

namespace {

inline double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
inline double elu_grad(double z) { return z > 0.0 ? 1.0 : std::exp(z); }

}  // namespace

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  int total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(total);
}

int Mlp::weight_offset(int layer) const { return offsets_[layer]; }

int Mlp::bias_offset(int layer) const {
  return offsets_[layer] + sizes_[layer + 1] * sizes_[layer];
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1],
          sizes_[layer]};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1],
          sizes_[layer]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

void Mlp::init(Rng& rng, double final_scale) {
  for (int l = 0; l < num_layers(); ++l) {
    const double scale = std::sqrt(2.0 / sizes_[l]) *
                         (l == num_layers() - 1 ? final_scale : 1.0);
    auto W = weight(l);
    for (int c = 0; c < W.cols(); ++c) {
      for (int r = 0; r < W.rows(); ++r) {
        W(r, c) = scale * rng.normal();
      }
    }
    bias(l).setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  Eigen::MatrixXd a = x;
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  for (int l = 0; l < num_layers(); ++l) {
    if (cache) cache->inputs.push_back(a);
    Eigen::MatrixXd z =
        (a * weight(l).transpose()).rowwise() + bias(l).transpose();
    if (cache) cache->pre.push_back(z);
    if (l + 1 < num_layers()) {
      a = z.unaryExpr([](double v) { return elu(v); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Eigen::MatrixXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dout,
                              Eigen::VectorXd& grad) const {
  Eigen::MatrixXd da = dout;
  for (int l = num_layers() - 1; l >= 0; --l) {
    Eigen::MatrixXd dz;
    if (l == num_layers() - 1) {
      dz = std::move(da);
    } else {
      dz = da.cwiseProduct(
          cache.pre[l].unaryExpr([](double v) { return elu_grad(v); }));
    }
    Eigen::Map<Eigen::MatrixXd> dW(grad.data() + weight_offset(l),
                                   sizes_[l + 1], sizes_[l]);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + bias_offset(l),
                                   sizes_[l + 1]);
    dW += dz.transpose() * cache.inputs[l];
    db += dz.colwise().sum().transpose();
    if (l > 0) da = dz * weight(l);
  }
  return da;
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                double lr) {
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  params -= lr * (m / bc1).cwiseQuotient(
                     ((v / bc2).cwiseSqrt().array() + eps).matrix());
}

}  // namespace hexcpg
