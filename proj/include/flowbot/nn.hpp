#pragma once

#include "flowbot/common.hpp"
#include "flowbot/params.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace flowbot {

/// Dense -> batch-norm -> ReLU blocks followed by a single sigmoid unit.
/// Activations are column-major: one column per sample.
template <typename Scalar>
struct DenseNetwork {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Block {
    Mat weight;  // out x in
    Vec bias;
    Vec gamma;
    Vec beta;
    Vec moving_mean;  // non-trainable
    Vec moving_var;   // non-trainable
  };

  std::vector<Block> blocks;
  Mat out_weight;  // 1 x last width
  Vec out_bias;    // size 1
  Scalar bn_momentum = Scalar(0.99);
  Scalar bn_epsilon = Scalar(1e-3);

  /// Glorot-uniform weights, zero biases, unit gamma, zero beta, moving
  /// statistics (0, 1).
  static DenseNetwork create(int inputs, std::span<const int> widths, std::uint64_t seed,
                             bool zero_output_layer = false) {
    DenseNetwork net;
    std::mt19937_64 rng(seed);
    auto glorot = [&](int out, int in) {
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> u(-limit, limit);
      Mat w(out, in);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(u(rng));
      return w;
    };
    int prev = inputs;
    for (int width : widths) {
      Block b;
      b.weight = glorot(width, prev);
      b.bias = Vec::Zero(width);
      b.gamma = Vec::Ones(width);
      b.beta = Vec::Zero(width);
      b.moving_mean = Vec::Zero(width);
      b.moving_var = Vec::Ones(width);
      net.blocks.push_back(std::move(b));
      prev = width;
    }
    net.out_weight = zero_output_layer ? Mat::Zero(1, prev) : glorot(1, prev);
    net.out_bias = Vec::Zero(1);
    return net;
  }

  int input_size() const { return blocks.empty() ? static_cast<int>(out_weight.cols()) : static_cast<int>(blocks.front().weight.cols()); }

  /// Views over every trainable tensor in a fixed order.
  std::vector<Eigen::Map<Vec>> trainable() {
    std::vector<Eigen::Map<Vec>> out;
    for (auto& b : blocks) {
      out.emplace_back(b.weight.data(), b.weight.size());
      out.emplace_back(b.bias.data(), b.bias.size());
      out.emplace_back(b.gamma.data(), b.gamma.size());
      out.emplace_back(b.beta.data(), b.beta.size());
    }
    out.emplace_back(out_weight.data(), out_weight.size());
    out.emplace_back(out_bias.data(), out_bias.size());
    return out;
  }

  std::size_t trainable_parameter_count() const {
    std::size_t n = static_cast<std::size_t>(out_weight.size() + out_bias.size());
    for (const auto& b : blocks) n += static_cast<std::size_t>(b.weight.size() + b.bias.size() + b.gamma.size() + b.beta.size());
    return n;
  }

  std::size_t non_trainable_parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += static_cast<std::size_t>(b.moving_mean.size() + b.moving_var.size());
    return n;
  }

  /// Inference-mode logits (moving statistics). x: features x samples.
  Vec logits(const Mat& x) const {
    Mat a = x;
    for (const auto& b : blocks) {
      Mat z = (b.weight * a).colwise() + b.bias;
      const Vec scale = b.gamma.array() / (b.moving_var.array() + bn_epsilon).sqrt();
      const Vec shift = b.beta.array() - b.moving_mean.array() * scale.array();
      a = ((z.array().colwise() * scale.array()).colwise() + shift.array()).cwiseMax(Scalar(0));
    }
    return ((out_weight * a).array() + out_bias[0]).transpose();
  }

  Vec probability(const Mat& x) const {
    return logits(x).unaryExpr([](Scalar v) {
      return v >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-v)) : std::exp(v) / (Scalar(1) + std::exp(v));
    });
  }

  struct BatchStats {
    std::vector<Vec> mean, var;
  };

  /// Training-mode forward/backward: mean binary cross-entropy over the batch
  /// using batch statistics. `grad` receives gradients shaped like this net.
  Scalar loss_and_gradient(const Mat& x, const Vec& y, DenseNetwork& grad, BatchStats* stats = nullptr) const {
    const Eigen::Index batch = x.cols();
    const Scalar inv_b = Scalar(1) / static_cast<Scalar>(batch);
    struct Cache {
      Mat input, normalized, pre_relu;
      Vec inv_std;
    };
    std::vector<Cache> cache(blocks.size());
    if (stats) {
      stats->mean.resize(blocks.size());
      stats->var.resize(blocks.size());
    }
    Mat a = x;
    for (std::size_t l = 0; l < blocks.size(); ++l) {
      const auto& b = blocks[l];
      auto& c = cache[l];
      c.input = a;
      Mat z = (b.weight * a).colwise() + b.bias;
      const Vec mu = z.rowwise().mean();
      Mat centered = z.colwise() - mu;
      const Vec var = centered.array().square().rowwise().mean();
      c.inv_std = (var.array() + bn_epsilon).rsqrt();
      c.normalized = centered.array().colwise() * c.inv_std.array();
      c.pre_relu = (c.normalized.array().colwise() * b.gamma.array()).colwise() + b.beta.array();
      a = c.pre_relu.cwiseMax(Scalar(0));
      if (stats) {
        stats->mean[l] = mu;
        stats->var[l] = var;
      }
    }
    const Vec o = ((out_weight * a).array() + out_bias[0]).transpose();

    Scalar loss = 0;
    Vec d_o(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
      const Scalar z = o[i];
      const Scalar sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      loss += sp - y[i] * z;
      const Scalar p = z >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-z)) : std::exp(z) / (Scalar(1) + std::exp(z));
      d_o[i] = (p - y[i]) * inv_b;
    }
    loss *= inv_b;

    grad.blocks.resize(blocks.size());
    grad.out_weight = d_o.transpose() * a.transpose();
    grad.out_bias = Vec::Constant(1, d_o.sum());
    Mat d_a = out_weight.transpose() * d_o.transpose();
    for (std::size_t l = blocks.size(); l-- > 0;) {
      const auto& b = blocks[l];
      const auto& c = cache[l];
      auto& g = grad.blocks[l];
      const Mat d_pre = (c.pre_relu.array() > Scalar(0)).select(d_a, Scalar(0));
      g.gamma = (d_pre.array() * c.normalized.array()).rowwise().sum();
      g.beta = d_pre.rowwise().sum();
      const Mat d_norm = d_pre.array().colwise() * b.gamma.array();
      const Vec sum_d = d_norm.rowwise().sum();
      const Vec sum_dx = (d_norm.array() * c.normalized.array()).rowwise().sum();
      const Mat d_z = (((d_norm * static_cast<Scalar>(batch)).colwise() - sum_d).array() -
                       c.normalized.array().colwise() * sum_dx.array())
                          .colwise() *
                      (c.inv_std.array() * inv_b);
      g.weight = d_z * c.input.transpose();
      g.bias = d_z.rowwise().sum();
      if (l > 0) d_a = b.weight.transpose() * d_z;
    }
    return loss;
  }

  void update_moving_statistics(const BatchStats& s) {
    for (std::size_t l = 0; l < blocks.size(); ++l) {
      auto& b = blocks[l];
      b.moving_mean = bn_momentum * b.moving_mean + (Scalar(1) - bn_momentum) * s.mean[l];
      b.moving_var = bn_momentum * b.moving_var + (Scalar(1) - bn_momentum) * s.var[l];
    }
  }
};

/// Mini-batch SGD with momentum on binary cross-entropy; rows are samples.
/// Deterministic for a fixed seed. Throws Error naming epoch and batch if the
/// loss becomes non-finite.
DenseNetwork<double> fit_dense_network(const Matrix& x, const Labels& y, const NnParams& p,
                                       std::vector<double>* epoch_loss = nullptr);

}  // namespace flowbot
