#include "flowbot/nn.hpp"

#include <algorithm>
#include <numeric>

namespace flowbot {

DenseNetwork<double> fit_dense_network(const Matrix& x, const Labels& y, const NnParams& p,
                                       std::vector<double>* epoch_loss) {
  if (x.rows() == 0) throw Error("neural network: empty training set");
  using Net = DenseNetwork<double>;
  Net net = Net::create(static_cast<int>(x.cols()), p.layers, p.seed, p.zero_init_output);
  Net grad = net;
  Net velocity = net;
  for (auto& v : velocity.trainable()) v.setZero();

  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(p.seed ^ 0x5DEECE66Dull);
  const Matrix xt = x.transpose();
  Matrix batch_x;
  Vector batch_y;
  Net::BatchStats stats;

  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    std::size_t batch_no = 0;
    for (Eigen::Index start = 0; start < n; start += p.batch_size, ++batch_no) {
      const Eigen::Index size = std::min<Eigen::Index>(p.batch_size, n - start);
      batch_x.resize(x.cols(), size);
      batch_y.resize(size);
      int positives = 0;
      for (Eigen::Index k = 0; k < size; ++k) {
        const Eigen::Index r = order[static_cast<std::size_t>(start + k)];
        batch_x.col(k) = xt.col(r);
        batch_y[k] = y[r];
        positives += y[r];
      }
      const double loss = net.loss_and_gradient(batch_x, batch_y, grad, &stats);
      if (!std::isfinite(loss)) {
        const bool single_class = positives == 0 || positives == size;
        throw Error("neural network: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batch_no) + (single_class ? " (single-class batch)" : ""));
      }
      total += loss * static_cast<double>(size);
      auto params = net.trainable();
      auto grads = grad.trainable();
      auto vel = velocity.trainable();
      for (std::size_t k = 0; k < params.size(); ++k) {
        vel[k] = p.momentum * vel[k] - p.learning_rate * grads[k];
        params[k] += vel[k];
      }
      net.update_moving_statistics(stats);
    }
    if (epoch_loss) epoch_loss->push_back(total / static_cast<double>(n));
  }
  return net;
}

}  // namespace flowbot
