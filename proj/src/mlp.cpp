#include "flowplan/mlp.hpp"

#include <cmath>

#include "flowplan/errors.hpp"

namespace flowplan {

MlpField MlpField::create(int dim, int waypoints, const std::vector<int>& hidden,
                          Rng& rng) {
  if (dim < 1 || waypoints < 2)
    throw ValidationError("network needs dim >= 1 and waypoints >= 2");
  MlpField net;
  net.dim_ = dim;
  net.waypoints_ = waypoints;
  const int n = dim * waypoints;
  net.widths.push_back(n + 1);
  for (int h : hidden) {
    if (h < 1) throw ValidationError("hidden width must be >= 1");
    net.widths.push_back(h);
  }
  net.widths.push_back(n);
  for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
    const int rows = net.widths[l + 1];
    const int cols = net.widths[l];
    Eigen::MatrixXd w(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) w(i, j) = scale * rng.normal();
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(rows));
  }
  net.check();
  return net;
}

void MlpField::check() const {
  if (widths.size() < 2) throw ValidationError("network needs >= 2 widths");
  if (weights.size() != widths.size() - 1 || biases.size() != weights.size())
    throw ValidationError("network layer counts disagree");
  if (widths.front() != dim_ * waypoints_ + 1 ||
      widths.back() != dim_ * waypoints_)
    throw ValidationError("network widths do not match the path shape");
  if (activation != "tanh") throw ValidationError("unsupported activation");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] ||
        biases[l].size() != widths[l + 1])
      throw ValidationError("network layer shape mismatch");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw ValidationError("network parameters not finite");
  }
}

long MlpField::parameter_count() const {
  long n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += weights[l].size() + biases[l].size();
  return n;
}

Eigen::MatrixXd MlpField::forward(const Eigen::MatrixXd& input,
                                  std::vector<Eigen::MatrixXd>* activations) const {
  if (input.rows() != input_size())
    throw ValidationError("network input size mismatch");
  Eigen::MatrixXd a = input;
  if (activations) {
    activations->clear();
    activations->push_back(a);
  }
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z =
        (weights[static_cast<std::size_t>(l)] * a).colwise() +
        biases[static_cast<std::size_t>(l)];
    a = (l + 1 < layers) ? z.array().tanh().matrix() : std::move(z);
    if (activations) activations->push_back(a);
  }
  return a;
}

Eigen::MatrixXd MlpField::eval(const Eigen::MatrixXd& tau, double t) const {
  check_input(tau, t);
  Eigen::VectorXd x(input_size());
  x.head(tau.size()) = Eigen::Map<const Eigen::VectorXd>(tau.data(), tau.size());
  x[tau.size()] = t;
  const Eigen::VectorXd y = forward(x);
  return Eigen::Map<const Eigen::MatrixXd>(y.data(), tau.rows(), tau.cols());
}

double CfmGradients::norm() const {
  double acc = 0.0;
  for (const auto& w : weights) acc += w.squaredNorm();
  for (const auto& b : biases) acc += b.squaredNorm();
  return std::sqrt(acc);
}

double cfm_loss(const MlpField& model, const CfmBatch& batch,
                CfmGradients* grads) {
  const int b = batch.size();
  if (b < 1) throw ValidationError("batch must not be empty");
  const int n = model.output_size();
  if (batch.tau0.rows() != n || batch.tau1.rows() != n ||
      batch.tau0.cols() != b || batch.tau1.cols() != b)
    throw ValidationError("batch shape mismatch");

  Eigen::MatrixXd input(n + 1, b);
  Eigen::MatrixXd target(n, b);
  for (int i = 0; i < b; ++i) {
    const double t = batch.ts[static_cast<std::size_t>(i)];
    if (!(t >= 0.0) || !(t <= 1.0))
      throw ValidationError("batch time must be in [0, 1]");
    input.col(i).head(n) =
        (1.0 - t) * batch.tau0.col(i) + t * batch.tau1.col(i);
    input(n, i) = t;
    target.col(i) = batch.tau1.col(i) - batch.tau0.col(i);
  }

  std::vector<Eigen::MatrixXd> acts;
  const Eigen::MatrixXd out =
      model.forward(input, grads ? &acts : nullptr);
  const Eigen::MatrixXd diff = out - target;
  const double loss = diff.squaredNorm() / static_cast<double>(b);

  if (grads) {
    const int layers = model.layer_count();
    grads->weights.assign(static_cast<std::size_t>(layers), {});
    grads->biases.assign(static_cast<std::size_t>(layers), {});
    Eigen::MatrixXd delta = (2.0 / static_cast<double>(b)) * diff;
    for (int l = layers - 1; l >= 0; --l) {
      const auto ul = static_cast<std::size_t>(l);
      if (l + 1 < layers) {
        // activations[l + 1] holds tanh outputs of this layer
        delta = delta.cwiseProduct(
            (1.0 - acts[ul + 1].array().square()).matrix());
      }
      grads->weights[ul] = delta * acts[ul].transpose();
      grads->biases[ul] = delta.rowwise().sum();
      if (l > 0) delta = model.weights[ul].transpose() * delta;
    }
  }
  return loss;
}

CfmTrainer::CfmTrainer(MlpField model, GmmTarget target, double learning_rate,
                       Rng rng)
    : model_(std::move(model)),
      target_(std::move(target)),
      lr_(learning_rate),
      rng_(rng) {
  model_.check();
  target_.validate();
  if (model_.dim() != target_.dim() || model_.waypoints() != target_.waypoints())
    throw ValidationError("model and target shapes disagree");
  if (!(lr_ > 0.0)) throw ValidationError("learning rate must be > 0");
  for (int l = 0; l < model_.layer_count(); ++l) {
    const auto ul = static_cast<std::size_t>(l);
    m_w_.push_back(Eigen::MatrixXd::Zero(model_.weights[ul].rows(),
                                         model_.weights[ul].cols()));
    v_w_.push_back(m_w_.back());
    m_b_.push_back(Eigen::VectorXd::Zero(model_.biases[ul].size()));
    v_b_.push_back(m_b_.back());
  }
}

CfmBatch CfmTrainer::sample_batch(int batch_size) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  const int n = model_.output_size();
  CfmBatch batch;
  batch.ts.resize(static_cast<std::size_t>(batch_size));
  batch.tau0.resize(n, batch_size);
  batch.tau1.resize(n, batch_size);
  for (int i = 0; i < batch_size; ++i) {
    batch.ts[static_cast<std::size_t>(i)] = rng_.uniform();
    for (int j = 0; j < n; ++j) batch.tau0(j, i) = rng_.normal();
    batch.tau1.col(i) = target_.sample(rng_).flatten();
  }
  return batch;
}

double CfmTrainer::train_step(int batch_size) {
  const CfmBatch batch = sample_batch(batch_size);
  CfmGradients grads;
  const double loss = cfm_loss(model_, batch, &grads);
  if (!std::isfinite(loss))
    throw DivergenceError("non-finite training loss; step aborted");
  for (const auto& g : grads.weights)
    if (!g.allFinite())
      throw DivergenceError("non-finite gradient; step aborted");
  for (const auto& g : grads.biases)
    if (!g.allFinite())
      throw DivergenceError("non-finite gradient; step aborted");

  ++step_;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (int l = 0; l < model_.layer_count(); ++l) {
    const auto ul = static_cast<std::size_t>(l);
    m_w_[ul] = b1 * m_w_[ul] + (1.0 - b1) * grads.weights[ul];
    v_w_[ul] = b2 * v_w_[ul].array().matrix() +
               (1.0 - b2) * grads.weights[ul].array().square().matrix();
    model_.weights[ul].array() -=
        lr_ * (m_w_[ul].array() / c1) / ((v_w_[ul].array() / c2).sqrt() + eps);
    m_b_[ul] = b1 * m_b_[ul] + (1.0 - b1) * grads.biases[ul];
    v_b_[ul] = b2 * v_b_[ul].array().matrix() +
               (1.0 - b2) * grads.biases[ul].array().square().matrix();
    model_.biases[ul].array() -=
        lr_ * (m_b_[ul].array() / c1) / ((v_b_[ul].array() / c2).sqrt() + eps);
  }
  model_.check();
  return loss;
}

}  // namespace flowplan
