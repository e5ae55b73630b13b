#ifndef FLOWPLAN_MLP_HPP
#define FLOWPLAN_MLP_HPP

#include <Eigen/Core>
#include <vector>

#include "flowplan/fields.hpp"
#include "flowplan/path.hpp"
#include "flowplan/rng.hpp"

namespace flowplan {

// Fully connected tanh network over [flattened tau ; t], linear output head
// reshaped back to a waypoint matrix. widths[0] == d*(H+1) + 1 and
// widths.back() == d*(H+1).
class MlpField final : public VectorField {
 public:
  MlpField() = default;

  // hidden may be empty, giving a single linear layer
  static MlpField create(int dim, int waypoints, const std::vector<int>& hidden,
                         Rng& rng);

  int dim() const override { return dim_; }
  int waypoints() const override { return waypoints_; }

  Eigen::MatrixXd eval(const Eigen::MatrixXd& tau, double t) const override;

  // batched forward over columns; keeps layer activations when out != nullptr
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input,
                          std::vector<Eigen::MatrixXd>* activations = nullptr) const;

  int input_size() const { return widths.empty() ? 0 : widths.front(); }
  int output_size() const { return widths.empty() ? 0 : widths.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  long parameter_count() const;
  void check() const;

  std::vector<int> widths;
  std::vector<Eigen::MatrixXd> weights;  // [l]: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;
  std::string activation = "tanh";
  int dim_ = 0;
  int waypoints_ = 0;
};

// One training batch: column b holds sample b, flattened waypoint-major.
struct CfmBatch {
  std::vector<double> ts;
  Eigen::MatrixXd tau0;
  Eigen::MatrixXd tau1;

  int size() const { return static_cast<int>(ts.size()); }
};

struct CfmGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  double norm() const;
};

// mean squared regression error of the network against the straight-line
// displacement tau1 - tau0, evaluated at tau_t = (1-t) tau0 + t tau1
double cfm_loss(const MlpField& model, const CfmBatch& batch,
                CfmGradients* grads = nullptr);

// Adam on the CFM objective with batches drawn from the mixture target.
class CfmTrainer {
 public:
  CfmTrainer(MlpField model, GmmTarget target, double learning_rate, Rng rng);

  CfmBatch sample_batch(int batch_size);

  // one Adam update; returns the loss before the update. A non-finite loss
  // or gradient aborts the step and leaves the model untouched.
  double train_step(int batch_size);

  const MlpField& model() const { return model_; }
  MlpField& model() { return model_; }
  const GmmTarget& target() const { return target_; }
  Rng& rng() { return rng_; }
  long steps_done() const { return step_; }
  double learning_rate() const { return lr_; }

 private:
  MlpField model_;
  GmmTarget target_;
  double lr_;
  Rng rng_;
  long step_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

inline double cfm_train_step(CfmTrainer& trainer, int batch_size) {
  return trainer.train_step(batch_size);
}

}  // namespace flowplan

#endif  // FLOWPLAN_MLP_HPP
