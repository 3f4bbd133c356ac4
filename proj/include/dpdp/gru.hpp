#pragma once

#include <Eigen/Core>

namespace dpdp {

// One gated recurrent layer.  Weights are (out x in) and applied to
// row-major batches as X * W^T; biases are stored 1 x hidden.
struct GruLayerParams {
  Eigen::MatrixXd wz, wr, wn;  // hidden x input
  Eigen::MatrixXd uz, ur, un;  // hidden x hidden
  Eigen::MatrixXd bz, br, bn;  // 1 x hidden

  Eigen::Index inputDim() const { return wz.cols(); }
  Eigen::Index hiddenDim() const { return wz.rows(); }

  static GruLayerParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim);
};

// Values saved by the forward step that the backward step needs.
struct GruStepCache {
  Eigen::MatrixXd x, h_prev, z, r, c, rh;
};

// Batched step over n rows:
//   z = sigmoid(x wz^T + h uz^T + bz)
//   r = sigmoid(x wr^T + h ur^T + br)
//   c = tanh(x wn^T + (r . h) un^T + bn)
//   h' = (1 - z) . h + z . c
Eigen::MatrixXd gruStep(const GruLayerParams& p, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& h_prev,
                        GruStepCache* cache = nullptr);

// Reverse-mode step: given d_h (gradient w.r.t. the step output), accumulates
// parameter gradients into grad and writes gradients w.r.t. the step inputs.
void gruStepBackward(const GruLayerParams& p, const GruStepCache& cache,
                     const Eigen::MatrixXd& d_h, GruLayerParams& grad,
                     Eigen::MatrixXd& d_x, Eigen::MatrixXd& d_h_prev);

}  // namespace dpdp
