#include "dpdp/gru.hpp"

namespace dpdp {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

}  // namespace

GruLayerParams GruLayerParams::zeros(Eigen::Index input_dim,
                                     Eigen::Index hidden_dim) {
  GruLayerParams p;
  p.wz = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
  p.wr = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
  p.wn = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
  p.uz = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
  p.ur = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
  p.un = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
  p.bz = Eigen::MatrixXd::Zero(1, hidden_dim);
  p.br = Eigen::MatrixXd::Zero(1, hidden_dim);
  p.bn = Eigen::MatrixXd::Zero(1, hidden_dim);
  return p;
}

Eigen::MatrixXd gruStep(const GruLayerParams& p, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& h_prev, GruStepCache* cache) {
  const Eigen::MatrixXd z = sigmoid(
      ((x * p.wz.transpose() + h_prev * p.uz.transpose()).rowwise() + p.bz.row(0)));
  const Eigen::MatrixXd r = sigmoid(
      ((x * p.wr.transpose() + h_prev * p.ur.transpose()).rowwise() + p.br.row(0)));
  const Eigen::MatrixXd rh = (r.array() * h_prev.array()).matrix();
  const Eigen::MatrixXd c =
      ((x * p.wn.transpose() + rh * p.un.transpose()).rowwise() + p.bn.row(0))
          .array()
          .tanh()
          .matrix();
  Eigen::MatrixXd h =
      ((1.0 - z.array()) * h_prev.array() + z.array() * c.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = z;
    cache->r = r;
    cache->c = c;
    cache->rh = rh;
  }
  return h;
}

void gruStepBackward(const GruLayerParams& p, const GruStepCache& cache,
                     const Eigen::MatrixXd& d_h, GruLayerParams& grad,
                     Eigen::MatrixXd& d_x, Eigen::MatrixXd& d_h_prev) {
  const auto& z = cache.z.array();
  const auto& r = cache.r.array();
  const auto& c = cache.c.array();

  const Eigen::MatrixXd d_c = (d_h.array() * z).matrix();
  const Eigen::MatrixXd d_z =
      (d_h.array() * (c - cache.h_prev.array())).matrix();
  d_h_prev = (d_h.array() * (1.0 - z)).matrix();

  const Eigen::MatrixXd d_an = (d_c.array() * (1.0 - c * c)).matrix();
  const Eigen::MatrixXd d_rh = d_an * p.un;
  const Eigen::MatrixXd d_r = (d_rh.array() * cache.h_prev.array()).matrix();
  d_h_prev.array() += d_rh.array() * r;

  const Eigen::MatrixXd d_az = (d_z.array() * z * (1.0 - z)).matrix();
  const Eigen::MatrixXd d_ar = (d_r.array() * r * (1.0 - r)).matrix();

  d_x = d_an * p.wn + d_az * p.wz + d_ar * p.wr;
  d_h_prev += d_az * p.uz + d_ar * p.ur;

  grad.wn += d_an.transpose() * cache.x;
  grad.un += d_an.transpose() * cache.rh;
  grad.bn.row(0) += d_an.colwise().sum();
  grad.wz += d_az.transpose() * cache.x;
  grad.uz += d_az.transpose() * cache.h_prev;
  grad.bz.row(0) += d_az.colwise().sum();
  grad.wr += d_ar.transpose() * cache.x;
  grad.ur += d_ar.transpose() * cache.h_prev;
  grad.br.row(0) += d_ar.colwise().sum();
}

}  // namespace dpdp
