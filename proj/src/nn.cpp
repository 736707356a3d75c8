#include "propdet/nn.hpp"

#include <cmath>

namespace propdet {

void Param::init_uniform(int rows, int cols, double limit, Rng& rng) {
  value.resize(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      value(r, c) = rng.uniform(-limit, limit);
    }
  }
  grad = Eigen::MatrixXd::Zero(rows, cols);
  m = Eigen::MatrixXd::Zero(rows, cols);
  v = Eigen::MatrixXd::Zero(rows, cols);
}

void Param::init_zero(int rows, int cols) {
  value = Eigen::MatrixXd::Zero(rows, cols);
  grad = value;
  m = value;
  v = value;
}

double glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void AdamOptimizer::step(const std::vector<Param*>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Param* p : params) {
    p->m = beta1_ * p->m + (1.0 - beta1_) * p->grad;
    p->v.array() =
        beta2_ * p->v.array() + (1.0 - beta2_) * p->grad.array().square();
    p->value.array() -=
        lr_ * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + eps_);
  }
}

void LstmParams::init(int input_dim, int hidden_dim, Rng& rng) {
  input = input_dim;
  hidden = hidden_dim;
  const double limit = glorot_limit(input_dim + hidden_dim, 4 * hidden_dim);
  w.init_uniform(4 * hidden_dim, input_dim + hidden_dim, limit, rng);
  b.init_zero(4 * hidden_dim, 1);
  b.value.block(hidden_dim, 0, hidden_dim, 1).setOnes();  // forget bias
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

Eigen::ArrayXd sigmoid_arr(const Eigen::ArrayXd& z) {
  return 1.0 / (1.0 + (-z).exp());
}

}  // namespace

LstmTrace lstm_forward(const LstmParams& p, const Eigen::MatrixXd& x,
                       bool reverse) {
  const int T = static_cast<int>(x.rows());
  const int E = p.input;
  const int H = p.hidden;
  LstmTrace tr;
  tr.reverse = reverse;
  tr.x = x;
  tr.i.resize(T, H); tr.f.resize(T, H); tr.g.resize(T, H); tr.o.resize(T, H);
  tr.c.resize(T, H); tr.tc.resize(T, H); tr.h.resize(T, H);

  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(H);
  for (int s = 0; s < T; ++s) {
    const int t = reverse ? T - 1 - s : s;
    const Eigen::VectorXd z = p.w.value.leftCols(E) * x.row(t).transpose() +
                              p.w.value.rightCols(H) * h_prev + p.b.value;
    const Eigen::ArrayXd iv = sigmoid_arr(z.segment(0, H).array());
    const Eigen::ArrayXd fv = sigmoid_arr(z.segment(H, H).array());
    const Eigen::ArrayXd gv = z.segment(2 * H, H).array().tanh();
    const Eigen::ArrayXd ov = sigmoid_arr(z.segment(3 * H, H).array());
    const Eigen::ArrayXd cv = fv * c_prev.array() + iv * gv;
    const Eigen::ArrayXd tcv = cv.tanh();
    const Eigen::ArrayXd hv = ov * tcv;
    tr.i.row(t) = iv.transpose();
    tr.f.row(t) = fv.transpose();
    tr.g.row(t) = gv.transpose();
    tr.o.row(t) = ov.transpose();
    tr.c.row(t) = cv.transpose();
    tr.tc.row(t) = tcv.transpose();
    tr.h.row(t) = hv.transpose();
    h_prev = hv.matrix();
    c_prev = cv.matrix();
  }
  return tr;
}

void lstm_backward(LstmParams& p, const LstmTrace& tr,
                   const Eigen::MatrixXd& dh_in, Eigen::MatrixXd* dx) {
  const int T = static_cast<int>(tr.x.rows());
  const int E = p.input;
  const int H = p.hidden;
  if (dx) dx->setZero(T, E);

  Eigen::ArrayXd dh_next = Eigen::ArrayXd::Zero(H);
  Eigen::ArrayXd dc_next = Eigen::ArrayXd::Zero(H);
  for (int s = T - 1; s >= 0; --s) {
    const int t = tr.reverse ? T - 1 - s : s;
    const int t_prev = tr.reverse ? t + 1 : t - 1;
    const bool has_prev = s > 0;
    const Eigen::ArrayXd c_prev =
        has_prev ? Eigen::ArrayXd(tr.c.row(t_prev).transpose().array())
                 : Eigen::ArrayXd::Zero(H);
    const Eigen::VectorXd h_prev =
        has_prev ? Eigen::VectorXd(tr.h.row(t_prev).transpose())
                 : Eigen::VectorXd::Zero(H);

    const Eigen::ArrayXd iv = tr.i.row(t).transpose().array();
    const Eigen::ArrayXd fv = tr.f.row(t).transpose().array();
    const Eigen::ArrayXd gv = tr.g.row(t).transpose().array();
    const Eigen::ArrayXd ov = tr.o.row(t).transpose().array();
    const Eigen::ArrayXd tcv = tr.tc.row(t).transpose().array();

    const Eigen::ArrayXd dh = dh_in.row(t).transpose().array() + dh_next;
    const Eigen::ArrayXd dc = dc_next + dh * ov * (1.0 - tcv.square());
    const Eigen::ArrayXd dzo = dh * tcv * ov * (1.0 - ov);
    const Eigen::ArrayXd dzi = dc * gv * iv * (1.0 - iv);
    const Eigen::ArrayXd dzg = dc * iv * (1.0 - gv.square());
    const Eigen::ArrayXd dzf = dc * c_prev * fv * (1.0 - fv);

    Eigen::VectorXd dz(4 * H);
    dz.segment(0, H) = dzi.matrix();
    dz.segment(H, H) = dzf.matrix();
    dz.segment(2 * H, H) = dzg.matrix();
    dz.segment(3 * H, H) = dzo.matrix();

    p.w.grad.leftCols(E).noalias() += dz * tr.x.row(t);
    p.w.grad.rightCols(H).noalias() += dz * h_prev.transpose();
    p.b.grad += dz;

    const Eigen::VectorXd dxh = p.w.value.transpose() * dz;
    if (dx) dx->row(t) += dxh.head(E).transpose();
    dh_next = dxh.tail(H).array();
    dc_next = dc * fv;
  }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  const Eigen::ArrayXd e = shifted.exp();
  return (e / e.sum()).matrix();
}

int argmax(const Eigen::VectorXd& scores) {
  int best = 0;
  for (int k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

Eigen::VectorXd dropout_mask(int size, double rate, Rng& rng) {
  if (rate <= 0) return Eigen::VectorXd::Ones(size);
  const double keep = 1.0 - rate;
  Eigen::VectorXd mask(size);
  for (int k = 0; k < size; ++k) {
    mask[k] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  return mask;
}

}  // namespace propdet
