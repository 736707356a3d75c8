#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace propdet {

// mt19937_64 with an explicit bits-to-double mapping so draws are identical
// across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }
  bool bernoulli(double p) { return uniform01() < p; }
  std::size_t index(std::size_t n) {
    const auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// One parameter block with its gradient and Adam moments.
struct Param {
  Eigen::MatrixXd value, grad, m, v;

  void init_uniform(int rows, int cols, double limit, Rng& rng);
  void init_zero(int rows, int cols);
  void zero_grad() { grad.setZero(); }
};

double glorot_limit(int fan_in, int fan_out);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const std::vector<Param*>& params);
  long step_count() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

struct LstmParams {
  Param w;  // 4H x (input + H); gate rows ordered input, forget, cell, output
  Param b;  // 4H x 1; forget-gate rows start at 1
  int input = 0;
  int hidden = 0;

  void init(int input_dim, int hidden_dim, Rng& rng);
  std::vector<Param*> params() { return {&w, &b}; }
};

// Forward cache for one sequence; every matrix is T x H (x is T x input).
// States are stored at their original row regardless of direction, so
// h.row(t) is the state after the cell consumed x.row(t).
struct LstmTrace {
  bool reverse = false;
  Eigen::MatrixXd x;
  Eigen::MatrixXd i, f, g, o, c, tc, h;
};

LstmTrace lstm_forward(const LstmParams& p, const Eigen::MatrixXd& x,
                       bool reverse);

// dh is the T x H upstream gradient w.r.t. the stored hidden states.
// Accumulates into p's grads; writes d(loss)/dx when dx is non-null.
void lstm_backward(LstmParams& p, const LstmTrace& trace,
                   const Eigen::MatrixXd& dh, Eigen::MatrixXd* dx = nullptr);

double sigmoid(double z);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
// First maximum wins, so equal scores resolve to the lowest index.
int argmax(const Eigen::VectorXd& scores);

// Inverted-dropout mask: entries are 1/(1-rate) with probability 1-rate,
// else 0. rate == 0 yields all ones.
Eigen::VectorXd dropout_mask(int size, double rate, Rng& rng);

}  // namespace propdet
