#include "explore/gnn/autodiff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace explore::gnn {

int Tape::push(Matrix value, BackwardFn back) {
#ifndef NDEBUG
  assert(value.allFinite() && "tape op produced non-finite values");
#endif
  nodes_.push_back({std::move(value), std::move(back)});
  grads_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

const Tape::Matrix& Tape::grad(int id) const {
  static const Matrix empty;
  return grads_[id].size() > 0 ? grads_[id] : empty;
}

void Tape::accumulate(int id, const Matrix& g) {
  if (grads_[id].size() == 0) {
    grads_[id] = Matrix::Zero(nodes_[id].value.rows(), nodes_[id].value.cols());
  }
  grads_[id] += g;
}

void Tape::backward(int root) {
  if (nodes_[root].value.size() != 1) {
    throw std::invalid_argument("Tape::backward: root must be scalar");
  }
  for (auto& g : grads_) g.resize(0, 0);
  accumulate(root, Matrix::Ones(1, 1));
  for (int id = root; id >= 0; --id) {
    if (grads_[id].size() > 0 && nodes_[id].back) {
      nodes_[id].back(*this, id);
    }
  }
}

int matmul(Tape& t, int a, int b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  if (A.cols() != B.rows()) throw std::invalid_argument("matmul: shape mismatch");
  return t.push(A * B, [a, b](Tape& t, int self) {
    const auto& g = t.grad(self);
    t.accumulate(a, g * t.value(b).transpose());
    t.accumulate(b, t.value(a).transpose() * g);
  });
}

int add(Tape& t, int a, int b) {
  return t.push(t.value(a) + t.value(b), [a, b](Tape& t, int self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, t.grad(self));
  });
}

int sub(Tape& t, int a, int b) {
  return t.push(t.value(a) - t.value(b), [a, b](Tape& t, int self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, -t.grad(self));
  });
}

int cmul(Tape& t, int a, int b) {
  return t.push(t.value(a).cwiseProduct(t.value(b)), [a, b](Tape& t, int self) {
    const auto& g = t.grad(self);
    t.accumulate(a, g.cwiseProduct(t.value(b)));
    t.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

int scale(Tape& t, int a, double s) {
  return t.push(t.value(a) * s, [a, s](Tape& t, int self) {
    t.accumulate(a, t.grad(self) * s);
  });
}

int add_rowvec(Tape& t, int x, int bias) {
  const auto& X = t.value(x);
  const auto& b = t.value(bias);
  if (b.rows() != 1 || b.cols() != X.cols()) {
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols(x)");
  }
  Eigen::MatrixXd out = X;
  out.rowwise() += b.row(0);
  return t.push(std::move(out), [x, bias](Tape& t, int self) {
    const auto& g = t.grad(self);
    t.accumulate(x, g);
    t.accumulate(bias, g.colwise().sum());
  });
}

int relu(Tape& t, int a) {
  return t.push(t.value(a).cwiseMax(0.0), [a](Tape& t, int self) {
    const Eigen::MatrixXd mask =
        (t.value(a).array() > 0.0).cast<double>().matrix();
    t.accumulate(a, t.grad(self).cwiseProduct(mask));
  });
}

int sigmoid(Tape& t, int a) {
  Eigen::MatrixXd v = (1.0 / (1.0 + (-t.value(a).array()).exp())).matrix();
  return t.push(std::move(v), [a](Tape& t, int self) {
    const auto& y = t.value(self);
    const Eigen::MatrixXd d = (y.array() * (1.0 - y.array())).matrix();
    t.accumulate(a, t.grad(self).cwiseProduct(d));
  });
}

int tanh_op(Tape& t, int a) {
  Eigen::MatrixXd v = t.value(a).array().tanh().matrix();
  return t.push(std::move(v), [a](Tape& t, int self) {
    const auto& y = t.value(self);
    const Eigen::MatrixXd d = (1.0 - y.array().square()).matrix();
    t.accumulate(a, t.grad(self).cwiseProduct(d));
  });
}

int square(Tape& t, int a) { return cmul(t, a, a); }

int sum_all(Tape& t, int a) {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = t.value(a).sum();
  return t.push(std::move(v), [a](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    t.accumulate(a, Eigen::MatrixXd::Constant(t.value(a).rows(),
                                              t.value(a).cols(), g));
  });
}

int entry(Tape& t, int a, int r, int c) {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = t.value(a)(r, c);
  return t.push(std::move(v), [a, r, c](Tape& t, int self) {
    Eigen::MatrixXd g =
        Eigen::MatrixXd::Zero(t.value(a).rows(), t.value(a).cols());
    g(r, c) = t.grad(self)(0, 0);
    t.accumulate(a, g);
  });
}

int gather_rows(Tape& t, int a, std::vector<int> rows) {
  const auto& A = t.value(a);
  Eigen::MatrixXd v(static_cast<int>(rows.size()), A.cols());
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    v.row(i) = A.row(rows[i]);
  }
  return t.push(std::move(v), [a, rows = std::move(rows)](Tape& t, int self) {
    Eigen::MatrixXd g =
        Eigen::MatrixXd::Zero(t.value(a).rows(), t.value(a).cols());
    const auto& gs = t.grad(self);
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      g.row(rows[i]) += gs.row(i);
    }
    t.accumulate(a, g);
  });
}

int max_col(Tape& t, int a) {
  const auto& A = t.value(a);
  if (A.cols() != 1 || A.rows() == 0) {
    throw std::invalid_argument("max_col: need non-empty column vector");
  }
  int arg = 0;
  A.col(0).maxCoeff(&arg);
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = A(arg, 0);
  return t.push(std::move(v), [a, arg](Tape& t, int self) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(t.value(a).rows(), 1);
    g(arg, 0) = t.grad(self)(0, 0);
    t.accumulate(a, g);
  });
}

int log_softmax_col(Tape& t, int a) {
  const auto& A = t.value(a);
  if (A.cols() != 1 || A.rows() == 0) {
    throw std::invalid_argument("log_softmax_col: need non-empty column vector");
  }
  const double m = A.col(0).maxCoeff();
  const double lse = m + std::log((A.col(0).array() - m).exp().sum());
  Eigen::MatrixXd v = (A.array() - lse).matrix();
  return t.push(std::move(v), [a](Tape& t, int self) {
    // d logsoftmax: g - softmax * sum(g)
    const auto& g = t.grad(self);
    const Eigen::ArrayXd p = t.value(self).col(0).array().exp();
    const double gsum = g.sum();
    Eigen::MatrixXd out = g - (p * gsum).matrix();
    t.accumulate(a, out);
  });
}

int exp_op(Tape& t, int a) {
  Eigen::MatrixXd v = t.value(a).array().exp().matrix();
  return t.push(std::move(v), [a](Tape& t, int self) {
    t.accumulate(a, t.grad(self).cwiseProduct(t.value(self)));
  });
}

int spmm(Tape& t, const NormalizedAdjacency& adj, int x) {
  const auto& X = t.value(x);
  if (adj.n != X.rows()) throw std::invalid_argument("spmm: shape mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(adj.n, X.cols());

  std::vector<std::pair<int, double>> nbrs;
  for (int i = 0; i < adj.n; ++i) {
    nbrs.assign(adj.rows[i].begin(), adj.rows[i].end());
    // canonical accumulation order: coefficient, then source row content
    std::sort(nbrs.begin(), nbrs.end(),
              [&X](const std::pair<int, double>& l, const std::pair<int, double>& r) {
                if (l.second != r.second) return l.second < r.second;
                for (int c = 0; c < X.cols(); ++c) {
                  if (X(l.first, c) != X(r.first, c)) {
                    return X(l.first, c) < X(r.first, c);
                  }
                }
                return false;
              });
    for (const auto& [j, w] : nbrs) {
      out.row(i) += w * X.row(j);
    }
  }
  return t.push(std::move(out), [&adj, x](Tape& t, int self) {
    const auto& g = t.grad(self);
    Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (int i = 0; i < adj.n; ++i) {
      for (const auto& [j, w] : adj.rows[i]) {
        gx.row(j) += w * g.row(i);  // A_hat is symmetric
      }
    }
    t.accumulate(x, gx);
  });
}

namespace {

Eigen::MatrixXd bernoulli_keep_mask(Eigen::Index rows, Eigen::Index cols,
                                    double rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      mask(i, j) = (u(rng) < rate) ? 0.0 : keep_scale;
    }
  }
  return mask;
}

}  // namespace

int dropout_op(Tape& t, int a, double rate, bool training, std::mt19937_64* rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate in [0,1)");
  if (!training || rate == 0.0) return a;
  if (!rng) throw std::invalid_argument("dropout: training mode needs an rng");
  const auto& A = t.value(a);
  Eigen::MatrixXd mask = bernoulli_keep_mask(A.rows(), A.cols(), rate, *rng);
  // evaluate before the lambda captures the mask: argument order is
  // unspecified and the capture moves it away
  Eigen::MatrixXd out = A.cwiseProduct(mask);
  return t.push(std::move(out), [a, mask = std::move(mask)](Tape& t, int self) {
    t.accumulate(a, t.grad(self).cwiseProduct(mask));
  });
}

Eigen::MatrixXd dropout(const Eigen::MatrixXd& x, double rate, bool training,
                        std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate in [0,1)");
  if (!training || rate == 0.0) return x;
  return x.cwiseProduct(bernoulli_keep_mask(x.rows(), x.cols(), rate, rng));
}

}  // namespace explore::gnn
