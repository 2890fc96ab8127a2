#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <random>
#include <vector>

namespace explore::gnn {

/// Symmetric normalized weighted adjacency with self loops,
/// A_hat = D^{-1/2} (A_w + I) D^{-1/2}. Rows keep explicit neighbor lists so
/// products can accumulate in a canonical order (see spmm), which makes GNN
/// forward passes exactly permutation-equivariant.
struct NormalizedAdjacency {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;  // (col, coeff)
};

/// Reverse-mode tape over Eigen matrices. Nodes are appended in evaluation
/// order; backward() walks them once in reverse. Scalars are 1x1 matrices.
class Tape {
 public:
  using Matrix = Eigen::MatrixXd;
  using BackwardFn = std::function<void(Tape&, int)>;

  int push(Matrix value, BackwardFn back = nullptr);
  int leaf(Matrix value) { return push(std::move(value)); }

  const Matrix& value(int id) const { return nodes_[id].value; }
  bool has_grad(int id) const { return grads_[id].size() > 0; }
  const Matrix& grad(int id) const;
  void accumulate(int id, const Matrix& g);

  /// Seed d(root)/d(root) = 1 and propagate. `root` must be a scalar node.
  void backward(int root);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix value;
    BackwardFn back;
  };
  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
};

// ---- differentiable ops ---------------------------------------------------

int matmul(Tape& t, int a, int b);
int add(Tape& t, int a, int b);
int sub(Tape& t, int a, int b);
int cmul(Tape& t, int a, int b);  // elementwise
int scale(Tape& t, int a, double s);
int add_rowvec(Tape& t, int x, int bias);  // bias is 1 x d, broadcast over rows
int relu(Tape& t, int a);
int sigmoid(Tape& t, int a);
int tanh_op(Tape& t, int a);
int square(Tape& t, int a);
int sum_all(Tape& t, int a);              // 1x1
int entry(Tape& t, int a, int r, int c);  // 1x1 view of one element
int gather_rows(Tape& t, int a, std::vector<int> rows);
int max_col(Tape& t, int a);        // column vector -> 1x1, argmax subgradient
int log_softmax_col(Tape& t, int a);  // column vector -> column vector
int exp_op(Tape& t, int a);

/// y = A_hat x with canonically ordered row accumulation: neighbors are
/// summed sorted by (coefficient, lexicographic source row), so permuting
/// node order permutes the output rows bit-exactly. `adj` is captured by
/// reference and must outlive any backward() pass through this node.
int spmm(Tape& t, const NormalizedAdjacency& adj, int x);

/// Inverted dropout. In training mode each entry is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate); otherwise identity.
int dropout_op(Tape& t, int a, double rate, bool training, std::mt19937_64* rng);

/// Tensor-level dropout used outside the tape.
Eigen::MatrixXd dropout(const Eigen::MatrixXd& x, double rate, bool training,
                        std::mt19937_64& rng);

}  // namespace explore::gnn
