#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace binmt::ad {

using Matrix = Eigen::MatrixXd;

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Matrix val;
  Matrix grad;  // allocated lazily on first accumulation
  bool requires_grad = false;
  std::function<void(Node&)> backward_fn;  // pulls this node's grad into parents
  std::vector<Var> parents;

  void accum_grad(const Matrix& g) {
    if (grad.size() == 0) grad = Matrix::Zero(val.rows(), val.cols());
    grad += g;
  }
};

// Records every created node in creation order; backward() walks the tape in
// reverse. One graph per forward pass.
class Graph {
 public:
  Var leaf(Matrix value, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->val = std::move(value);
    n->requires_grad = requires_grad;
    tape_.push_back(n);
    return n;
  }

  Var make(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward) {
    auto n = std::make_shared<Node>();
    n->val = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
      if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) n->backward_fn = std::move(backward);
    tape_.push_back(n);
    return n;
  }

  void backward(const Var& loss) {
    loss->grad = Matrix::Ones(loss->val.rows(), loss->val.cols());
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      Node& n = **it;
      if (n.requires_grad && n.backward_fn && n.grad.size() != 0) n.backward_fn(n);
    }
  }

  std::size_t size() const { return tape_.size(); }

 private:
  std::vector<Var> tape_;
};

Var matmul(Graph& g, const Var& a, const Var& b);
Var matmul_nt(Graph& g, const Var& a, const Var& b);  // a * b^T
Var slice_cols(Graph& g, const Var& a, Eigen::Index start, Eigen::Index n);
Var add(Graph& g, const Var& a, const Var& b);            // same shape
Var add_rowwise(Graph& g, const Var& a, const Var& bias);  // bias is 1 x n
Var sub(Graph& g, const Var& a, const Var& b);
Var cmul(Graph& g, const Var& a, const Var& b);
Var scale(Graph& g, const Var& a, double s);
Var tanh_v(Graph& g, const Var& a);
Var sigmoid_v(Graph& g, const Var& a);
Var concat_cols(Graph& g, const std::vector<Var>& parts);
// Picks rows `ids` of `table` (embedding lookup); backward scatter-adds.
Var gather_rows(Graph& g, const Var& table, const std::vector<int>& ids);
// Row-wise softmax of (a + mask); mask entries of -inf disable positions.
Var softmax_rows(Graph& g, const Var& a, const Matrix* additive_mask = nullptr);
Var log_v(Graph& g, const Var& a);
// Row-wise layer normalization with gain/bias (both 1 x n).
Var layer_norm_rows(Graph& g, const Var& a, const Var& gain, const Var& bias, double eps = 1e-6);
// Sum over rows b of weights(b,j) * parts[j]->val.row(b): attention context.
Var weighted_context(Graph& g, const Var& weights, const std::vector<Var>& parts);
// Masked cross entropy: -sum_b mask(b) * log softmax(logits)(b, target[b]), a 1x1 node.
Var softmax_xent(Graph& g, const Var& logits, const std::vector<int>& targets,
                 const Eigen::VectorXd& mask);
Var sum_all(Graph& g, const Var& a);

}  // namespace binmt::ad
