#pragma once

#include <functional>
#include <vector>

#include "monsoon/tensor.hpp"

namespace monsoon {

class Tape;

// Handle to a node on a tape. Cheap to copy; only valid for the lifetime of
// the tape that produced it.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode autodiff tape. Nodes are appended in execution order, which
// is by construction a topological order; backward() walks them once in
// reverse. Every forward result is checked for non-finite values and aborts
// the step instead of propagating NaN/Inf.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value);

  const Tensor& value(Var v) const;
  // Gradient of the last backward() target w.r.t. v; zero tensor if v was
  // not on the path to the loss.
  const Tensor& grad(Var v);

  std::size_t node_count() const { return nodes_.size(); }

  void backward(Var loss);

  // --- elementwise and scalar ---
  Var add(Var a, Var b);  // same shape, or shape(b) a suffix of shape(a)
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var smul(Var a, double c);
  Var sadd(Var a, double c);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);

  // --- shape ---
  Var reshape(Var a, std::vector<int> shape);
  Var permute(Var a, std::vector<int> axes);
  Var concat(const std::vector<Var>& parts, int axis);
  Var slice(Var a, int axis, int start, int len);

  // --- reductions ---
  Var sum_axis(Var a, int axis);
  Var mean_axis(Var a, int axis);

  // --- linear algebra ---
  Var matmul(Var a, Var b);  // (m,k) x (k,n)
  Var bmm(Var a, Var b);     // (B,m,k) x (B,k,n)

  // --- neural net ---
  Var softmax(Var a, int axis);
  // normalizes the last axis; gamma/beta are rank-1 of that length
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  // inverted dropout: mask entries in {0,1}, output = x * mask / (1 - rate)
  Var dropout(Var x, const Tensor& keep_mask, double rate);
  // valid 1-d convolution over time: x (B,T,Cin), kernel (K,Cin,Cout)
  Var conv1d(Var x, Var kernel);
  // mean squared error over all elements -> scalar
  Var mse_loss(Var pred, Var target);

 private:
  struct Node {
    Tensor value;
    // Accumulates parent gradients given this node's gradient. Null for leaves.
    std::function<void(Tape&, const Tensor&)> backprop;
  };

  Var push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop, const char* op);
  void accumulate(int id, const Tensor& g);
  void accumulate_move(int id, Tensor&& g);
  const Tensor& node_value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  void check_var(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  Tensor zero_;  // reused for off-path grad queries
};

}  // namespace monsoon
