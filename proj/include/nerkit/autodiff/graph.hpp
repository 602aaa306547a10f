#pragma once

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <span>
#include <vector>

#include "nerkit/autodiff/tensor.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::ad {

enum class OpKind {
  Matmul,
  Linear,
  Add,
  Sub,
  Mul,
  Scale,
  Sigmoid,
  Tanh,
  Exp,
  Log,
  Gelu,
  AddBroadcast,
  Concat,
  Slice,
  Stack,
  Row,
  GatherRows,
  Transpose,
  LogSumExp,
  Softmax,
  LayerNorm,
  Dropout,
  Sum,
  SumSquares,
  Pick,
};

const char* op_name(OpKind kind);

// Tape of recorded operations for one forward pass. Nodes are appended in
// execution order, so every node's parents precede it. A graph built with
// record=false computes values only (inference).
//
// Gradients accumulate (+=) into every tensor with requires_grad; callers
// zero parameter gradients between optimizer steps.
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }
  OpKind kind(std::size_t node) const { return nodes_.at(node).kind; }
  std::span<const std::size_t> parents(std::size_t node) const { return nodes_.at(node).parent_ids; }

  // a{m,k} * b{k,n} -> {m,n};  a{m,k} * b{k} -> {m}
  Tensor matmul(const Tensor& a, const Tensor& b);
  // x{k} -> W x + b {m};  x{n,k} -> x W^T + b {n,m}. W is {m,k}; bias may be undefined.
  Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double factor);

  Tensor sigmoid(const Tensor& x);
  Tensor tanh(const Tensor& x);
  Tensor exp(const Tensor& x);
  Tensor log(const Tensor& x);
  Tensor gelu(const Tensor& x);

  // m{r,c} plus v broadcast along `axis`: axis 0 adds v[i] to row i (v has r
  // entries), axis 1 adds v to every row (v has c entries).
  Tensor add_broadcast(const Tensor& m, const Tensor& v, std::size_t axis);

  Tensor concat(std::span<const Tensor> parts, std::size_t axis = 0);
  Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis = 0) {
    std::vector<Tensor> v(parts);
    return concat(v, axis);
  }
  Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
  // Vectors of equal length -> {n,d}.
  Tensor stack(std::span<const Tensor> rows);
  Tensor row(const Tensor& m, std::size_t index);
  Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids);
  Tensor lookup(const Tensor& table, std::size_t id);
  Tensor transpose(const Tensor& m);

  // Rank 1 -> {1}. Rank 2: axis 0 reduces rows -> {c}, axis 1 reduces columns -> {r}.
  // -inf entries are treated as absent; an all -inf slice yields -inf.
  Tensor log_sum_exp(const Tensor& x, std::size_t axis = 0);
  // Normalizes along the last axis.
  Tensor softmax(const Tensor& x);
  // Row-wise normalization of x{n,d} with affine gain/shift of length d.
  Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps = 1e-5);

  // Inverted dropout; identity when not training or p == 0.
  Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

  Tensor sum(const Tensor& x);
  Tensor sum_squares(const Tensor& x);
  // Selects entries by flat index -> {k}.
  Tensor pick(const Tensor& x, std::span<const std::size_t> flat_indices);

  // Accumulates d(root)/d(t) into every requires_grad tensor reachable from
  // root. Intermediate gradients are reset first, so calling backward twice
  // on one graph adds the two gradients at the leaves.
  void backward(const Tensor& root);

 private:
  using Backward = std::function<void()>;
  struct Node {
    OpKind kind;
    std::vector<std::size_t> parent_ids;
    Tensor output;
    Backward backward;
  };

  bool needs_grad(std::initializer_list<const Tensor*> parents) const;
  bool needs_grad(std::span<const Tensor> parents) const;
  Tensor make(Shape shape, bool requires_grad) const;
  void record(OpKind kind, std::vector<Tensor> parents, const Tensor& output, Backward backward);
  std::size_t node_of(const Tensor& t) const;

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const void*, std::size_t> index_;
};

}  // namespace nerkit::ad
