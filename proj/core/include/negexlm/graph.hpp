#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "negexlm/rng.hpp"
#include "negexlm/tensor.hpp"

namespace negexlm::num {

/// Named leaf tensor. Only trainable parameters receive gradients.
struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

/// Ordered collection of parameters. Element addresses are stable under
/// insertion, so graphs may hold pointers into the store.
class ParameterStore {
 public:
  Parameter& add(std::string name, Tensor value, bool trainable = true);

  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  const Parameter* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  friend bool operator==(const ParameterStore& a, const ParameterStore& b);

 private:
  std::deque<Parameter> params_;
};

using Gradients = std::map<std::string, Tensor>;

enum class OpKind {
  kInput,
  kParameter,
  kMatMul,
  kMatMulTransposed,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kAddRow,
  kSigmoid,
  kTanh,
  kColBlock,
  kRowBlock,
  kVStack,
  kGatherRows,
  kDropout,
  kLogSoftmax,
  kGather,
  kHinge,
  kLog1mExp,
  kSum,
  kLstmSequence,
};

std::string_view op_name(OpKind kind);

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while the graph lives.
class Var {
 public:
  Var() = default;
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Dynamic computation graph recorded during a forward pass. Nodes are
/// appended in execution order, which is a valid topological order.
/// Build one per batch and discard it after the update.
class Graph {
 public:
  using Backprop = std::function<void(Graph&, std::size_t)>;

  /// With requires_grad false no backward closures are recorded; backward()
  /// then throws.
  explicit Graph(bool requires_grad = true) : requires_grad_(requires_grad) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Matrix value);
  Var input(const Tensor& t) { return input(t.as_matrix()); }

  /// Leaf reading the parameter's storage in place; repeated calls return
  /// the same node.
  Var parameter(Parameter& p);

  /// Registers every trainable parameter so backward() reports a gradient
  /// (possibly zero) for each.
  void register_parameters(ParameterStore& store);

  std::size_t size() const { return nodes_.size(); }
  OpKind kind(Var v) const { return nodes_[v.id()].kind; }
  bool requires_grad() const { return requires_grad_; }

  const Matrix& value(std::size_t id) const;
  /// Gradient accumulator of a node, zero-initialised on first access.
  Matrix& grad(std::size_t id);
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

  /// d loss / d parameter for every registered or reachable trainable parameter.
  Gradients backward(Var loss);

  /// Appends a node. Used by the operation implementations.
  Var emit(OpKind kind, std::vector<std::size_t> inputs, Matrix value, Backprop backprop);

 private:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> inputs;
    Matrix value;
    const Matrix* borrowed = nullptr;
    Parameter* param = nullptr;
    Matrix grad;
    bool has_grad = false;
    Backprop backprop;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  std::vector<Parameter*> registered_;
  bool requires_grad_;
  bool backward_done_ = false;
};

/// One cell of a matrix, optionally routed to an output group.
struct Cell {
  std::size_t row;
  std::size_t col;
};

// Matrix products.
Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);

// Elementwise.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var sigmoid(Var a);
Var tanh(Var a);
/// max(0, a); the subgradient at exactly 0 is 0.
Var hinge(Var a);
/// -log(1 - exp(a)) with exp(a) clamped to at most 1 - 1e-12.
Var log1m_exp(Var a);

/// Adds a 1 x n row vector to every row of a.
Var add_row(Var a, Var row);

// Shape manipulation.
Var col_block(Var a, std::size_t start, std::size_t count);
Var row_block(Var a, std::size_t start, std::size_t count);
Var vstack(std::span<const Var> parts);
/// Rows of table selected by index (embedding lookup).
Var gather_rows(Var table, std::span<const std::size_t> rows);

/// Inverted dropout. Identity when !training or rate == 0.
Var dropout(Var a, double rate, Rng& rng, bool training);

/// Row-wise log-softmax.
Var log_softmax(Var a);

/// Column vector of the selected cells.
Var gather(Var a, std::span<const Cell> cells);
/// Column vector with one entry per group holding the sum of its cells.
Var gather_sum(Var a, std::span<const Cell> cells, std::span<const std::size_t> groups,
               std::size_t num_groups);

/// Sum of all entries as a 1x1 node.
Var sum(Var a);

/// Unrolled LSTM recurrence over a time-major batch. projected holds
/// x_t * W_input + bias for every step, rows t * batch .. t * batch + batch - 1,
/// with gate blocks (input, forget, candidate, output). Returns the hidden
/// states in the same row layout. Initial hidden and cell states are zero.
Var lstm_sequence(Var projected, Var w_hidden, std::size_t batch);

/// Standalone log-softmax of a vector.
std::vector<double> log_softmax(std::span<const double> logits);

/// p <- p - lr * (g + weight_decay * p) for every parameter with a gradient.
void sgd_step(ParameterStore& params, const Gradients& grads, double lr, double weight_decay);

/// Global L2 norm of a gradient set.
double gradient_norm(const Gradients& grads);
/// Rescales grads so their global norm is at most max_norm. Returns the norm before clipping.
double clip_gradients(Gradients& grads, double max_norm);

}  // namespace negexlm::num
