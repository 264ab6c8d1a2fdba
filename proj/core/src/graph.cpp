#include "negexlm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace negexlm::num {

// ---------------------------------------------------------------------------
// ParameterStore

Parameter& ParameterStore::add(std::string name, Tensor value, bool trainable) {
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter name: " + name);
  params_.push_back(Parameter{std::move(name), std::move(value), trainable});
  return params_.back();
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Parameter& ParameterStore::get(std::string_view name) {
  return const_cast<Parameter&>(std::as_const(*this).get(name));
}

const Parameter& ParameterStore::get(std::string_view name) const {
  const Parameter* p = find(name);
  if (p == nullptr) throw std::out_of_range("unknown parameter: " + std::string(name));
  return *p;
}

bool operator==(const ParameterStore& a, const ParameterStore& b) {
  if (a.params_.size() != b.params_.size()) return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i) {
    const auto& x = a.params_[i];
    const auto& y = b.params_[i];
    if (x.name != y.name || x.trainable != y.trainable || !(x.value == y.value)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Graph

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kMatMulTransposed: return "matmul_nt";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kAddRow: return "add_row";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kColBlock: return "col_block";
    case OpKind::kRowBlock: return "row_block";
    case OpKind::kVStack: return "vstack";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kDropout: return "dropout";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kGather: return "gather";
    case OpKind::kHinge: return "hinge";
    case OpKind::kLog1mExp: return "log1m_exp";
    case OpKind::kSum: return "sum";
    case OpKind::kLstmSequence: return "lstm_sequence";
  }
  return "unknown";
}

const Matrix& Var::value() const { return graph_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw std::invalid_argument("node is not a scalar");
  return v(0, 0);
}

Var Graph::input(Matrix value) {
  return emit(OpKind::kInput, {}, std::move(value), nullptr);
}

Var Graph::parameter(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node node{OpKind::kParameter, {}, Matrix(), &p.value.as_matrix(), &p, Matrix(), false, nullptr};
  nodes_.push_back(std::move(node));
  const std::size_t id = nodes_.size() - 1;
  param_nodes_.emplace(&p, id);
  return Var(this, id);
}

void Graph::register_parameters(ParameterStore& store) {
  for (auto& p : store) {
    if (!p.trainable) continue;
    if (std::find(registered_.begin(), registered_.end(), &p) == registered_.end()) {
      registered_.push_back(&p);
    }
  }
}

const Matrix& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.borrowed != nullptr ? *n.borrowed : n.value;
}

Matrix& Graph::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    const Matrix& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

Var Graph::emit(OpKind kind, std::vector<std::size_t> inputs, Matrix value, Backprop backprop) {
  Node node{kind, std::move(inputs), std::move(value), nullptr, nullptr, Matrix(), false,
            requires_grad_ ? std::move(backprop) : Backprop()};
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Gradients Graph::backward(Var loss) {
  if (!requires_grad_) throw std::logic_error("backward on a graph built without gradients");
  if (backward_done_) throw std::logic_error("backward called twice on one graph");
  if (&loss.graph() != this) throw std::invalid_argument("loss belongs to another graph");
  const Matrix& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw std::invalid_argument("loss must be a scalar node, got " + std::to_string(lv.rows()) + "x" +
                                std::to_string(lv.cols()));
  }
  backward_done_ = true;
  grad(loss.id())(0, 0) = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backprop) continue;
    n.backprop(*this, id);
  }

  Gradients out;
  for (Parameter* p : registered_) {
    out.emplace(p->name, Tensor(p->value.shape()));
  }
  for (const auto& [param, id] : param_nodes_) {
    if (!param->trainable) continue;
    Node& n = nodes_[id];
    Tensor g(param->value.shape());
    if (n.has_grad) g.as_matrix() = n.grad;
    out.insert_or_assign(param->name, std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Operations

namespace {

void require_same_graph(Var a, Var b) {
  if (!a.valid() || !b.valid() || &a.graph() != &b.graph()) {
    throw std::invalid_argument("operands belong to different graphs");
  }
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_graph(a, b);
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix v;
  v.noalias() = a.value() * b.value();
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(OpKind::kMatMul, {ia, ib}, std::move(v), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    g.grad(ia).noalias() += dc * g.value(ib).transpose();
    g.grad(ib).noalias() += g.value(ia).transpose() * dc;
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_graph(a, b);
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimensions differ");
  Matrix v;
  v.noalias() = a.value() * b.value().transpose();
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(OpKind::kMatMulTransposed, {ia, ib}, std::move(v),
                        [ia, ib](Graph& g, std::size_t self) {
                          const Matrix& dc = g.grad(self);
                          g.grad(ia).noalias() += dc * g.value(ib);
                          g.grad(ib).noalias() += dc.transpose() * g.value(ia);
                        });
}

Var add(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a, b, "add");
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(OpKind::kAdd, {ia, ib}, a.value() + b.value(), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    g.grad(ia) += dc;
    g.grad(ib) += dc;
  });
}

Var sub(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a, b, "sub");
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(OpKind::kSub, {ia, ib}, a.value() - b.value(), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    g.grad(ia) += dc;
    g.grad(ib) -= dc;
  });
}

Var mul(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a, b, "mul");
  const std::size_t ia = a.id(), ib = b.id();
  Matrix v = a.value().cwiseProduct(b.value());
  return a.graph().emit(OpKind::kMul, {ia, ib}, std::move(v), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    g.grad(ia) += dc.cwiseProduct(g.value(ib));
    g.grad(ib) += dc.cwiseProduct(g.value(ia));
  });
}

Var scale(Var a, double s) {
  const std::size_t ia = a.id();
  return a.graph().emit(OpKind::kScale, {ia}, a.value() * s,
                        [ia, s](Graph& g, std::size_t self) { g.grad(ia) += s * g.grad(self); });
}

Var add_scalar(Var a, double s) {
  const std::size_t ia = a.id();
  Matrix v = a.value().array() + s;
  return a.graph().emit(OpKind::kAddScalar, {ia}, std::move(v),
                        [ia](Graph& g, std::size_t self) { g.grad(ia) += g.grad(self); });
}

Var sigmoid(Var a) {
  const std::size_t ia = a.id();
  Matrix v = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  return a.graph().emit(OpKind::kSigmoid, {ia}, std::move(v), [ia](Graph& g, std::size_t self) {
    const auto y = g.value(self).array();
    g.grad(ia).array() += g.grad(self).array() * y * (1.0 - y);
  });
}

Var tanh(Var a) {
  const std::size_t ia = a.id();
  // 2 * sigmoid(2x) - 1 vectorises where Eigen's tanh does not for doubles.
  Matrix v = (2.0 * (1.0 + (-2.0 * a.value().array()).exp()).inverse() - 1.0).matrix();
  return a.graph().emit(OpKind::kTanh, {ia}, std::move(v), [ia](Graph& g, std::size_t self) {
    const auto y = g.value(self).array();
    g.grad(ia).array() += g.grad(self).array() * (1.0 - y.square());
  });
}

Var hinge(Var a) {
  const std::size_t ia = a.id();
  Matrix v = a.value().cwiseMax(0.0);
  return a.graph().emit(OpKind::kHinge, {ia}, std::move(v), [ia](Graph& g, std::size_t self) {
    const auto x = g.value(ia).array();
    g.grad(ia).array() += (x > 0.0).select(g.grad(self).array(), 0.0);
  });
}

namespace {
constexpr double kMaxProbability = 1.0 - 1e-12;
}

Var log1m_exp(Var a) {
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  Matrix v(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double p = std::min(std::exp(x.data()[i]), kMaxProbability);
    v.data()[i] = -std::log1p(-p);
  }
  return a.graph().emit(OpKind::kLog1mExp, {ia}, std::move(v), [ia](Graph& g, std::size_t self) {
    const Matrix& xs = g.value(ia);
    const Matrix& dc = g.grad(self);
    Matrix& da = g.grad(ia);
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
      const double p = std::exp(xs.data()[i]);
      if (p < kMaxProbability) da.data()[i] += dc.data()[i] * p / (1.0 - p);
    }
  });
}

Var add_row(Var a, Var row) {
  require_same_graph(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: row shape mismatch");
  const std::size_t ia = a.id(), ir = row.id();
  Matrix v = a.value().rowwise() + row.value().row(0);
  return a.graph().emit(OpKind::kAddRow, {ia, ir}, std::move(v), [ia, ir](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    g.grad(ia) += dc;
    g.grad(ir) += dc.colwise().sum();
  });
}

Var col_block(Var a, std::size_t start, std::size_t count) {
  if (start + count > static_cast<std::size_t>(a.cols()) || count == 0) {
    throw std::invalid_argument("col_block out of range");
  }
  const std::size_t ia = a.id();
  const auto s = static_cast<Eigen::Index>(start), c = static_cast<Eigen::Index>(count);
  Matrix v = a.value().middleCols(s, c);
  return a.graph().emit(OpKind::kColBlock, {ia}, std::move(v), [ia, s, c](Graph& g, std::size_t self) {
    g.grad(ia).middleCols(s, c) += g.grad(self);
  });
}

Var row_block(Var a, std::size_t start, std::size_t count) {
  if (start + count > static_cast<std::size_t>(a.rows()) || count == 0) {
    throw std::invalid_argument("row_block out of range");
  }
  const std::size_t ia = a.id();
  const auto s = static_cast<Eigen::Index>(start), c = static_cast<Eigen::Index>(count);
  Matrix v = a.value().middleRows(s, c);
  return a.graph().emit(OpKind::kRowBlock, {ia}, std::move(v), [ia, s, c](Graph& g, std::size_t self) {
    g.grad(ia).middleRows(s, c) += g.grad(self);
  });
}

Var vstack(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("vstack of nothing");
  Graph& graph = parts.front().graph();
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    require_same_graph(parts.front(), p);
    if (p.cols() != cols) throw std::invalid_argument("vstack: column mismatch");
    rows += p.rows();
    ids.push_back(p.id());
  }
  Matrix v(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    v.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<std::size_t> in = ids;
  return graph.emit(OpKind::kVStack, std::move(in), std::move(v), [ids](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    Eigen::Index offset = 0;
    for (std::size_t id : ids) {
      Matrix& d = g.grad(id);
      d += dc.middleRows(offset, d.rows());
      offset += d.rows();
    }
  });
}

Var gather_rows(Var table, std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("gather_rows: no rows selected");
  const Matrix& t = table.value();
  Matrix v(static_cast<Eigen::Index>(rows.size()), t.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(t.rows())) throw std::out_of_range("gather_rows: row out of range");
    v.row(static_cast<Eigen::Index>(i)) = t.row(static_cast<Eigen::Index>(rows[i]));
  }
  const std::size_t it = table.id();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return table.graph().emit(OpKind::kGatherRows, {it}, std::move(v),
                            [it, idx = std::move(idx)](Graph& g, std::size_t self) {
                              const Matrix& dc = g.grad(self);
                              Matrix& dt = g.grad(it);
                              for (std::size_t i = 0; i < idx.size(); ++i) {
                                dt.row(static_cast<Eigen::Index>(idx[i])) += dc.row(static_cast<Eigen::Index>(i));
                              }
                            });
}

Var dropout(Var a, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0) || rate >= 1.0) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  Matrix v = a.value().cwiseProduct(mask);
  const std::size_t ia = a.id();
  return a.graph().emit(OpKind::kDropout, {ia}, std::move(v),
                        [ia, mask = std::move(mask)](Graph& g, std::size_t self) {
                          g.grad(ia) += g.grad(self).cwiseProduct(mask);
                        });
}

Var log_softmax(Var a) {
  if (a.cols() == 0) throw std::invalid_argument("empty distribution");
  const Matrix& x = a.value();
  Matrix v(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    const double lse = m + std::log((x.row(r).array() - m).exp().sum());
    v.row(r) = x.row(r).array() - lse;
  }
  const std::size_t ia = a.id();
  return a.graph().emit(OpKind::kLogSoftmax, {ia}, std::move(v), [ia](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    const Matrix& y = g.value(self);
    Matrix& da = g.grad(ia);
    const Eigen::VectorXd row_sums = dc.rowwise().sum();
    da.array() += dc.array() - y.array().exp().colwise() * row_sums.array();
  });
}

namespace {

void check_cells(const Matrix& m, std::span<const Cell> cells) {
  for (const Cell& c : cells) {
    if (c.row >= static_cast<std::size_t>(m.rows()) || c.col >= static_cast<std::size_t>(m.cols())) {
      throw std::out_of_range("gather: cell out of range");
    }
  }
}

}  // namespace

Var gather(Var a, std::span<const Cell> cells) {
  if (cells.empty()) throw std::invalid_argument("gather: no cells selected");
  const Matrix& x = a.value();
  check_cells(x, cells);
  Matrix v(static_cast<Eigen::Index>(cells.size()), 1);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    v(static_cast<Eigen::Index>(k), 0) = x(static_cast<Eigen::Index>(cells[k].row), static_cast<Eigen::Index>(cells[k].col));
  }
  const std::size_t ia = a.id();
  std::vector<Cell> cs(cells.begin(), cells.end());
  return a.graph().emit(OpKind::kGather, {ia}, std::move(v), [ia, cs = std::move(cs)](Graph& g, std::size_t self) {
    const Matrix& dc = g.grad(self);
    Matrix& da = g.grad(ia);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      da(static_cast<Eigen::Index>(cs[k].row), static_cast<Eigen::Index>(cs[k].col)) += dc(static_cast<Eigen::Index>(k), 0);
    }
  });
}

Var gather_sum(Var a, std::span<const Cell> cells, std::span<const std::size_t> groups, std::size_t num_groups) {
  if (cells.size() != groups.size()) throw std::invalid_argument("gather_sum: one group per cell required");
  if (num_groups == 0) throw std::invalid_argument("gather_sum: no groups");
  const Matrix& x = a.value();
  check_cells(x, cells);
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(num_groups), 1);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (groups[k] >= num_groups) throw std::out_of_range("gather_sum: group out of range");
    v(static_cast<Eigen::Index>(groups[k]), 0) +=
        x(static_cast<Eigen::Index>(cells[k].row), static_cast<Eigen::Index>(cells[k].col));
  }
  const std::size_t ia = a.id();
  std::vector<Cell> cs(cells.begin(), cells.end());
  std::vector<std::size_t> gs(groups.begin(), groups.end());
  return a.graph().emit(OpKind::kGather, {ia}, std::move(v),
                        [ia, cs = std::move(cs), gs = std::move(gs)](Graph& g, std::size_t self) {
                          const Matrix& dc = g.grad(self);
                          Matrix& da = g.grad(ia);
                          for (std::size_t k = 0; k < cs.size(); ++k) {
                            da(static_cast<Eigen::Index>(cs[k].row), static_cast<Eigen::Index>(cs[k].col)) +=
                                dc(static_cast<Eigen::Index>(gs[k]), 0);
                          }
                        });
}

Var sum(Var a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  const std::size_t ia = a.id();
  return a.graph().emit(OpKind::kSum, {ia}, std::move(v),
                        [ia](Graph& g, std::size_t self) { g.grad(ia).array() += g.grad(self)(0, 0); });
}

namespace {

template <typename Derived>
auto sigm(const Eigen::ArrayBase<Derived>& x) {
  return (1.0 + (-x).exp()).inverse();
}

}  // namespace

Var lstm_sequence(Var projected, Var w_hidden, std::size_t batch) {
  require_same_graph(projected, w_hidden);
  const Eigen::Index H = w_hidden.rows();
  const auto B = static_cast<Eigen::Index>(batch);
  if (batch == 0 || w_hidden.cols() != 4 * H || projected.cols() != 4 * H || projected.rows() % B != 0) {
    throw std::invalid_argument("lstm_sequence: inconsistent shapes");
  }
  const Eigen::Index T = projected.rows() / B;
  const Matrix& xw = projected.value();
  const Matrix& wh = w_hidden.value();

  // Activated gates (i, f, g, o), cell states and tanh of cell states per step.
  Matrix gates(T * B, 4 * H);
  Matrix cells(T * B, H);
  Matrix cell_tanh(T * B, H);
  Matrix hidden(T * B, H);
  Matrix pre(B, 4 * H);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::Index r = t * B;
    pre = xw.middleRows(r, B);
    if (t > 0) pre.noalias() += hidden.middleRows(r - B, B) * wh;
    auto gt = gates.middleRows(r, B);
    gt.leftCols(2 * H) = sigm(pre.leftCols(2 * H).array()).matrix();
    gt.middleCols(2 * H, H) = (2.0 * sigm(2.0 * pre.middleCols(2 * H, H).array()) - 1.0).matrix();
    gt.rightCols(H) = sigm(pre.rightCols(H).array()).matrix();
    auto c = cells.middleRows(r, B);
    c = gt.leftCols(H).cwiseProduct(gt.middleCols(2 * H, H));
    if (t > 0) c += gt.middleCols(H, H).cwiseProduct(cells.middleRows(r - B, B));
    auto tc = cell_tanh.middleRows(r, B);
    tc = (2.0 * sigm(2.0 * c.array()) - 1.0).matrix();
    hidden.middleRows(r, B) = gt.rightCols(H).cwiseProduct(tc);
  }

  const std::size_t ix = projected.id(), iw = w_hidden.id();
  Matrix out = hidden;
  return projected.graph().emit(
      OpKind::kLstmSequence, {ix, iw}, std::move(out),
      [ix, iw, B, T, H, gates = std::move(gates), cells = std::move(cells), cell_tanh = std::move(cell_tanh)](
          Graph& g, std::size_t self) {
        const Matrix& dh_all = g.grad(self);
        const Matrix& h_all = g.value(self);
        const Matrix& wh = g.value(iw);
        Matrix& dxw = g.grad(ix);
        Matrix dpre_all(T * B, 4 * H);
        Matrix dh_next = Matrix::Zero(B, H);
        Matrix dc_next = Matrix::Zero(B, H);
        Matrix dh(B, H), dc(B, H);
        for (Eigen::Index t = T; t-- > 0;) {
          const Eigen::Index r = t * B;
          const auto gt = gates.middleRows(r, B).array();
          const auto i = gt.leftCols(H), f = gt.middleCols(H, H), cand = gt.middleCols(2 * H, H),
                     o = gt.rightCols(H);
          const auto tc = cell_tanh.middleRows(r, B).array();
          dh = dh_all.middleRows(r, B) + dh_next;
          dc.array() = dh.array() * o * (1.0 - tc.square()) + dc_next.array();
          auto dp = dpre_all.middleRows(r, B);
          dp.leftCols(H).array() = dc.array() * cand * i * (1.0 - i);
          if (t > 0) {
            dp.middleCols(H, H).array() = dc.array() * cells.middleRows(r - B, B).array() * f * (1.0 - f);
          } else {
            dp.middleCols(H, H).setZero();
          }
          dp.middleCols(2 * H, H).array() = dc.array() * i * (1.0 - cand.square());
          dp.rightCols(H).array() = dh.array() * tc * o * (1.0 - o);
          dc_next.array() = dc.array() * f;
          if (t > 0) dh_next.noalias() = dp * wh.transpose();
        }
        dxw += dpre_all;
        if (T > 1) {
          g.grad(iw).noalias() += h_all.topRows((T - 1) * B).transpose() * dpre_all.bottomRows((T - 1) * B);
        }
      });
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("empty distribution");
  double m = logits[0];
  for (double x : logits) {
    if (!std::isfinite(x)) throw std::invalid_argument("log_softmax: non-finite logit");
    m = std::max(m, x);
  }
  double s = 0.0;
  for (double x : logits) s += std::exp(x - m);
  const double lse = m + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

// ---------------------------------------------------------------------------
// Optimisation

void sgd_step(ParameterStore& params, const Gradients& grads, double lr, double weight_decay) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be nonnegative");
  for (const auto& [name, g] : grads) {
    if (params.find(name) == nullptr) throw std::invalid_argument("gradient for unknown parameter " + name);
    if (params.get(name).value.shape() != g.shape()) {
      throw std::invalid_argument("shape mismatch for " + name + ": " + shape_string(params.get(name).value.shape()) +
                                  " vs " + shape_string(g.shape()));
    }
  }
  for (const auto& [name, g] : grads) {
    Matrix& p = params.get(name).value.as_matrix();
    if (weight_decay != 0.0) {
      p -= lr * (g.as_matrix() + weight_decay * p);
    } else {
      p -= lr * g.as_matrix();
    }
  }
}

double gradient_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.as_matrix().squaredNorm();
  return std::sqrt(sq);
}

double clip_gradients(Gradients& grads, double max_norm) {
  const double norm = gradient_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& [name, g] : grads) g.as_matrix() *= f;
  }
  return norm;
}

}  // namespace negexlm::num
