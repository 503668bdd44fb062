#pragma once

// Reverse-mode differentiation over a flat tape. The tape is rebuilt every
// step: ops append nodes whose inputs always have smaller indices, so a
// single reverse sweep is a valid topological order. Gradients accumulate
// into ParamTensor::grad, and repeated backward calls without zero_grad add
// up exactly (one pass per call).
//
// Op set: matrix multiply (with transpose flags), add, row-broadcast add,
// ReLU, row-wise softmax, fused softmax cross-entropy (mean over rows),
// row-wise L2 normalization, scalar multiply/add, exp, log, row
// concatenation, reshape.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gmss/errors.hpp"
#include "gmss/matrix.hpp"

namespace gmss {

// A named parameter with a persistent gradient slot.
struct ParamTensor {
  Matrix data;
  Matrix grad;
  std::string name;
  bool decay_exempt = false;  // noise scalars skip weight decay

  ParamTensor() = default;
  ParamTensor(std::string n, Matrix d)
      : data(std::move(d)), grad(data.rows(), data.cols()), name(std::move(n)) {}

  void zero_grad() { grad.fill(0.0); }
};

struct Var {
  std::uint32_t idx = UINT32_MAX;
  bool valid() const { return idx != UINT32_MAX; }
};

class Tape {
 public:
  Tape() { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  const Matrix& value(Var v) const { return nodes_[v.idx].value; }

  // -- graph inputs ---------------------------------------------------------

  Var leaf(Matrix m) { return push(Op::kLeaf, std::move(m)); }

  Var param(ParamTensor& p) {
    Var v = push(Op::kParam, p.data);
    nodes_[v.idx].param = &p;
    return v;
  }

  // -- ops ------------------------------------------------------------------

  Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false) {
    Matrix out = gmss::matmul(value(a), value(b), trans_a, trans_b);
    Var v = push(Op::kMatMul, std::move(out), a, b);
    nodes_[v.idx].trans_a = trans_a;
    nodes_[v.idx].trans_b = trans_b;
    return v;
  }

  Var add(Var a, Var b) { return push(Op::kAdd, gmss::add(value(a), value(b)), a, b); }

  // a: N x d, bias: 1 x d broadcast over rows.
  Var add_rowvec(Var a, Var bias) {
    const Matrix& m = value(a);
    const Matrix& r = value(bias);
    if (r.rows() != 1 || r.cols() != m.cols())
      throw DimensionError("add_rowvec: bias " + r.shape_str() + " vs " + m.shape_str());
    Matrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) += r[j];
    return push(Op::kAddRowVec, std::move(out), a, bias);
  }

  Var relu(Var a) {
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    return push(Op::kRelu, std::move(out), a);
  }

  Var softmax_rows(Var a) {
    Matrix out = softmax_matrix(value(a));
    return push(Op::kSoftmaxRows, std::move(out), a);
  }

  // Mean over rows of (logsumexp(row) - row[label]); labels are 0-based.
  Var cross_entropy_softmax(Var logits, const std::vector<int>& labels) {
    const Matrix& x = value(logits);
    if (labels.size() != x.rows())
      throw DimensionError("cross_entropy_softmax: " + std::to_string(labels.size()) +
                           " labels for " + x.shape_str() + " logits");
    for (int y : labels)
      if (y < 0 || static_cast<std::size_t>(y) >= x.cols())
        throw ContractError("cross_entropy_softmax: label " + std::to_string(y) + " out of range");
    Matrix sm = softmax_matrix(x);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double mx = x.at(i, 0);
      for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, x.at(i, j));
      double se = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) se += std::exp(x.at(i, j) - mx);
      loss += mx + std::log(se) - x.at(i, static_cast<std::size_t>(labels[i]));
    }
    loss /= static_cast<double>(x.rows());
    Matrix out(1, 1);
    out[0] = loss;
    Var v = push(Op::kCeSoftmax, std::move(out), logits);
    nodes_[v.idx].labels = labels;
    nodes_[v.idx].aux = std::move(sm);
    return v;
  }

  Var l2_normalize_rows(Var a) {
    const Matrix& x = value(a);
    Matrix out = x;
    Matrix norms(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) s += x.at(i, j) * x.at(i, j);
      const double n = std::sqrt(s);
      if (n <= 1e-12)
        throw NumericError("l2_normalize_rows: row " + std::to_string(i) + " has near-zero norm");
      norms[i] = n;
      for (std::size_t j = 0; j < x.cols(); ++j) out.at(i, j) /= n;
    }
    Var v = push(Op::kL2NormRows, std::move(out), a);
    nodes_[v.idx].aux = std::move(norms);
    return v;
  }

  Var mul_scalar(Var a, double c) {
    Var v = push(Op::kMulScalar, scaled(value(a), c), a);
    nodes_[v.idx].scalar = c;
    return v;
  }

  Var add_scalar(Var a, double c) {
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
    Var v = push(Op::kAddScalar, std::move(out), a);
    nodes_[v.idx].scalar = c;
    return v;
  }

  Var exp(Var a) {
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    if (!out.all_finite()) throw NumericError("exp overflow");
    return push(Op::kExp, std::move(out), a);
  }

  Var log(Var a) {
    Matrix out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] <= 0.0) throw NumericError("log of non-positive value");
      out[i] = std::log(out[i]);
    }
    return push(Op::kLog, std::move(out), a);
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: empty part list");
    const std::size_t cols = value(parts[0]).cols();
    std::size_t rows = 0;
    for (Var p : parts) {
      if (value(p).cols() != cols) throw DimensionError("concat_rows: column mismatch");
      rows += value(p).rows();
    }
    Matrix out(rows, cols);
    std::size_t r = 0;
    for (Var p : parts) {
      const Matrix& m = value(p);
      std::copy(m.data(), m.data() + m.size(), out.data() + r * cols);
      r += m.rows();
    }
    Var v = push(Op::kConcatRows, std::move(out));
    for (Var p : parts) nodes_[v.idx].parts.push_back(p.idx);
    return v;
  }

  Var reshape(Var a, std::size_t rows, std::size_t cols) {
    return push(Op::kReshape, value(a).reshaped(rows, cols), a);
  }

  // -- backward -------------------------------------------------------------

  // Seeds d(loss)/d(loss)=1 and sweeps the tape once in reverse; every
  // ParamTensor reachable from `loss` receives grad += d(loss)/d(param).
  void backward(Var loss) {
    const Matrix& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1)
      throw ContractError("backward: loss must be 1x1, got " + lv.shape_str());
    std::vector<Matrix> grads(nodes_.size());
    grads[loss.idx] = Matrix(1, 1);
    grads[loss.idx][0] = 1.0;
    for (std::size_t n = loss.idx + 1; n-- > 0;) {
      if (grads[n].empty()) continue;  // node does not feed the loss
      const Node& node = nodes_[n];
      const Matrix& g = grads[n];
      switch (node.op) {
        case Op::kLeaf:
          break;
        case Op::kParam:
          axpy(1.0, g, node.param->grad);
          break;
        case Op::kMatMul: {
          const Matrix& av = nodes_[node.a].value;
          const Matrix& bv = nodes_[node.b].value;
          Matrix& da = grad_slot(grads, node.a);
          Matrix& db = grad_slot(grads, node.b);
          if (!node.trans_a)
            gemm(1.0, g, false, bv, !node.trans_b, 1.0, da);
          else
            node.trans_b ? gemm(1.0, bv, true, g, true, 1.0, da)
                         : gemm(1.0, bv, false, g, true, 1.0, da);
          if (!node.trans_b)
            gemm(1.0, av, !node.trans_a, g, false, 1.0, db);
          else
            node.trans_a ? gemm(1.0, g, true, av, true, 1.0, db)
                         : gemm(1.0, g, true, av, false, 1.0, db);
          break;
        }
        case Op::kAdd:
          axpy(1.0, g, grad_slot(grads, node.a));
          axpy(1.0, g, grad_slot(grads, node.b));
          break;
        case Op::kAddRowVec: {
          axpy(1.0, g, grad_slot(grads, node.a));
          Matrix& db = grad_slot(grads, node.b);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) db[j] += g.at(i, j);
          break;
        }
        case Op::kRelu: {
          const Matrix& av = nodes_[node.a].value;
          Matrix& da = grad_slot(grads, node.a);
          for (std::size_t i = 0; i < g.size(); ++i)
            if (av[i] > 0.0) da[i] += g[i];
          break;
        }
        case Op::kSoftmaxRows: {
          const Matrix& s = node.value;
          Matrix& da = grad_slot(grads, node.a);
          for (std::size_t i = 0; i < s.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < s.cols(); ++j) dot += s.at(i, j) * g.at(i, j);
            for (std::size_t j = 0; j < s.cols(); ++j)
              da.at(i, j) += s.at(i, j) * (g.at(i, j) - dot);
          }
          break;
        }
        case Op::kCeSoftmax: {
          const Matrix& sm = node.aux;
          Matrix& da = grad_slot(grads, node.a);
          const double scale = g[0] / static_cast<double>(sm.rows());
          for (std::size_t i = 0; i < sm.rows(); ++i) {
            for (std::size_t j = 0; j < sm.cols(); ++j) da.at(i, j) += scale * sm.at(i, j);
            da.at(i, static_cast<std::size_t>(node.labels[i])) -= scale;
          }
          break;
        }
        case Op::kL2NormRows: {
          const Matrix& y = node.value;
          const Matrix& norms = node.aux;
          Matrix& da = grad_slot(grads, node.a);
          for (std::size_t i = 0; i < y.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < y.cols(); ++j) dot += y.at(i, j) * g.at(i, j);
            for (std::size_t j = 0; j < y.cols(); ++j)
              da.at(i, j) += (g.at(i, j) - y.at(i, j) * dot) / norms[i];
          }
          break;
        }
        case Op::kMulScalar:
          axpy(node.scalar, g, grad_slot(grads, node.a));
          break;
        case Op::kAddScalar:
          axpy(1.0, g, grad_slot(grads, node.a));
          break;
        case Op::kExp: {
          const Matrix& yv = node.value;
          Matrix& da = grad_slot(grads, node.a);
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * yv[i];
          break;
        }
        case Op::kLog: {
          const Matrix& av = nodes_[node.a].value;
          Matrix& da = grad_slot(grads, node.a);
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] / av[i];
          break;
        }
        case Op::kConcatRows: {
          std::size_t r = 0;
          for (std::uint32_t pi : node.parts) {
            Matrix& dp = grad_slot(grads, pi);
            for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += g[r * g.cols() + i];
            r += dp.rows();
          }
          break;
        }
        case Op::kReshape: {
          Matrix& da = grad_slot(grads, node.a);
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
          break;
        }
      }
    }
  }

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kParam,
    kMatMul,
    kAdd,
    kAddRowVec,
    kRelu,
    kSoftmaxRows,
    kCeSoftmax,
    kL2NormRows,
    kMulScalar,
    kAddScalar,
    kExp,
    kLog,
    kConcatRows,
    kReshape,
  };

  struct Node {
    Op op;
    Matrix value;
    std::uint32_t a = UINT32_MAX, b = UINT32_MAX;
    bool trans_a = false, trans_b = false;
    double scalar = 0.0;
    std::vector<int> labels;
    std::vector<std::uint32_t> parts;
    Matrix aux;
    ParamTensor* param = nullptr;
  };

  Var push(Op op, Matrix value, Var a = {}, Var b = {}) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.a = a.idx;
    n.b = b.idx;
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  Matrix& grad_slot(std::vector<Matrix>& grads, std::uint32_t i) {
    if (grads[i].empty())
      grads[i] = Matrix(nodes_[i].value.rows(), nodes_[i].value.cols());
    return grads[i];
  }

  static Matrix softmax_matrix(const Matrix& x) {
    Matrix s = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double mx = x.at(i, 0);
      for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, x.at(i, j));
      double sum = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) {
        s.at(i, j) = std::exp(x.at(i, j) - mx);
        sum += s.at(i, j);
      }
      for (std::size_t j = 0; j < x.cols(); ++j) s.at(i, j) /= sum;
    }
    return s;
  }

  std::vector<Node> nodes_;
};

// -- small compositions used across the library -----------------------------

inline Var sub(Tape& t, Var a, Var b) { return t.add(a, t.mul_scalar(b, -1.0)); }

// Sum of all entries via ones-vector products.
inline Var sum_all(Tape& t, Var a) {
  const Matrix& m = t.value(a);
  Var ones_row = t.leaf(Matrix::filled(1, m.rows(), 1.0));
  Var ones_col = t.leaf(Matrix::filled(m.cols(), 1, 1.0));
  return t.matmul(t.matmul(ones_row, a), ones_col);
}

inline Var sum_vars(Tape& t, const std::vector<Var>& vs) {
  if (vs.empty()) throw ContractError("sum_vars: empty");
  std::vector<Var> level = vs;
  while (level.size() > 1) {
    std::vector<Var> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(t.add(level[i], level[i + 1]));
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0];
}

}  // namespace gmss
