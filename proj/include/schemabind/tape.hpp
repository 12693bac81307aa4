#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <string>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/tensor.hpp"

namespace schemabind {

using NodeId = int32_t;

enum class Op : uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Tanh,
  Sigmoid,
  Relu,
  Softplus,
  Hadamard,
  Outer,
  Concat,
  SliceRows,
  Softmax,
  Scale,
  ScalarMul,
  LayerNorm,
  CosineRows,
  Sharpen,
  Dot,
  SoftmaxXent,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Relu: return "relu";
    case Op::Softplus: return "softplus";
    case Op::Hadamard: return "hadamard";
    case Op::Outer: return "outer_product";
    case Op::Concat: return "concat";
    case Op::SliceRows: return "slice";
    case Op::Softmax: return "softmax";
    case Op::Scale: return "scale";
    case Op::ScalarMul: return "scalar_mul";
    case Op::LayerNorm: return "layer_norm";
    case Op::CosineRows: return "cosine_rows";
    case Op::Sharpen: return "sharpen";
    case Op::Dot: return "dot";
    case Op::SoftmaxXent: return "softmax_xent";
  }
  return "?";
}

// Recorded operation graph. Nodes are appended in execution order (so the
// list is topological by construction) and values are computed eagerly.
// One Tape serves one forward/backward pass and is reset between passes;
// arenas keep their capacity across resets.
class Tape {
  struct Node {
    Op op;
    int rows, cols;
    size_t off;        // into vals_/grads_
    int in_begin;      // into inputs_
    int in_count;
    int i0, i1;        // op-specific ints (slice begin, transpose flags)
    double d0, d1;     // op-specific saved scalars
  };

 public:
  void reset() {
    nodes_.clear();
    inputs_.clear();
    vals_.clear();
  }

  void set_check_finite(bool on) { check_finite_ = on; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int rows(NodeId id) const { return nodes_[id].rows; }
  int cols(NodeId id) const { return nodes_[id].cols; }
  int size(NodeId id) const { return nodes_[id].rows * nodes_[id].cols; }
  const double* value(NodeId id) const { return vals_.data() + nodes_[id].off; }
  double* value(NodeId id) { return vals_.data() + nodes_[id].off; }
  const double* grad(NodeId id) const { return grads_.data() + nodes_[id].off; }

  Tensor value_tensor(NodeId id) const {
    Tensor t(nodes_[id].rows, nodes_[id].cols);
    std::memcpy(t.data.data(), value(id), sizeof(double) * t.data.size());
    return t;
  }

  NodeId leaf(const Tensor& t) {
    NodeId id = new_node(Op::Leaf, t.rows, t.cols, {});
    std::memcpy(value(id), t.data.data(), sizeof(double) * t.data.size());
    return finish(id);
  }

  NodeId leaf_fill(int r, int c, double v) {
    NodeId id = new_node(Op::Leaf, r, c, {});
    std::fill_n(value(id), static_cast<size_t>(r) * c, v);
    return finish(id);
  }

  // y = op(a) * op(b), optional transposes.
  NodeId matmul(NodeId a, NodeId b, bool ta = false, bool tb = false) {
    int am = ta ? cols(a) : rows(a);
    int ak = ta ? rows(a) : cols(a);
    int bk = tb ? cols(b) : rows(b);
    int bn = tb ? rows(b) : cols(b);
    if (ak != bk)
      throw DimensionError("matmul: inner dimensions disagree " + shape_str(a) + (ta ? "^T" : "") +
                           " x " + shape_str(b) + (tb ? "^T" : ""));
    NodeId id = new_node(Op::MatMul, am, bn, {a, b});
    nodes_[id].i0 = ta ? 1 : 0;
    nodes_[id].i1 = tb ? 1 : 0;
    gemm(value(a), rows(a), cols(a), ta, value(b), rows(b), cols(b), tb, value(id), false);
    return finish(id);
  }

  NodeId add(NodeId a, NodeId b) { return binary_same_shape(Op::Add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return binary_same_shape(Op::Sub, a, b); }
  NodeId hadamard(NodeId a, NodeId b) { return binary_same_shape(Op::Hadamard, a, b); }

  NodeId tanh_(NodeId x) { return unary(Op::Tanh, x); }
  NodeId sigmoid_(NodeId x) { return unary(Op::Sigmoid, x); }
  NodeId relu(NodeId x) { return unary(Op::Relu, x); }
  NodeId softplus(NodeId x) { return unary(Op::Softplus, x); }

  NodeId outer(NodeId u, NodeId v) {
    if (cols(u) != 1 || cols(v) != 1) throw DimensionError("outer_product: expects column vectors");
    NodeId id = new_node(Op::Outer, rows(u), rows(v), {u, v});
    const double* a = value(u);
    const double* b = value(v);
    double* y = value(id);
    int n = rows(v);
    for (int i = 0; i < rows(u); ++i)
      for (int j = 0; j < n; ++j) y[i * n + j] = a[i] * b[j];
    return finish(id);
  }

  NodeId concat(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    int c = cols(parts[0]);
    int r = 0;
    for (NodeId p : parts) {
      if (cols(p) != c) throw DimensionError("concat: column counts disagree");
      r += rows(p);
    }
    NodeId id = new_node(Op::Concat, r, c, parts);
    double* y = value(id);
    for (NodeId p : parts) {
      std::memcpy(y, value(p), sizeof(double) * size(p));
      y += size(p);
    }
    return finish(id);
  }

  NodeId slice_rows(NodeId x, int begin, int len) {
    if (begin < 0 || len <= 0 || begin + len > rows(x))
      throw DimensionError("slice: range [" + std::to_string(begin) + ", " +
                           std::to_string(begin + len) + ") outside " + shape_str(x));
    NodeId id = new_node(Op::SliceRows, len, cols(x), {x});
    nodes_[id].i0 = begin;
    std::memcpy(value(id), value(x) + static_cast<size_t>(begin) * cols(x),
                sizeof(double) * static_cast<size_t>(len) * cols(x));
    return finish(id);
  }

  NodeId softmax(NodeId x) {
    if (cols(x) != 1) throw DimensionError("softmax: expects a column vector");
    NodeId id = new_node(Op::Softmax, rows(x), 1, {x});
    const double* in = value(x);
    double* y = value(id);
    int n = rows(x);
    double mx = in[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, in[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = std::exp(in[i] - mx);
      sum += y[i];
    }
    for (int i = 0; i < n; ++i) y[i] /= sum;
    return finish(id);
  }

  // y = a*x + b
  NodeId scale(NodeId x, double a, double b = 0.0) {
    NodeId id = new_node(Op::Scale, rows(x), cols(x), {x});
    nodes_[id].d0 = a;
    nodes_[id].d1 = b;
    const double* in = value(x);
    double* y = value(id);
    for (int i = 0, n = size(x); i < n; ++i) y[i] = a * in[i] + b;
    return finish(id);
  }

  NodeId one_minus(NodeId x) { return scale(x, -1.0, 1.0); }

  // y = s * x where s is a 1x1 node.
  NodeId scalar_mul(NodeId x, NodeId s) {
    if (size(s) != 1) throw DimensionError("scalar_mul: scale input must be 1x1");
    NodeId id = new_node(Op::ScalarMul, rows(x), cols(x), {x, s});
    double sv = value(s)[0];
    const double* in = value(x);
    double* y = value(id);
    for (int i = 0, n = size(x); i < n; ++i) y[i] = sv * in[i];
    return finish(id);
  }

  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5) {
    if (cols(x) != 1) throw DimensionError("layer_norm: expects a column vector");
    if (rows(gain) != rows(x) || rows(bias) != rows(x) || cols(gain) != 1 || cols(bias) != 1)
      throw DimensionError("layer_norm: gain/bias length must match input " + shape_str(x));
    NodeId id = new_node(Op::LayerNorm, rows(x), 1, {x, gain, bias});
    const double* in = value(x);
    const double* g = value(gain);
    const double* b = value(bias);
    double* y = value(id);
    int n = rows(x);
    double mu = 0.0;
    for (int i = 0; i < n; ++i) mu += in[i];
    mu /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (in[i] - mu) * (in[i] - mu);
    var /= n;
    double inv = 1.0 / std::sqrt(var + eps);
    for (int i = 0; i < n; ++i) y[i] = (in[i] - mu) * inv * g[i] + b[i];
    nodes_[id].d0 = mu;
    nodes_[id].d1 = inv;
    return finish(id);
  }

  // Cosine similarity between each row of m and the key vector.
  NodeId cosine_rows(NodeId m, NodeId k, double eps = 1e-8) {
    if (cols(k) != 1 || cols(m) != rows(k))
      throw DimensionError("cosine_rows: key length must equal matrix columns");
    NodeId id = new_node(Op::CosineRows, rows(m), 1, {m, k});
    const double* M = value(m);
    const double* key = value(k);
    double* y = value(id);
    int n = cols(m);
    double knorm = 0.0;
    for (int j = 0; j < n; ++j) knorm += key[j] * key[j];
    knorm = std::sqrt(knorm);
    for (int i = 0; i < rows(m); ++i) {
      const double* row = M + static_cast<size_t>(i) * n;
      double num = 0.0, rn = 0.0;
      for (int j = 0; j < n; ++j) {
        num += row[j] * key[j];
        rn += row[j] * row[j];
      }
      y[i] = num / (std::sqrt(rn) * knorm + eps);
    }
    nodes_[id].d0 = knorm;
    nodes_[id].d1 = eps;
    return finish(id);
  }

  // y_i = w_i^gamma / sum_j w_j^gamma, gamma a 1x1 node, w strictly positive.
  NodeId sharpen(NodeId w, NodeId gamma) {
    if (cols(w) != 1) throw DimensionError("sharpen: expects a column vector");
    if (size(gamma) != 1) throw DimensionError("sharpen: gamma must be 1x1");
    NodeId id = new_node(Op::Sharpen, rows(w), 1, {w, gamma});
    const double* in = value(w);
    double g = value(gamma)[0];
    double* y = value(id);
    int n = rows(w);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = std::pow(std::max(in[i], 1e-300), g);
      sum += y[i];
    }
    for (int i = 0; i < n; ++i) y[i] /= sum;
    nodes_[id].d0 = sum;
    return finish(id);
  }

  NodeId dot_(NodeId u, NodeId v) {
    if (cols(u) != 1 || cols(v) != 1 || rows(u) != rows(v))
      throw DimensionError("dot: expects matching column vectors, got " + shape_str(u) + " and " +
                           shape_str(v));
    NodeId id = new_node(Op::Dot, 1, 1, {u, v});
    const double* a = value(u);
    const double* b = value(v);
    double s = 0.0;
    for (int i = 0; i < rows(u); ++i) s += a[i] * b[i];
    value(id)[0] = s;
    return finish(id);
  }

  // -log softmax(logits)[target]
  NodeId softmax_xent(NodeId logits, int target) {
    if (cols(logits) != 1) throw DimensionError("softmax_xent: expects a column vector");
    if (target < 0 || target >= rows(logits))
      throw DimensionError("softmax_xent: target index out of range");
    NodeId id = new_node(Op::SoftmaxXent, 1, 1, {logits});
    nodes_[id].i0 = target;
    const double* z = value(logits);
    int n = rows(logits);
    double mx = z[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::exp(z[i] - mx);
    value(id)[0] = mx + std::log(sum) - z[target];
    return finish(id);
  }

  // Reverse sweep from a scalar loss node. Gradients accumulate over all
  // paths; every node is visited exactly once in reverse creation order.
  void backward(NodeId loss) {
    if (size(loss) != 1) throw DimensionError("backward: loss must be scalar, got " + shape_str(loss));
    grads_.assign(vals_.size(), 0.0);
    grads_[nodes_[loss].off] = 1.0;
    for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) pullback(id);
  }

 private:
  template <typename InputRange>
  NodeId new_node_range(Op op, int r, int c, const InputRange& ins) {
    NodeId id = static_cast<NodeId>(nodes_.size());
    Node node;
    node.op = op;
    node.rows = r;
    node.cols = c;
    node.off = vals_.size();
    node.in_begin = static_cast<int>(inputs_.size());
    node.in_count = static_cast<int>(ins.size());
    node.i0 = node.i1 = 0;
    node.d0 = node.d1 = 0.0;
    nodes_.push_back(node);
    for (NodeId x : ins) inputs_.push_back(x);
    vals_.resize(vals_.size() + static_cast<size_t>(r) * c);
    return id;
  }

  NodeId new_node(Op op, int r, int c, std::initializer_list<NodeId> ins) {
    return new_node_range(op, r, c, ins);
  }

  NodeId new_node(Op op, int r, int c, const std::vector<NodeId>& ins) {
    return new_node_range(op, r, c, ins);
  }

  NodeId finish(NodeId id) {
    if (check_finite_) {
      const double* v = value(id);
      for (int i = 0, n = size(id); i < n; ++i)
        if (!std::isfinite(v[i]))
          throw NumericError(std::string("non-finite value in op ") + op_name(nodes_[id].op) +
                             " (node " + std::to_string(id) + ")");
    }
    return id;
  }

  NodeId binary_same_shape(Op op, NodeId a, NodeId b) {
    if (rows(a) != rows(b) || cols(a) != cols(b))
      throw DimensionError(std::string(op_name(op)) + ": shapes disagree " + shape_str(a) + " vs " +
                           shape_str(b));
    NodeId id = new_node(op, rows(a), cols(a), {a, b});
    const double* x = value(a);
    const double* y = value(b);
    double* out = value(id);
    int n = size(a);
    switch (op) {
      case Op::Add:
        for (int i = 0; i < n; ++i) out[i] = x[i] + y[i];
        break;
      case Op::Sub:
        for (int i = 0; i < n; ++i) out[i] = x[i] - y[i];
        break;
      case Op::Hadamard:
        for (int i = 0; i < n; ++i) out[i] = x[i] * y[i];
        break;
      default:
        break;
    }
    return finish(id);
  }

  NodeId unary(Op op, NodeId x) {
    NodeId id = new_node(op, rows(x), cols(x), {x});
    const double* in = value(x);
    double* y = value(id);
    int n = size(x);
    switch (op) {
      case Op::Tanh:
        for (int i = 0; i < n; ++i) y[i] = std::tanh(in[i]);
        break;
      case Op::Sigmoid:
        for (int i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-in[i]));
        break;
      case Op::Relu:
        for (int i = 0; i < n; ++i) y[i] = in[i] > 0.0 ? in[i] : 0.0;
        break;
      case Op::Softplus:
        // log(1+e^x) computed stably from both sides
        for (int i = 0; i < n; ++i)
          y[i] = in[i] > 0.0 ? in[i] + std::log1p(std::exp(-in[i])) : std::log1p(std::exp(in[i]));
        break;
      default:
        break;
    }
    return finish(id);
  }

  std::string shape_str(NodeId id) const {
    return "(" + std::to_string(rows(id)) + "x" + std::to_string(cols(id)) + ")";
  }

  // C (+)= op(A)*op(B); fast paths for the vector shapes that dominate here.
  static void gemm(const double* A, int ar, int ac, bool ta, const double* B, int br, int bc,
                   bool tb, double* C, bool acc) {
    int M = ta ? ac : ar;
    int K = ta ? ar : ac;
    int N = tb ? br : bc;
    if (N == 1 && !tb) {
      if (!ta) {
        for (int i = 0; i < M; ++i) {
          const double* row = A + static_cast<size_t>(i) * ac;
          double s = 0.0;
          for (int k = 0; k < K; ++k) s += row[k] * B[k];
          C[i] = (acc ? C[i] : 0.0) + s;
        }
      } else {
        if (!acc) std::fill_n(C, M, 0.0);
        for (int k = 0; k < K; ++k) {
          const double* row = A + static_cast<size_t>(k) * ac;
          double b = B[k];
          for (int i = 0; i < M; ++i) C[i] += b * row[i];
        }
      }
      return;
    }
    if (!acc) std::fill_n(C, static_cast<size_t>(M) * N, 0.0);
    for (int i = 0; i < M; ++i) {
      double* crow = C + static_cast<size_t>(i) * N;
      for (int k = 0; k < K; ++k) {
        double a = ta ? A[static_cast<size_t>(k) * ac + i] : A[static_cast<size_t>(i) * ac + k];
        if (!tb) {
          const double* brow = B + static_cast<size_t>(k) * bc;
          for (int j = 0; j < N; ++j) crow[j] += a * brow[j];
        } else {
          for (int j = 0; j < N; ++j) crow[j] += a * B[static_cast<size_t>(j) * bc + k];
        }
      }
    }
  }

  double* gradp(NodeId id) { return grads_.data() + nodes_[id].off; }

  void pullback(NodeId id) {
    const Node& node = nodes_[id];
    const double* g = grads_.data() + node.off;
    const NodeId* in = inputs_.data() + node.in_begin;
    int n = node.rows * node.cols;
    switch (node.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        NodeId a = in[0], b = in[1];
        bool ta = node.i0 != 0, tb = node.i1 != 0;
        // dA and dB via the same kernel with swapped transposes
        if (!ta)
          gemm(g, node.rows, node.cols, false, value(b), rows(b), cols(b), !tb, gradp(a), true);
        else
          gemm(value(b), rows(b), cols(b), tb, g, node.rows, node.cols, true, gradp(a), true);
        if (!tb)
          gemm(value(a), rows(a), cols(a), !ta, g, node.rows, node.cols, false, gradp(b), true);
        else
          gemm(g, node.rows, node.cols, true, value(a), rows(a), cols(a), ta, gradp(b), true);
        break;
      }
      case Op::Add: {
        double* da = gradp(in[0]);
        double* db = gradp(in[1]);
        for (int i = 0; i < n; ++i) {
          da[i] += g[i];
          db[i] += g[i];
        }
        break;
      }
      case Op::Sub: {
        double* da = gradp(in[0]);
        double* db = gradp(in[1]);
        for (int i = 0; i < n; ++i) {
          da[i] += g[i];
          db[i] -= g[i];
        }
        break;
      }
      case Op::Tanh: {
        const double* y = value(id);
        double* dx = gradp(in[0]);
        for (int i = 0; i < n; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::Sigmoid: {
        const double* y = value(id);
        double* dx = gradp(in[0]);
        for (int i = 0; i < n; ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case Op::Relu: {
        const double* x = value(in[0]);
        double* dx = gradp(in[0]);
        for (int i = 0; i < n; ++i) dx[i] += x[i] > 0.0 ? g[i] : 0.0;
        break;
      }
      case Op::Softplus: {
        const double* x = value(in[0]);
        double* dx = gradp(in[0]);
        for (int i = 0; i < n; ++i) dx[i] += g[i] / (1.0 + std::exp(-x[i]));
        break;
      }
      case Op::Hadamard: {
        const double* a = value(in[0]);
        const double* b = value(in[1]);
        double* da = gradp(in[0]);
        double* db = gradp(in[1]);
        for (int i = 0; i < n; ++i) {
          da[i] += g[i] * b[i];
          db[i] += g[i] * a[i];
        }
        break;
      }
      case Op::Outer: {
        const double* u = value(in[0]);
        const double* v = value(in[1]);
        double* du = gradp(in[0]);
        double* dv = gradp(in[1]);
        int m = node.rows, k = node.cols;
        for (int i = 0; i < m; ++i) {
          const double* grow = g + static_cast<size_t>(i) * k;
          double ui = u[i];
          double s = 0.0;
          for (int j = 0; j < k; ++j) {
            s += grow[j] * v[j];
            dv[j] += grow[j] * ui;
          }
          du[i] += s;
        }
        break;
      }
      case Op::Concat: {
        const double* src = g;
        for (int p = 0; p < node.in_count; ++p) {
          NodeId part = in[p];
          double* dp = gradp(part);
          for (int i = 0, m = size(part); i < m; ++i) dp[i] += src[i];
          src += size(part);
        }
        break;
      }
      case Op::SliceRows: {
        double* dx = gradp(in[0]) + static_cast<size_t>(node.i0) * node.cols;
        for (int i = 0; i < n; ++i) dx[i] += g[i];
        break;
      }
      case Op::Softmax: {
        const double* y = value(id);
        double* dx = gradp(in[0]);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += g[i] * y[i];
        for (int i = 0; i < n; ++i) dx[i] += y[i] * (g[i] - s);
        break;
      }
      case Op::Scale: {
        double a = node.d0;
        double* dx = gradp(in[0]);
        for (int i = 0; i < n; ++i) dx[i] += a * g[i];
        break;
      }
      case Op::ScalarMul: {
        const double* x = value(in[0]);
        double sv = value(in[1])[0];
        double* dx = gradp(in[0]);
        double ds = 0.0;
        for (int i = 0; i < n; ++i) {
          dx[i] += sv * g[i];
          ds += g[i] * x[i];
        }
        gradp(in[1])[0] += ds;
        break;
      }
      case Op::LayerNorm: {
        const double* x = value(in[0]);
        const double* gain = value(in[1]);
        double* dx = gradp(in[0]);
        double* dgain = gradp(in[1]);
        double* dbias = gradp(in[2]);
        double mu = node.d0;
        double inv = node.d1;
        // xh = normalized input; dxh = upstream through the gain
        double mean_dxh = 0.0, mean_dxh_xh = 0.0;
        for (int i = 0; i < n; ++i) {
          double xh = (x[i] - mu) * inv;
          double dxh = g[i] * gain[i];
          dgain[i] += g[i] * xh;
          dbias[i] += g[i];
          mean_dxh += dxh;
          mean_dxh_xh += dxh * xh;
        }
        mean_dxh /= n;
        mean_dxh_xh /= n;
        for (int i = 0; i < n; ++i) {
          double xh = (x[i] - mu) * inv;
          double dxh = g[i] * gain[i];
          dx[i] += inv * (dxh - mean_dxh - xh * mean_dxh_xh);
        }
        break;
      }
      case Op::CosineRows: {
        NodeId mn = in[0], kn = in[1];
        const double* M = value(mn);
        const double* key = value(kn);
        double* dM = gradp(mn);
        double* dk = gradp(kn);
        const double* y = value(id);
        double knorm = node.d0;
        double eps = node.d1;
        int cols_m = cols(mn);
        for (int i = 0; i < node.rows; ++i) {
          if (g[i] == 0.0) continue;
          const double* row = M + static_cast<size_t>(i) * cols_m;
          double* drow = dM + static_cast<size_t>(i) * cols_m;
          double rn2 = 0.0;
          for (int j = 0; j < cols_m; ++j) rn2 += row[j] * row[j];
          double rn = std::sqrt(rn2);
          double denom = rn * knorm + eps;
          double gi = g[i] / denom;
          // y = num/denom; d num/d row = key, d denom/d row = knorm*row/rn
          double row_coef = (rn > 0.0) ? y[i] * knorm / rn : 0.0;
          double key_coef = (knorm > 0.0) ? y[i] * rn / knorm : 0.0;
          for (int j = 0; j < cols_m; ++j) {
            drow[j] += gi * (key[j] - row_coef * row[j]);
            dk[j] += gi * (row[j] - key_coef * key[j]);
          }
        }
        break;
      }
      case Op::Sharpen: {
        const double* w = value(in[0]);
        const double* y = value(id);
        double gamma = value(in[1])[0];
        double* dw = gradp(in[0]);
        double sum = node.d0;  // saved normalizer, so u_i = y_i * sum
        double gy = 0.0;
        for (int i = 0; i < n; ++i) gy += g[i] * y[i];
        double dgamma = 0.0;
        for (int i = 0; i < n; ++i) {
          double wi = std::max(w[i], 1e-300);
          double ui = y[i] * sum;
          double grad_u = (g[i] - gy) / sum;
          dw[i] += grad_u * gamma * ui / wi;
          dgamma += grad_u * ui * std::log(wi);
        }
        gradp(in[1])[0] += dgamma;
        break;
      }
      case Op::Dot: {
        const double* u = value(in[0]);
        const double* v = value(in[1]);
        double* du = gradp(in[0]);
        double* dv = gradp(in[1]);
        double gs = g[0];
        for (int i = 0, m = rows(in[0]); i < m; ++i) {
          du[i] += gs * v[i];
          dv[i] += gs * u[i];
        }
        break;
      }
      case Op::SoftmaxXent: {
        const double* z = value(in[0]);
        double* dz = gradp(in[0]);
        int m = rows(in[0]);
        double mx = z[0];
        for (int i = 1; i < m; ++i) mx = std::max(mx, z[i]);
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += std::exp(z[i] - mx);
        double gs = g[0];
        for (int i = 0; i < m; ++i) dz[i] += gs * (std::exp(z[i] - mx) / sum - (i == node.i0 ? 1.0 : 0.0));
        break;
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<NodeId> inputs_;
  std::vector<double> vals_, grads_;
  bool check_finite_ = false;
};

}  // namespace schemabind
