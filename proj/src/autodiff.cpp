#include "cade/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cade/error.hpp"

namespace cade::ad {

Parameter::Parameter(std::string name, Matrix value, bool row_sparse)
    : name_(std::move(name)),
      value_(std::move(value)),
      grad_(value_.rows(), value_.cols()),
      row_sparse_(row_sparse),
      touched_(value_.rows(), 0) {}

void Parameter::touch_all() { std::fill(touched_.begin(), touched_.end(), 1); }

std::size_t Parameter::touched_count() const {
  return static_cast<std::size_t>(std::count(touched_.begin(), touched_.end(), 1));
}

void Parameter::zero_grad() {
  if (grad_.rows() != value_.rows() || grad_.cols() != value_.cols()) {
    grad_ = Matrix(value_.rows(), value_.cols());
    touched_.assign(value_.rows(), 0);
    return;
  }
  if (row_sparse_) {
    for (std::size_t r = 0; r < value_.rows(); ++r) {
      if (!touched_[r]) continue;
      auto row = grad_.row(r);
      std::fill(row.begin(), row.end(), 0.0);
      touched_[r] = 0;
    }
  } else {
    grad_.set_zero();
    std::fill(touched_.begin(), touched_.end(), 0);
  }
}

const char* op_name(Op op) {
  switch (op) {
    case Op::kInput: return "input";
    case Op::kConstant: return "constant";
    case Op::kParameter: return "parameter";
    case Op::kMatmul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kAddRow: return "add_row";
    case Op::kMul: return "elementwise_mul";
    case Op::kScale: return "scale";
    case Op::kConcatCols: return "concat_cols";
    case Op::kConcatRows: return "concat_rows";
    case Op::kRowSlice: return "row_slice";
    case Op::kGatherRows: return "gather_rows";
    case Op::kTranspose: return "transpose";
    case Op::kReshape: return "reshape";
    case Op::kSigmoid: return "sigmoid";
    case Op::kRelu: return "relu";
    case Op::kLogSigmoid: return "log_sigmoid";
    case Op::kMeanRows: return "reduce_mean_rows";
    case Op::kMaxRows: return "reduce_max_rows";
    case Op::kColumnSums: return "column_sums";
    case Op::kRowSums: return "row_sums";
    case Op::kSum: return "sum";
    case Op::kSoftmaxFlat: return "softmax_flat";
    case Op::kDot: return "dot";
    case Op::kStopGradient: return "stop_gradient";
    case Op::kL2NormalizeRows: return "l2_normalize_rows";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Value / Tape

const Matrix& Value::data() const { return tape_->value_of(id_); }

const Matrix& Value::grad() const {
  const auto& node = tape_->nodes_[id_];
  return node.param ? node.param->grad() : node.grad;
}

double Value::scalar() const {
  const Matrix& m = data();
  if (m.size() != 1) throw ShapeError("Value::scalar on " + shape_string(m));
  return m[0];
}

const Matrix& Tape::value_of(int id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value() : n.value;
}

Matrix& Tape::grad_buffer(int id, bool touch_all) {
  Node& n = nodes_[id];
  if (n.param) {
    Matrix& g = n.param->grad();
    if (!g.same_shape(n.param->value())) n.param->zero_grad();
    if (touch_all) n.param->touch_all();
    return g;
  }
  return n.grad;
}

Value Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Value(this, static_cast<int>(nodes_.size() - 1));
}

Value Tape::input(Matrix m) {
  Node n;
  n.op = Op::kInput;
  n.grad = Matrix(m.rows(), m.cols());
  n.value = std::move(m);
  n.needs_grad = true;
  return push(std::move(n));
}

Value Tape::constant(Matrix m) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(m);
  return push(std::move(n));
}

Value Tape::parameter(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Value(this, it->second);
  Node n;
  n.op = Op::kParameter;
  n.param = &p;
  n.needs_grad = true;
  Value v = push(std::move(n));
  param_nodes_[&p] = v.id();
  return v;
}

void Tape::backward(Value loss) {
  if (loss.tape() != this) throw Error("backward: loss belongs to a different tape");
  const Matrix& lv = value_of(loss.id());
  if (lv.size() != 1) throw ShapeError("backward: loss must be scalar, got " + shape_string(lv));
  for (Node& n : nodes_) {
    if (n.op == Op::kInput || n.op == Op::kParameter || n.op == Op::kConstant) continue;
    if (n.needs_grad) {
      n.grad = Matrix(n.value.rows(), n.value.cols());
    } else {
      n.grad = Matrix();
    }
  }
  if (!nodes_[loss.id()].needs_grad) return;
  grad_buffer(loss.id())[0] += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    if (nodes_[id].needs_grad) backward_node(id);
  }
}

// ---------------------------------------------------------------------------
// Recording helpers

struct OpRecorder {
  using Node = Tape::Node;

  static Tape& tape_of(std::initializer_list<Value> vs, const char* op) {
    Tape* t = nullptr;
    for (const Value& v : vs) {
      if (!v.valid()) throw Error(std::string(op) + ": invalid operand");
      if (t && v.tape() != t) throw Error(std::string(op) + ": operands from different tapes");
      t = v.tape();
    }
    return *t;
  }

  static Value emit(Tape& t, Op op, std::vector<int> in, Matrix value) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    for (int i : in) n.needs_grad = n.needs_grad || t.nodes_[i].needs_grad;
    n.in = std::move(in);
    return t.push(std::move(n));
  }

  static Node& node(Value v) { return v.tape()->nodes_[v.id()]; }
};

namespace {

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                   shape_string(b));
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid_scalar(double x) {
  return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x)));
}

constexpr double kNormEps = 1e-12;

}  // namespace

Value matmul(Value a, Value b) {
  Tape& t = OpRecorder::tape_of({a, b}, "matmul");
  const Matrix& A = a.data();
  const Matrix& B = b.data();
  if (A.cols() != B.rows()) shape_fail("matmul", A, B);
  return OpRecorder::emit(t, Op::kMatmul, {a.id(), b.id()}, cade::matmul(A, B));
}

Value add(Value a, Value b) {
  Tape& t = OpRecorder::tape_of({a, b}, "add");
  const Matrix& A = a.data();
  const Matrix& B = b.data();
  Matrix out = A;
  if (A.same_shape(B)) {
    out += B;
    return OpRecorder::emit(t, Op::kAdd, {a.id(), b.id()}, std::move(out));
  }
  if (B.rows() == 1 && B.cols() == A.cols()) {
    for (std::size_t r = 0; r < out.rows(); ++r)
      for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += B(0, c);
    return OpRecorder::emit(t, Op::kAddRow, {a.id(), b.id()}, std::move(out));
  }
  shape_fail("add", A, B);
}

Value elementwise_mul(Value a, Value b) {
  Tape& t = OpRecorder::tape_of({a, b}, "elementwise_mul");
  const Matrix& A = a.data();
  const Matrix& B = b.data();
  if (!A.same_shape(B)) shape_fail("elementwise_mul", A, B);
  Matrix out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return OpRecorder::emit(t, Op::kMul, {a.id(), b.id()}, std::move(out));
}

Value scale(Value a, double c) {
  Tape& t = OpRecorder::tape_of({a}, "scale");
  Matrix out = a.data();
  out *= c;
  Value v = OpRecorder::emit(t, Op::kScale, {a.id()}, std::move(out));
  OpRecorder::node(v).scalar = c;
  return v;
}

Value concat_cols(Value a, Value b) {
  Tape& t = OpRecorder::tape_of({a, b}, "concat_cols");
  const Matrix& A = a.data();
  const Matrix& B = b.data();
  if (A.rows() != B.rows()) shape_fail("concat_cols", A, B);
  Matrix out(A.rows(), A.cols() + B.cols());
  for (std::size_t r = 0; r < A.rows(); ++r) {
    std::copy(A.row(r).begin(), A.row(r).end(), out.row(r).begin());
    std::copy(B.row(r).begin(), B.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(A.cols()));
  }
  return OpRecorder::emit(t, Op::kConcatCols, {a.id(), b.id()}, std::move(out));
}

Value concat_rows(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  Tape& t = OpRecorder::tape_of({parts[0]}, "concat_rows");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  std::vector<int> in;
  for (const Value& p : parts) {
    if (p.tape() != &t) throw Error("concat_rows: operands from different tapes");
    if (p.cols() != cols) shape_fail("concat_rows", parts[0].data(), p.data());
    rows += p.rows();
    in.push_back(p.id());
  }
  Matrix out(rows, cols);
  std::size_t r0 = 0;
  for (const Value& p : parts) {
    std::copy(p.data().values().begin(), p.data().values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(r0 * cols));
    r0 += p.rows();
  }
  return OpRecorder::emit(t, Op::kConcatRows, std::move(in), std::move(out));
}

Value row_slice(Value a, std::size_t begin, std::size_t count) {
  Tape& t = OpRecorder::tape_of({a}, "row_slice");
  const Matrix& A = a.data();
  if (begin + count > A.rows()) {
    throw ShapeError("row_slice: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of " + shape_string(A));
  }
  Matrix out(count, A.cols());
  std::copy(A.data() + begin * A.cols(), A.data() + (begin + count) * A.cols(), out.data());
  Value v = OpRecorder::emit(t, Op::kRowSlice, {a.id()}, std::move(out));
  OpRecorder::node(v).a = begin;
  return v;
}

Value gather_rows(Value a, std::span<const std::int64_t> index) {
  Tape& t = OpRecorder::tape_of({a}, "gather_rows");
  const Matrix& A = a.data();
  Matrix out(index.size(), A.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0) continue;
    if (static_cast<std::size_t>(index[i]) >= A.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(index[i]) + " out of " +
                       shape_string(A));
    }
    const auto src = A.row(static_cast<std::size_t>(index[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  Value v = OpRecorder::emit(t, Op::kGatherRows, {a.id()}, std::move(out));
  OpRecorder::node(v).index.assign(index.begin(), index.end());
  return v;
}

Value transpose(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "transpose");
  return OpRecorder::emit(t, Op::kTranspose, {a.id()}, cade::transpose(a.data()));
}

Value reshape(Value a, std::size_t rows, std::size_t cols) {
  Tape& t = OpRecorder::tape_of({a}, "reshape");
  const Matrix& A = a.data();
  if (rows * cols != A.size()) {
    throw ShapeError("reshape: " + shape_string(A) + " to [" + std::to_string(rows) + "x" +
                     std::to_string(cols) + "]");
  }
  Matrix out(rows, cols);
  out.values() = A.values();
  return OpRecorder::emit(t, Op::kReshape, {a.id()}, std::move(out));
}

Value sigmoid(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "sigmoid");
  Matrix out = a.data();
  for (double& x : out.values()) x = sigmoid_scalar(x);
  return OpRecorder::emit(t, Op::kSigmoid, {a.id()}, std::move(out));
}

Value relu(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "relu");
  Matrix out = a.data();
  for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
  return OpRecorder::emit(t, Op::kRelu, {a.id()}, std::move(out));
}

Value log_sigmoid(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "log_sigmoid");
  Matrix out = a.data();
  for (double& x : out.values()) x = log_sigmoid_scalar(x);
  return OpRecorder::emit(t, Op::kLogSigmoid, {a.id()}, std::move(out));
}

namespace {

std::size_t resolve_group(const char* op, const Matrix& A, std::size_t group) {
  if (group == 0) group = A.rows();
  if (group == 0 || A.rows() % group != 0) {
    throw ShapeError(std::string(op) + ": " + std::to_string(A.rows()) +
                     " rows not divisible into groups of " + std::to_string(group));
  }
  return group;
}

}  // namespace

Value reduce_mean_rows(Value a, std::size_t group) {
  Tape& t = OpRecorder::tape_of({a}, "reduce_mean_rows");
  const Matrix& A = a.data();
  group = resolve_group("reduce_mean_rows", A, group);
  const std::size_t n = A.rows() / group;
  Matrix out(n, A.cols());
  const double inv = 1.0 / static_cast<double>(group);
  for (std::size_t g = 0; g < n; ++g) {
    auto o = out.row(g);
    for (std::size_t r = g * group; r < (g + 1) * group; ++r) {
      const auto src = A.row(r);
      for (std::size_t c = 0; c < A.cols(); ++c) o[c] += src[c];
    }
    for (double& x : o) x *= inv;
  }
  Value v = OpRecorder::emit(t, Op::kMeanRows, {a.id()}, std::move(out));
  OpRecorder::node(v).a = group;
  return v;
}

Value reduce_max_rows(Value a, std::size_t group) {
  Tape& t = OpRecorder::tape_of({a}, "reduce_max_rows");
  const Matrix& A = a.data();
  group = resolve_group("reduce_max_rows", A, group);
  const std::size_t n = A.rows() / group;
  Matrix out(n, A.cols());
  std::vector<std::uint32_t> arg(n * A.cols());
  for (std::size_t g = 0; g < n; ++g) {
    for (std::size_t c = 0; c < A.cols(); ++c) {
      std::size_t best = g * group;
      for (std::size_t r = best + 1; r < (g + 1) * group; ++r)
        if (A(r, c) > A(best, c)) best = r;
      out(g, c) = A(best, c);
      arg[g * A.cols() + c] = static_cast<std::uint32_t>(best);
    }
  }
  Value v = OpRecorder::emit(t, Op::kMaxRows, {a.id()}, std::move(out));
  OpRecorder::node(v).a = group;
  OpRecorder::node(v).argmax = std::move(arg);
  return v;
}

Value column_sums(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "column_sums");
  const Matrix& A = a.data();
  Matrix out(1, A.cols());
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < A.cols(); ++c) out(0, c) += A(r, c);
  return OpRecorder::emit(t, Op::kColumnSums, {a.id()}, std::move(out));
}

Value row_sums(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "row_sums");
  const Matrix& A = a.data();
  Matrix out(A.rows(), 1);
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < A.cols(); ++c) out(r, 0) += A(r, c);
  return OpRecorder::emit(t, Op::kRowSums, {a.id()}, std::move(out));
}

Value sum(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "sum");
  Matrix out(1, 1);
  for (double x : a.data().values()) out[0] += x;
  return OpRecorder::emit(t, Op::kSum, {a.id()}, std::move(out));
}

Value softmax_flat(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "softmax_flat");
  const Matrix& A = a.data();
  if (A.empty()) throw ShapeError("softmax_flat: empty operand");
  const double mx = *std::max_element(A.values().begin(), A.values().end());
  Matrix out(A.rows(), A.cols());
  double z = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    out[i] = std::exp(A[i] - mx);
    z += out[i];
  }
  for (double& x : out.values()) x /= z;
  return OpRecorder::emit(t, Op::kSoftmaxFlat, {a.id()}, std::move(out));
}

Value dot(Value a, Value b) {
  Tape& t = OpRecorder::tape_of({a, b}, "dot");
  const Matrix& A = a.data();
  const Matrix& B = b.data();
  if (!A.same_shape(B)) shape_fail("dot", A, B);
  Matrix out(1, 1);
  for (std::size_t i = 0; i < A.size(); ++i) out[0] += A[i] * B[i];
  return OpRecorder::emit(t, Op::kDot, {a.id(), b.id()}, std::move(out));
}

Value stop_gradient(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "stop_gradient");
  Value v = OpRecorder::emit(t, Op::kStopGradient, {a.id()}, a.data());
  OpRecorder::node(v).needs_grad = false;
  return v;
}

Value l2_normalize_rows(Value a) {
  Tape& t = OpRecorder::tape_of({a}, "l2_normalize_rows");
  Matrix out = a.data();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double s = 0.0;
    for (double x : row) s += x * x;
    const double norm = std::sqrt(s + kNormEps);
    for (double& x : row) x /= norm;
  }
  return OpRecorder::emit(t, Op::kL2NormalizeRows, {a.id()}, std::move(out));
}

// ---------------------------------------------------------------------------
// Backward rules

void Tape::backward_node(int id) {
  Node& n = nodes_[id];
  const Matrix& g = n.param ? n.param->grad() : n.grad;
  auto wants = [&](int k) { return nodes_[n.in[k]].needs_grad; };
  auto in_value = [&](int k) -> const Matrix& { return value_of(n.in[k]); };

  switch (n.op) {
    case Op::kInput:
    case Op::kConstant:
    case Op::kParameter:
    case Op::kStopGradient:
      break;
    case Op::kMatmul: {
      if (wants(0)) matmul_a_bt_add(g, in_value(1), grad_buffer(n.in[0]));
      if (wants(1)) matmul_at_b_add(in_value(0), g, grad_buffer(n.in[1]));
      break;
    }
    case Op::kAdd:
      if (wants(0)) grad_buffer(n.in[0]) += g;
      if (wants(1)) grad_buffer(n.in[1]) += g;
      break;
    case Op::kAddRow: {
      if (wants(0)) grad_buffer(n.in[0]) += g;
      if (wants(1)) {
        Matrix& gb = grad_buffer(n.in[1]);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      }
      break;
    }
    case Op::kMul: {
      if (wants(0)) {
        Matrix& ga = grad_buffer(n.in[0]);
        const Matrix& B = in_value(1);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
      }
      if (wants(1)) {
        Matrix& gb = grad_buffer(n.in[1]);
        const Matrix& A = in_value(0);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
      }
      break;
    }
    case Op::kScale: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.scalar;
      break;
    }
    case Op::kConcatCols: {
      const std::size_t ca = in_value(0).cols();
      const std::size_t cb = in_value(1).cols();
      if (wants(0)) {
        Matrix& ga = grad_buffer(n.in[0]);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
      }
      if (wants(1)) {
        Matrix& gb = grad_buffer(n.in[1]);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
      }
      break;
    }
    case Op::kConcatRows: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.in.size(); ++k) {
        const std::size_t count = value_of(n.in[k]).size();
        if (nodes_[n.in[k]].needs_grad) {
          Matrix& gk = grad_buffer(n.in[k]);
          for (std::size_t i = 0; i < count; ++i) gk[i] += g[offset + i];
        }
        offset += count;
      }
      break;
    }
    case Op::kRowSlice: {
      Matrix& ga = grad_buffer(n.in[0]);
      const std::size_t base = n.a * g.cols();
      for (std::size_t i = 0; i < g.size(); ++i) ga[base + i] += g[i];
      break;
    }
    case Op::kGatherRows: {
      Node& src = nodes_[n.in[0]];
      Matrix& ga = grad_buffer(n.in[0], /*touch_all=*/false);
      for (std::size_t i = 0; i < n.index.size(); ++i) {
        if (n.index[i] < 0) continue;
        const auto r = static_cast<std::size_t>(n.index[i]);
        auto dst = ga.row(r);
        const auto gi = g.row(i);
        for (std::size_t c = 0; c < g.cols(); ++c) dst[c] += gi[c];
        if (src.param) src.param->touch_row(r);
      }
      break;
    }
    case Op::kTranspose: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
      break;
    }
    case Op::kReshape: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      break;
    }
    case Op::kSigmoid: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
      break;
    }
    case Op::kRelu: {
      Matrix& ga = grad_buffer(n.in[0]);
      const Matrix& A = in_value(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += A[i] > 0.0 ? g[i] : 0.0;
      break;
    }
    case Op::kLogSigmoid: {
      Matrix& ga = grad_buffer(n.in[0]);
      const Matrix& A = in_value(0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * sigmoid_scalar(-A[i]);
      break;
    }
    case Op::kMeanRows: {
      Matrix& ga = grad_buffer(n.in[0]);
      const double inv = 1.0 / static_cast<double>(n.a);
      for (std::size_t r = 0; r < ga.rows(); ++r) {
        const auto gi = g.row(r / n.a);
        auto dst = ga.row(r);
        for (std::size_t c = 0; c < ga.cols(); ++c) dst[c] += gi[c] * inv;
      }
      break;
    }
    case Op::kMaxRows: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (std::size_t gr = 0; gr < g.rows(); ++gr)
        for (std::size_t c = 0; c < g.cols(); ++c)
          ga(n.argmax[gr * g.cols() + c], c) += g(gr, c);
      break;
    }
    case Op::kColumnSums: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (std::size_t r = 0; r < ga.rows(); ++r)
        for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(0, c);
      break;
    }
    case Op::kRowSums: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (std::size_t r = 0; r < ga.rows(); ++r)
        for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(r, 0);
      break;
    }
    case Op::kSum: {
      Matrix& ga = grad_buffer(n.in[0]);
      for (double& x : ga.values()) x += g[0];
      break;
    }
    case Op::kSoftmaxFlat: {
      Matrix& ga = grad_buffer(n.in[0]);
      double inner = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * n.value[i];
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.value[i] * (g[i] - inner);
      break;
    }
    case Op::kDot: {
      if (wants(0)) {
        Matrix& ga = grad_buffer(n.in[0]);
        const Matrix& B = in_value(1);
        for (std::size_t i = 0; i < B.size(); ++i) ga[i] += g[0] * B[i];
      }
      if (wants(1)) {
        Matrix& gb = grad_buffer(n.in[1]);
        const Matrix& A = in_value(0);
        for (std::size_t i = 0; i < A.size(); ++i) gb[i] += g[0] * A[i];
      }
      break;
    }
    case Op::kL2NormalizeRows: {
      Matrix& ga = grad_buffer(n.in[0]);
      const Matrix& A = in_value(0);
      for (std::size_t r = 0; r < A.rows(); ++r) {
        double s = 0.0, yg = 0.0;
        for (std::size_t c = 0; c < A.cols(); ++c) {
          s += A(r, c) * A(r, c);
          yg += n.value(r, c) * g(r, c);
        }
        const double norm = std::sqrt(s + kNormEps);
        for (std::size_t c = 0; c < A.cols(); ++c) {
          ga(r, c) += (g(r, c) - n.value(r, c) * yg) / norm;
        }
      }
      break;
    }
  }
}

}  // namespace cade::ad
