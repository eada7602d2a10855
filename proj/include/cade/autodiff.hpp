#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cade/matrix.hpp"

namespace cade::ad {

// A trainable matrix with a persistent gradient accumulator. Row-sparse
// parameters (the global bias table) track which rows received gradient
// so the optimizer can skip the rest.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Matrix value, bool row_sparse = false);

  const std::string& name() const { return name_; }
  Matrix& value() { return value_; }
  const Matrix& value() const { return value_; }
  Matrix& grad() { return grad_; }
  const Matrix& grad() const { return grad_; }

  bool row_sparse() const { return row_sparse_; }
  void touch_row(std::size_t r) { touched_[r] = 1; }
  void touch_all();
  bool touched(std::size_t r) const { return touched_[r] != 0; }
  std::size_t touched_count() const;

  // Clears the gradient (and touch marks).
  void zero_grad();

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
  bool row_sparse_ = false;
  std::vector<std::uint8_t> touched_;
};

enum class Op : std::uint8_t {
  kInput,
  kConstant,
  kParameter,
  kMatmul,
  kAdd,
  kAddRow,
  kMul,
  kScale,
  kConcatCols,
  kConcatRows,
  kRowSlice,
  kGatherRows,
  kTranspose,
  kReshape,
  kSigmoid,
  kRelu,
  kLogSigmoid,
  kMeanRows,
  kMaxRows,
  kColumnSums,
  kRowSums,
  kSum,
  kSoftmaxFlat,
  kDot,
  kStopGradient,
  kL2NormalizeRows,
};

const char* op_name(Op op);

class Tape;

// Handle to a tape node. Cheap to copy; valid while its tape lives.
class Value {
 public:
  Value() = default;

  const Matrix& data() const;
  // Gradient after Tape::backward. For parameter leaves this is the
  // parameter's accumulator.
  const Matrix& grad() const;
  std::size_t rows() const { return data().rows(); }
  std::size_t cols() const { return data().cols(); }
  double scalar() const;
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Value(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode recording. Operations evaluate eagerly and append a node;
// backward visits nodes in exact reverse order. A tape is single-threaded.
// Parameter values must not change while a tape referencing them is alive.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf whose gradient is kept on the tape.
  Value input(Matrix m);
  // Leaf that never receives gradient.
  Value constant(Matrix m);
  // Leaf bound to a parameter; repeated calls return the same node.
  Value parameter(Parameter& p);

  // Seeds d(loss)/d(loss) = 1 and propagates. Intermediate gradients are
  // reset on each call; leaf and parameter gradients accumulate, so two
  // calls without zeroing double them. Throws ShapeError for a non-scalar loss.
  void backward(Value loss);

  std::size_t size() const { return nodes_.size(); }
  Op op(int id) const { return nodes_[id].op; }
  std::span<const int> inputs(int id) const { return nodes_[id].in; }

 private:
  struct Node {
    Op op = Op::kInput;
    std::vector<int> in;
    Matrix value;
    Matrix grad;
    Parameter* param = nullptr;
    bool needs_grad = false;
    double scalar = 0.0;
    std::size_t a = 0;
    std::size_t b = 0;
    std::vector<std::int64_t> index;
    std::vector<std::uint32_t> argmax;
  };

  friend class Value;
  friend struct OpRecorder;

  const Matrix& value_of(int id) const;
  Matrix& grad_buffer(int id, bool touch_all = true);
  Value push(Node node);
  void backward_node(int id);

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, int> param_nodes_;
};

// Kernel set. Each records onto the tape of its first operand; all operands
// must share a tape. Shapes must match exactly except where noted.
Value matmul(Value a, Value b);
// Same shapes, or b a 1 x cols row vector broadcast over a's rows.
Value add(Value a, Value b);
Value elementwise_mul(Value a, Value b);
Value scale(Value a, double c);
Value concat_cols(Value a, Value b);
Value concat_rows(std::span<const Value> parts);
Value row_slice(Value a, std::size_t begin, std::size_t count);
// Row i of the result is row index[i] of a, or zeros when index[i] < 0.
Value gather_rows(Value a, std::span<const std::int64_t> index);
Value transpose(Value a);
Value reshape(Value a, std::size_t rows, std::size_t cols);
Value sigmoid(Value a);
Value relu(Value a);
// log(sigmoid(x)) evaluated stably.
Value log_sigmoid(Value a);
// Mean / max over consecutive groups of `group` rows; group 0 means all rows.
Value reduce_mean_rows(Value a, std::size_t group = 0);
// Ties route gradient to the first maximal row of the group.
Value reduce_max_rows(Value a, std::size_t group = 0);
// 1 x cols: sum over rows.
Value column_sums(Value a);
// rows x 1: sum over columns.
Value row_sums(Value a);
Value sum(Value a);
// Softmax over all entries jointly.
Value softmax_flat(Value a);
// Frobenius inner product of equally shaped operands; 1 x 1.
Value dot(Value a, Value b);
// Passes the value through; no gradient flows back.
Value stop_gradient(Value a);
Value l2_normalize_rows(Value a);

}  // namespace cade::ad
