//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_AUTODIFF_H_
#define POLISH_AUTODIFF_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace polish::ad {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Owns parameters at stable addresses.
class ParameterSet {
public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet &) = delete;
  ParameterSet &operator=(const ParameterSet &) = delete;

  // Zero-initialized.
  Parameter &add(std::string name, int rows, int cols);

  std::size_t size() const { return params_.size(); }
  Parameter &operator[](std::size_t k) { return params_[k]; }
  const Parameter &operator[](std::size_t k) const { return params_[k]; }
  Parameter *find(const std::string &name);

  // Total number of scalar entries.
  std::size_t scalar_count() const;
  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

private:
  std::deque<Parameter> params_;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Matrix &m, int fan_in, int fan_out, std::mt19937_64 &rng);

class Tape;

// Handle to a tape node.
class Var {
public:
  Var() = default;

  const Matrix &value() const;
  double scalar() const { return value()(0, 0); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape *tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape;
  Var(Tape *tape, int id): tape_(tape), id_(id) { }

  Tape *tape_ = nullptr;
  int id_ = -1;
};

// Records operations for one reverse pass. Every node value is checked for
// finiteness; a NaN or Inf raises NonFinite naming the operation.
class Tape {
public:
  using Backward = std::function<void(Tape &, int)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Matrix value);
  Var scalar(double v);
  // One leaf per parameter per tape.
  Var param(Parameter &p);

  // Seeds d(loss)/d(loss) = 1 and adds leaf gradients into Parameter::grad.
  void backward(Var loss);

  // The backward function is dropped when no input needs a gradient.
  Var push(const char *op, Matrix value, std::initializer_list<int> inputs,
           Backward backward);
  Var push(const char *op, Matrix value, std::span<const int> inputs,
           Backward backward);

  const Matrix &value(int id) const {
    const Node &n = nodes_[id];
    return n.param != nullptr ? n.param->value : n.value;
  }
  // Gradient buffer of a node, allocated on first use. Parameter leaves
  // write straight into Parameter::grad.
  Matrix &grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Hash of the sign pattern of every relu input recorded so far. Two
  // evaluations with equal signatures lie on the same linear piece.
  std::uint64_t relu_signature() const { return relu_signature_; }
  void note_relu(const Matrix &input);

private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool needs_grad = false;
    Backward backward;
    Parameter *param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<Parameter *, int> param_nodes_;
  std::uint64_t relu_signature_ = 0xcbf29ce484222325ULL;
};

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var cmul(Var a, Var b);
// a (n x c) plus a 1 x c row on every row.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var one_minus(Var a);

Var hcat(std::span<const Var> parts);
Var vcat(std::span<const Var> parts);
Var row(Var a, int r);
Var gather_rows(Var a, std::span<const int> idx);
// out[idx[k]] += a[k]; out has n rows.
Var scatter_rows(Var a, std::span<const int> idx, int n);
Var sum_rows(Var a);
Var mean_rows(Var a);
Var repeat_rows(Var a, int n);
Var sum_all(Var a);
// Dot product of two same-shape operands, 1 x 1.
Var dot(Var a, Var b);

// Column-wise over an n x 1 operand.
Var softmax(Var a);
Var log_softmax(Var a);
Var logsumexp(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }

// Clamp bounds for probabilities inside logarithms.
inline constexpr double kProbFloor = 1e-12;

// KL(target || softmax(logits)) with 0 log 0 = 0.
Var kl_divergence(std::span<const double> target, Var logits);
// Sum of binary cross-entropies of n x 1 probabilities against 0/1 targets,
// with probabilities clamped to [kProbFloor, 1 - kProbFloor].
Var binary_cross_entropy(Var probs, std::span<const double> targets);
// -log softmax(logits)[target].
Var cross_entropy(Var logits, int target);

}  // namespace polish::ad

#endif  // POLISH_AUTODIFF_H_
