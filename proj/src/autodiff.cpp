//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/autodiff.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "polish/error.h"

namespace polish::ad {

Parameter &ParameterSet::add(std::string name, int rows, int cols) {
  Parameter &p = params_.emplace_back();
  p.name = std::move(name);
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  return p;
}

Parameter *ParameterSet::find(const std::string &name) {
  for (Parameter &p: params_) {
    if (p.name == name)
      return &p;
  }
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const Parameter &p: params_)
    n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (Parameter &p: params_)
    p.grad.setZero();
}

void glorot_uniform(Matrix &m, int fan_in, int fan_out, std::mt19937_64 &rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      m(r, c) = dist(rng);
  }
}

const Matrix &Var::value() const { return tape_->value(id_); }

Var Tape::push(const char *op, Matrix value, std::span<const int> inputs,
               Backward backward) {
  if (!value.allFinite())
    throw NonFinite(std::string("non-finite value produced by ") + op);
  bool needs = false;
  for (int id: inputs)
    needs |= nodes_[id].needs_grad;
  Node &n = nodes_.emplace_back();
  n.value = std::move(value);
  n.needs_grad = needs;
  if (needs)
    n.backward = std::move(backward);
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::push(const char *op, Matrix value, std::initializer_list<int> inputs,
               Backward backward) {
  return push(op, std::move(value),
              std::span<const int>(inputs.begin(), inputs.size()),
              std::move(backward));
}

Var Tape::constant(Matrix value) {
  return push("constant", std::move(value), {}, {});
}

Var Tape::scalar(double v) { return constant(Matrix::Constant(1, 1, v)); }

Var Tape::param(Parameter &p) {
  const auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end())
    return Var(this, it->second);
  if (!p.value.allFinite())
    throw NonFinite("non-finite parameter " + p.name);
  Node &n = nodes_.emplace_back();
  n.param = &p;
  n.needs_grad = true;
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var(this, id);
}

Matrix &Tape::grad(int id) {
  Node &n = nodes_[id];
  if (n.param != nullptr) {
    n.has_grad = true;
    return n.param->grad;
  }
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw DomainError("backward expects a 1 x 1 loss");
  if (!nodes_[loss.id()].needs_grad)
    return;
  grad(loss.id()).setOnes();
  for (int id = loss.id(); id >= 0; --id) {
    Node &n = nodes_[id];
    if (!n.has_grad || !n.backward)
      continue;
    if (!n.grad.allFinite())
      throw NonFinite("non-finite gradient at node " + std::to_string(id));
    n.backward(*this, id);
  }
}

namespace {
  Tape &tape_of(Var a) { return *a.tape(); }

  void require_same_shape(Var a, Var b, const char *op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw DomainError(std::string(op) + ": shape mismatch");
  }

  void require_column(Var a, const char *op) {
    if (a.cols() != 1 || a.rows() == 0)
      throw DomainError(std::string(op) + ": expects a non-empty column");
  }

  Matrix log_softmax_value(const Matrix &x) {
    const double m = x.maxCoeff();
    const double lse = m + std::log((x.array() - m).exp().sum());
    return (x.array() - lse).matrix();
  }
}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows())
    throw DomainError("matmul: inner dimension mismatch");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(
      "matmul", a.value() * b.value(), { ia, ib }, [ia, ib](Tape &t, int self) {
        const Matrix &g = t.grad(self);
        if (t.needs_grad(ia))
          t.grad(ia).noalias() += g * t.value(ib).transpose();
        if (t.needs_grad(ib))
          t.grad(ib).noalias() += t.value(ia).transpose() * g;
      });
}

Var transpose(Var a) {
  const int ia = a.id();
  return tape_of(a).push("transpose", a.value().transpose(), { ia },
                         [ia](Tape &t, int self) {
                           t.grad(ia) += t.grad(self).transpose();
                         });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push("add", a.value() + b.value(), { ia, ib },
                         [ia, ib](Tape &t, int self) {
                           if (t.needs_grad(ia))
                             t.grad(ia) += t.grad(self);
                           if (t.needs_grad(ib))
                             t.grad(ib) += t.grad(self);
                         });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push("sub", a.value() - b.value(), { ia, ib },
                         [ia, ib](Tape &t, int self) {
                           if (t.needs_grad(ia))
                             t.grad(ia) += t.grad(self);
                           if (t.needs_grad(ib))
                             t.grad(ib) -= t.grad(self);
                         });
}

Var cmul(Var a, Var b) {
  require_same_shape(a, b, "cmul");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push("cmul", a.value().cwiseProduct(b.value()), { ia, ib },
                         [ia, ib](Tape &t, int self) {
                           const Matrix &g = t.grad(self);
                           if (t.needs_grad(ia))
                             t.grad(ia) += g.cwiseProduct(t.value(ib));
                           if (t.needs_grad(ib))
                             t.grad(ib) += g.cwiseProduct(t.value(ia));
                         });
}

Var add_row(Var a, Var r) {
  if (r.rows() != 1 || r.cols() != a.cols())
    throw DomainError("add_row: shape mismatch");
  const int ia = a.id(), ir = r.id();
  Matrix out = a.value();
  out.rowwise() += r.value().row(0);
  return tape_of(a).push("add_row", std::move(out), { ia, ir },
                         [ia, ir](Tape &t, int self) {
                           const Matrix &g = t.grad(self);
                           if (t.needs_grad(ia))
                             t.grad(ia) += g;
                           if (t.needs_grad(ir))
                             t.grad(ir) += g.colwise().sum();
                         });
}

Var scale(Var a, double s) {
  const int ia = a.id();
  return tape_of(a).push("scale", a.value() * s, { ia },
                         [ia, s](Tape &t, int self) {
                           t.grad(ia) += s * t.grad(self);
                         });
}

void Tape::note_relu(const Matrix &input) {
  std::uint64_t h = relu_signature_;
  for (Eigen::Index k = 0; k < input.size(); ++k)
    h = (h ^ (input.data()[k] > 0.0 ? 1u : 2u)) * 0x100000001b3ULL;
  relu_signature_ = h;
}

Var relu(Var a) {
  const int ia = a.id();
  tape_of(a).note_relu(a.value());
  return tape_of(a).push(
      "relu", a.value().cwiseMax(0.0), { ia }, [ia](Tape &t, int self) {
        const Matrix &g = t.grad(self);
        const Matrix &x = t.value(ia);
        t.grad(ia) += (x.array() > 0.0).select(g.array(), 0.0).matrix();
      });
}

Var sigmoid(Var a) {
  const int ia = a.id();
  Matrix out = a.value().unaryExpr(
      [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return tape_of(a).push("sigmoid", std::move(out), { ia },
                         [ia](Tape &t, int self) {
                           const Matrix &y = t.value(self);
                           t.grad(ia).array() += t.grad(self).array() * y.array()
                                                 * (1.0 - y.array());
                         });
}

Var tanh(Var a) {
  const int ia = a.id();
  Matrix out = a.value().array().tanh().matrix();
  return tape_of(a).push("tanh", std::move(out), { ia },
                         [ia](Tape &t, int self) {
                           const Matrix &y = t.value(self);
                           t.grad(ia).array() += t.grad(self).array()
                                                 * (1.0 - y.array().square());
                         });
}

Var one_minus(Var a) {
  const int ia = a.id();
  return tape_of(a).push("one_minus", (1.0 - a.value().array()).matrix(),
                         { ia }, [ia](Tape &t, int self) {
                           t.grad(ia) -= t.grad(self);
                         });
}

namespace {
  std::vector<int> ids_of(std::span<const Var> parts) {
    std::vector<int> ids;
    ids.reserve(parts.size());
    for (const Var &p: parts)
      ids.push_back(p.id());
    return ids;
  }
}  // namespace

Var hcat(std::span<const Var> parts) {
  if (parts.empty())
    throw DomainError("hcat: no operands");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var &p: parts) {
    if (p.rows() != rows)
      throw DomainError("hcat: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (const Var &p: parts) {
    out.middleCols(at, p.cols()) = p.value();
    spans.emplace_back(p.id(), at);
    at += p.cols();
  }
  return tape_of(parts[0]).push(
      "hcat", std::move(out), ids_of(parts), [spans](Tape &t, int self) {
        const Matrix &g = t.grad(self);
        for (const auto &[id, start]: spans) {
          if (!t.needs_grad(id))
            continue;
          Matrix &dst = t.grad(id);
          dst += g.middleCols(start, dst.cols());
        }
      });
}

Var vcat(std::span<const Var> parts) {
  if (parts.empty())
    throw DomainError("vcat: no operands");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var &p: parts) {
    if (p.cols() != cols)
      throw DomainError("vcat: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (const Var &p: parts) {
    out.middleRows(at, p.rows()) = p.value();
    spans.emplace_back(p.id(), at);
    at += p.rows();
  }
  return tape_of(parts[0]).push(
      "vcat", std::move(out), ids_of(parts), [spans](Tape &t, int self) {
        const Matrix &g = t.grad(self);
        for (const auto &[id, start]: spans) {
          if (!t.needs_grad(id))
            continue;
          Matrix &dst = t.grad(id);
          dst += g.middleRows(start, dst.rows());
        }
      });
}

Var row(Var a, int r) {
  if (r < 0 || r >= a.rows())
    throw DomainError("row: index out of range");
  const int ia = a.id();
  return tape_of(a).push("row", a.value().row(r), { ia },
                         [ia, r](Tape &t, int self) {
                           t.grad(ia).row(r) += t.grad(self).row(0);
                         });
}

Var gather_rows(Var a, std::span<const int> idx) {
  const int ia = a.id();
  std::vector<int> rows(idx.begin(), idx.end());
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = a.value().row(rows[k]);
  return tape_of(a).push(
      "gather_rows", std::move(out), { ia }, [ia, rows](Tape &t, int self) {
        const Matrix &g = t.grad(self);
        Matrix &dst = t.grad(ia);
        for (std::size_t k = 0; k < rows.size(); ++k)
          dst.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
      });
}

Var scatter_rows(Var a, std::span<const int> idx, int n) {
  if (static_cast<std::size_t>(a.rows()) != idx.size())
    throw DomainError("scatter_rows: index count mismatch");
  const int ia = a.id();
  std::vector<int> rows(idx.begin(), idx.end());
  Matrix out = Matrix::Zero(n, a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k)
    out.row(rows[k]) += a.value().row(static_cast<Eigen::Index>(k));
  return tape_of(a).push(
      "scatter_rows", std::move(out), { ia }, [ia, rows](Tape &t, int self) {
        const Matrix &g = t.grad(self);
        Matrix &dst = t.grad(ia);
        for (std::size_t k = 0; k < rows.size(); ++k)
          dst.row(static_cast<Eigen::Index>(k)) += g.row(rows[k]);
      });
}

Var sum_rows(Var a) {
  const int ia = a.id();
  return tape_of(a).push("sum_rows", a.value().colwise().sum(), { ia },
                         [ia](Tape &t, int self) {
                           t.grad(ia).rowwise() += t.grad(self).row(0);
                         });
}

Var mean_rows(Var a) {
  if (a.rows() == 0)
    throw DomainError("mean_rows: empty operand");
  const int ia = a.id();
  const double inv = 1.0 / static_cast<double>(a.rows());
  return tape_of(a).push("mean_rows", a.value().colwise().mean(), { ia },
                         [ia, inv](Tape &t, int self) {
                           t.grad(ia).rowwise() += inv * t.grad(self).row(0);
                         });
}

Var repeat_rows(Var a, int n) {
  if (a.rows() != 1)
    throw DomainError("repeat_rows: expects a single row");
  const int ia = a.id();
  return tape_of(a).push("repeat_rows", a.value().replicate(n, 1), { ia },
                         [ia](Tape &t, int self) {
                           t.grad(ia) += t.grad(self).colwise().sum();
                         });
}

Var sum_all(Var a) {
  const int ia = a.id();
  return tape_of(a).push("sum_all", Matrix::Constant(1, 1, a.value().sum()),
                         { ia }, [ia](Tape &t, int self) {
                           t.grad(ia).array() += t.grad(self)(0, 0);
                         });
}

Var dot(Var a, Var b) {
  require_same_shape(a, b, "dot");
  const int ia = a.id(), ib = b.id();
  const double v = a.value().cwiseProduct(b.value()).sum();
  return tape_of(a).push("dot", Matrix::Constant(1, 1, v), { ia, ib },
                         [ia, ib](Tape &t, int self) {
                           const double g = t.grad(self)(0, 0);
                           if (t.needs_grad(ia))
                             t.grad(ia) += g * t.value(ib);
                           if (t.needs_grad(ib))
                             t.grad(ib) += g * t.value(ia);
                         });
}

Var softmax(Var a) {
  require_column(a, "softmax");
  const int ia = a.id();
  Matrix y = log_softmax_value(a.value()).array().exp().matrix();
  return tape_of(a).push("softmax", std::move(y), { ia },
                         [ia](Tape &t, int self) {
                           const Matrix &y = t.value(self);
                           const Matrix &g = t.grad(self);
                           const double inner = g.cwiseProduct(y).sum();
                           t.grad(ia).array() +=
                               y.array() * (g.array() - inner);
                         });
}

Var log_softmax(Var a) {
  require_column(a, "log_softmax");
  const int ia = a.id();
  return tape_of(a).push("log_softmax", log_softmax_value(a.value()), { ia },
                         [ia](Tape &t, int self) {
                           const Matrix &g = t.grad(self);
                           const Matrix p = t.value(self).array().exp();
                           t.grad(ia) += g - p * g.sum();
                         });
}

Var logsumexp(Var a) {
  require_column(a, "logsumexp");
  const int ia = a.id();
  const Matrix &x = a.value();
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return tape_of(a).push("logsumexp", Matrix::Constant(1, 1, lse), { ia },
                         [ia, lse](Tape &t, int self) {
                           const double g = t.grad(self)(0, 0);
                           t.grad(ia).array() +=
                               g * (t.value(ia).array() - lse).exp();
                         });
}

Var kl_divergence(std::span<const double> target, Var logits) {
  require_column(logits, "kl_divergence");
  if (static_cast<std::size_t>(logits.rows()) != target.size())
    throw DomainError("kl_divergence: length mismatch");
  const int ia = logits.id();
  const Matrix logp = log_softmax_value(logits.value());
  Eigen::VectorXd tv(static_cast<Eigen::Index>(target.size()));
  double v = 0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    tv(i) = target[k];
    if (target[k] > 0)
      v += target[k] * (std::log(target[k]) - logp(i, 0));
  }
  const double mass = tv.sum();
  return tape_of(logits).push(
      "kl_divergence", Matrix::Constant(1, 1, v), { ia },
      [ia, tv, logp, mass](Tape &t, int self) {
        const double g = t.grad(self)(0, 0);
        t.grad(ia) += g * (logp.array().exp() * mass - tv.array()).matrix();
      });
}

Var binary_cross_entropy(Var probs, std::span<const double> targets) {
  require_column(probs, "binary_cross_entropy");
  if (static_cast<std::size_t>(probs.rows()) != targets.size())
    throw DomainError("binary_cross_entropy: length mismatch");
  const int ia = probs.id();
  std::vector<double> q(targets.begin(), targets.end());
  const Matrix &p = probs.value();
  double v = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double pk = std::clamp(p(static_cast<Eigen::Index>(k), 0),
                                 kProbFloor, 1.0 - kProbFloor);
    v -= q[k] * std::log(pk) + (1.0 - q[k]) * std::log(1.0 - pk);
  }
  return tape_of(probs).push(
      "binary_cross_entropy", Matrix::Constant(1, 1, v), { ia },
      [ia, q](Tape &t, int self) {
        const double g = t.grad(self)(0, 0);
        const Matrix &p = t.value(ia);
        Matrix &dst = t.grad(ia);
        for (std::size_t k = 0; k < q.size(); ++k) {
          const auto i = static_cast<Eigen::Index>(k);
          const double pk = p(i, 0);
          if (pk < kProbFloor || pk > 1.0 - kProbFloor)
            continue;
          dst(i, 0) += g * (-q[k] / pk + (1.0 - q[k]) / (1.0 - pk));
        }
      });
}

Var cross_entropy(Var logits, int target) {
  require_column(logits, "cross_entropy");
  if (target < 0 || target >= logits.rows())
    throw DomainError("cross_entropy: target out of range");
  const int ia = logits.id();
  const Matrix logp = log_softmax_value(logits.value());
  return tape_of(logits).push(
      "cross_entropy", Matrix::Constant(1, 1, -logp(target, 0)), { ia },
      [ia, logp, target](Tape &t, int self) {
        const double g = t.grad(self)(0, 0);
        Matrix d = logp.array().exp();
        d(target, 0) -= 1.0;
        t.grad(ia) += g * d;
      });
}

}  // namespace polish::ad
