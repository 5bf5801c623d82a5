#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace deim {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::shared_ptr<std::vector<double>> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::string op = "leaf";
  std::string label;
  std::vector<std::shared_ptr<Node>> parents;
  // Pushes this node's grad into its parents. Never captures the node itself.
  std::function<void(Node&)> backward_fn;

  std::vector<double>& ensure_grad();
};

}  // namespace detail

/// Dense row-major tensor of doubles with an optional reverse-mode tape.
///
/// A Tensor is a cheap handle; copies share the same node. Values of an
/// op's result never change after construction. Leaves (parameters, inputs)
/// may be mutated in place through mutable_values(), which is how the
/// optimizer updates weights between steps.
///
/// The tape is built implicitly: an op records its inputs and a backward
/// closure whenever gradient recording is enabled on the calling thread and
/// at least one input requires grad. Graphs are not thread-safe; build and
/// differentiate each graph on one thread.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t rows() const;  // extent 0 of a rank-2 tensor
  std::size_t cols() const;  // extent 1 of a rank-2 tensor

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Reverse pass from a single-element tensor. Seeds d(self)/d(self) = 1,
  /// then visits every reachable node that requires grad exactly once in
  /// reverse topological order. Leaf grads accumulate across calls.
  /// Returns the number of nodes visited.
  std::size_t backward();

  /// New leaf holding a copy of the values, disconnected from any tape.
  Tensor detach() const;
  /// New leaf sharing this tensor's value storage but with its own grad.
  /// Lets several threads differentiate through the same parameters.
  Tensor alias() const;

  Tensor& set_label(std::string label);
  const std::string& label() const;
  const std::string& op() const;
  bool is_leaf() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  const detail::Node& checked() const;
  detail::Node& checked();

  std::shared_ptr<detail::Node> node_;
};

/// Whether ops on this thread currently record the tape.
bool grad_enabled();

/// Disables tape recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Every node reachable from root, parents before children.
std::vector<std::shared_ptr<detail::Node>> topological_order(const Tensor& root);

/// Labels attached anywhere in root's graph (used for structural audits).
std::vector<std::string> graph_labels(const Tensor& root);

}  // namespace deim
