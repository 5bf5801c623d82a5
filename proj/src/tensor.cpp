#include "deim/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "deim/errors.hpp"

namespace deim {

namespace {
thread_local bool t_grad_enabled = true;
}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::vector<double>& detail::Node::ensure_grad() {
  if (grad.empty()) grad.assign(value->size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + to_string(shape));
  }
  if (deim::numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + to_string(shape) + " needs " +
                         std::to_string(deim::numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::make_shared<std::vector<double>>(std::move(values));
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = deim::numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::vector(std::initializer_list<double> values, bool requires_grad) {
  return Tensor({values.size()}, std::vector<double>(values), requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows, bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data), requires_grad);
}

const detail::Node& Tensor::checked() const {
  if (!node_) throw Error("use of undefined tensor");
  return *node_;
}

detail::Node& Tensor::checked() {
  if (!node_) throw Error("use of undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return checked().shape; }
std::size_t Tensor::numel() const { return checked().value->size(); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on non-matrix " + to_string(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on non-matrix " + to_string(shape()));
  return shape()[1];
}

std::span<const double> Tensor::values() const { return *checked().value; }
std::span<double> Tensor::mutable_values() { return *checked().value; }

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + to_string(shape()));
  return (*checked().value)[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return (*checked().value)[r * cols() + c];
}

bool Tensor::requires_grad() const { return checked().requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  if (!is_leaf()) throw Error("requires_grad can only be changed on leaves");
  checked().requires_grad = on;
  return *this;
}

bool Tensor::has_grad() const { return !checked().grad.empty(); }
std::span<const double> Tensor::grad() const { return checked().grad; }
std::span<double> Tensor::mutable_grad() { return checked().ensure_grad(); }

void Tensor::zero_grad() {
  auto& g = checked().grad;
  std::fill(g.begin(), g.end(), 0.0);
}

std::vector<std::shared_ptr<detail::Node>> topological_order(const Tensor& root) {
  std::vector<std::shared_ptr<detail::Node>> order;
  if (!root.defined()) return order;
  std::unordered_set<const detail::Node*> seen;
  // Iterative post-order DFS; graphs can be thousands of nodes deep.
  std::vector<std::pair<std::shared_ptr<detail::Node>, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      auto parent = node->parents[next++];
      if (seen.insert(parent.get()).second) stack.emplace_back(std::move(parent), 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

std::size_t Tensor::backward() {
  if (numel() != 1) {
    throw DimensionError("backward() needs a single-element root, got " + to_string(shape()));
  }
  if (!requires_grad()) return 0;
  const auto order = topological_order(*this);
  node_->ensure_grad()[0] += 1.0;
  std::size_t visited = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node& node = **it;
    if (!node.requires_grad) continue;
    ++visited;
    if (node.backward_fn && !node.grad.empty()) node.backward_fn(node);
  }
  return visited;
}

Tensor Tensor::detach() const {
  return Tensor(shape(), std::vector<double>(values().begin(), values().end()));
}

Tensor Tensor::alias() const {
  if (!is_leaf()) throw Error("alias() is only defined for leaves");
  auto node = std::make_shared<detail::Node>();
  node->shape = checked().shape;
  node->value = checked().value;
  node->requires_grad = checked().requires_grad;
  node->label = checked().label;
  return Tensor(std::move(node));
}

Tensor& Tensor::set_label(std::string label) {
  checked().label = std::move(label);
  return *this;
}

const std::string& Tensor::label() const { return checked().label; }
const std::string& Tensor::op() const { return checked().op; }
bool Tensor::is_leaf() const { return checked().parents.empty() && !checked().backward_fn; }

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

std::vector<std::string> graph_labels(const Tensor& root) {
  std::vector<std::string> labels;
  for (const auto& node : topological_order(root)) {
    if (!node->label.empty()) labels.push_back(node->label);
  }
  return labels;
}

}  // namespace deim
