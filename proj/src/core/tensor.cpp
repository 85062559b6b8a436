#include "due/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "due/core/error.hpp"
#include "due/simd/kernels.hpp"

namespace due {

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (const std::size_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << "]";
  return os.str();
}

void TensorNode::accumulate_grad(const std::vector<double>& g) {
  if (g.size() != data.size())
    throw ShapeError("gradient size mismatch on op " + std::string(op));
  auto& buf = grad_buffer();
  simd::active().add(buf.data(), buf.data(), g.data(), buf.size());
}

std::vector<double>& TensorNode::grad_buffer() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != values.size())
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  node_ = std::make_shared<TensorNode>();
  node_->shape = std::move(shape);
  node_->data = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(shape_size(shape), 0.0);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(shape_size(shape), value);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<double>{value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->data.size(); }
std::size_t Tensor::rank() const { return node_->shape.size(); }

std::size_t Tensor::rows() const {
  const Shape& s = node_->shape;
  if (s.size() == 2) return s[0];
  if (s.size() == 1) return s[0];
  throw ShapeError("rows() on tensor of rank " + std::to_string(s.size()));
}

std::size_t Tensor::cols() const {
  const Shape& s = node_->shape;
  if (s.size() == 2) return s[1];
  if (s.size() == 1) return 1;
  throw ShapeError("cols() on tensor of rank " + std::to_string(s.size()));
}

double* Tensor::data() { return node_->data.data(); }
const double* Tensor::data() const { return node_->data.data(); }

double Tensor::at(std::size_t i) const { return node_->data.at(i); }

double Tensor::at(std::size_t i, std::size_t j) const {
  return node_->data.at(i * cols() + j);
}

double Tensor::item() const {
  if (size() != 1)
    throw ContractError("item() called on tensor of size " +
                        std::to_string(size()));
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool v) { node_->requires_grad = v; }
bool Tensor::has_grad() const { return node_->grad.size() == size(); }

const std::vector<double>& Tensor::grad() const {
  if (!has_grad())
    throw ContractError("grad() requested before backward populated it");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_->grad.size() == size())
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

bool Tensor::all_finite() const {
  for (const double v : node_->data)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor Tensor::detached() const {
  return Tensor(node_->shape, node_->data, false);
}

Tensor Tensor::clone() const {
  return Tensor(node_->shape, node_->data, node_->requires_grad);
}

void backward(const Tensor& root) {
  if (!root.defined() || root.size() != 1)
    throw ContractError("backward requires a scalar root");
  auto root_node = root.node();
  if (!root_node->requires_grad) return;

  // Iterative post-order DFS; reversed it gives a valid topological order.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(root_node.get(), 0);
  seen.insert(root_node.get());
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    bool descended = false;
    while (next_child < node->parents.size()) {
      TensorNode* p = node->parents[next_child++].get();
      if (p->requires_grad && seen.insert(p).second) {
        stack.emplace_back(p, 0);
        descended = true;
        break;
      }
    }
    if (!descended && next_child >= node->parents.size()) {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root_node->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* node = *it;
    if (node->backward && node->grad.size() == node->data.size()) {
      node->backward(*node);
    }
  }
}

namespace detail {

Tensor make_op(const char* name, Shape shape, std::vector<double> data,
               const std::vector<Tensor>& parents,
               std::function<void(TensorNode&)> bw) {
  Tensor out(std::move(shape), std::move(data), false);
  bool needs_grad = false;
  for (const Tensor& p : parents) needs_grad = needs_grad || p.requires_grad();
  auto node = out.node();
  node->op = name;
  if (needs_grad) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (const Tensor& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(bw);
  }
  return out;
}

}  // namespace detail

}  // namespace due
