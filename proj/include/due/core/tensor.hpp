#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace due {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

// One node of the reverse-mode graph: a value buffer plus, when the node
// was produced by an operation, its parents and the backward rule.
struct TensorNode {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;  // allocated on first accumulation
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward;  // accumulates into parents
  const char* op = "leaf";

  std::size_t size() const { return data.size(); }
  void accumulate_grad(const std::vector<double>& g);
  std::vector<double>& grad_buffer();  // sized on demand
};

// Value-semantics handle to a graph node. Copies share storage; operations
// build new nodes.
class Tensor {
public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t rank() const;
  // Rank-2 accessors; rank-1 tensors count as a single column.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data();
  const double* data() const;
  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;
  double item() const;  // size-1 tensors

  bool requires_grad() const;
  void set_requires_grad(bool v);
  bool has_grad() const;
  const std::vector<double>& grad() const;
  void zero_grad();

  bool all_finite() const;
  Tensor detached() const;  // same values, fresh constant leaf
  Tensor clone() const;     // deep copy preserving requires_grad

  std::shared_ptr<TensorNode> node() const { return node_; }
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

private:
  std::shared_ptr<TensorNode> node_;
};

// Populates gradients of every requires_grad leaf reachable from root.
// Root must be a size-1 tensor. Gradients accumulate across calls; callers
// reset them between optimizer steps via zero_grad.
void backward(const Tensor& root);

namespace detail {
// Shared by op implementations: builds the result node, wiring parents and
// the backward rule only when some parent tracks gradients.
Tensor make_op(const char* name, Shape shape, std::vector<double> data,
               const std::vector<Tensor>& parents,
               std::function<void(TensorNode&)> bw);
}  // namespace detail

}  // namespace due
