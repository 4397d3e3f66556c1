#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vot::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Storage shared by every handle to the same tensor.
struct TensorData {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient is needed
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

/// Dense row-major array of doubles. A Tensor is a reference-counted handle:
/// copies share storage, use `clone()` for an independent copy.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value);

  const Shape& shape() const { return d_->shape; }
  std::size_t rank() const { return d_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return d_->value.size(); }

  std::span<const double> values() const { return d_->value; }
  std::span<double> values() { return d_->value; }
  double operator[](std::size_t i) const { return d_->value[i]; }
  double item() const;

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool on);
  bool has_grad() const { return !d_->grad.empty(); }
  std::span<const double> grad() const { return d_->grad; }
  std::span<double> grad() { return d_->grad; }
  void zero_grad();

  /// Independent copy of the values; the copy never requires grad.
  Tensor clone() const;

  const std::shared_ptr<TensorData>& impl() const { return d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

/// Records primitive applications so that `backward` can replay them in
/// reverse. Constructing a Tape makes it the active tape of the calling
/// thread until it is destroyed; ops only record when an active tape exists
/// and at least one input requires grad.
class Tape {
 public:
  struct Node {
    std::string_view op;
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::shared_ptr<TensorData> output;
    std::function<void()> backward;
  };

  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* current();

  void record(std::string_view op,
              std::vector<std::shared_ptr<TensorData>> inputs,
              std::shared_ptr<TensorData> output,
              std::function<void()> backward);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every tensor on the tape.
  /// Leaf gradients accumulate; call once per tape.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
  Tape* previous_;
  bool consumed_ = false;
};

/// Suspends recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape* saved_;
};

/// True when an op over `inputs` must be recorded on the active tape.
bool needs_recording(std::initializer_list<const Tensor*> inputs);

}  // namespace vot::numerics
