#include "vot/numerics/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "vot/errors.hpp"

namespace vot::numerics {

namespace {
thread_local Tape* active_tape = nullptr;
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor() : d_(std::make_shared<TensorData>()) {
  d_->value.assign(1, 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : d_(std::make_shared<TensorData>()) {
  if (std::any_of(shape.begin(), shape.end(), [](auto d) { return d == 0; })) {
    throw ShapeError("tensor dimensions must be positive, got " +
                     shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("shape " + shape_str(shape) + " needs " +
                     std::to_string(shape_numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  d_->shape = std::move(shape);
  d_->value = std::move(values);
  set_requires_grad(requires_grad);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     shape_str(shape()));
  }
  return d_->shape[axis];
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() needs a single-element tensor, got " +
                     shape_str(shape()));
  }
  return d_->value[0];
}

void Tensor::set_requires_grad(bool on) {
  d_->requires_grad = on;
  if (on) {
    d_->ensure_grad();
  } else {
    d_->grad.clear();
  }
}

void Tensor::zero_grad() {
  std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
}

Tensor Tensor::clone() const { return Tensor(shape(), d_->value); }

Tape::Tape() : previous_(active_tape) { active_tape = this; }

Tape::~Tape() {
  if (active_tape == this) active_tape = previous_;
}

Tape* Tape::current() { return active_tape; }

void Tape::record(std::string_view op,
                  std::vector<std::shared_ptr<TensorData>> inputs,
                  std::shared_ptr<TensorData> output,
                  std::function<void()> backward) {
  output->requires_grad = true;
  output->ensure_grad();
  for (auto& in : inputs) {
    if (in->requires_grad) in->ensure_grad();
  }
  nodes_.push_back(
      Node{op, std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " +
                     shape_str(loss.shape()));
  }
  if (consumed_) {
    throw InvalidArgumentError("backward already ran on this tape");
  }
  const auto& target = loss.impl();
  auto it = std::find_if(nodes_.rbegin(), nodes_.rend(),
                         [&](const Node& n) { return n.output == target; });
  if (it == nodes_.rend()) {
    if (!target->requires_grad) {
      throw InvalidArgumentError(
          "loss is neither recorded on the tape nor a differentiable leaf");
    }
    target->ensure_grad();
    target->grad[0] += 1.0;
    consumed_ = true;
    return;
  }
  target->grad[0] = 1.0;
  for (; it != nodes_.rend(); ++it) it->backward();
  consumed_ = true;
}

NoGradGuard::NoGradGuard() : saved_(active_tape) { active_tape = nullptr; }

NoGradGuard::~NoGradGuard() { active_tape = saved_; }

bool needs_recording(std::initializer_list<const Tensor*> inputs) {
  if (active_tape == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

}  // namespace vot::numerics
