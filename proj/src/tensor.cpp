#include "tensor.hpp"

#include <sstream>

namespace tag {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor shape has non-positive extent " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << "]";
  return os.str();
}

DataVec& TensorImpl::grad_ref() {
  if (!grad) grad = std::make_shared<DataVec>(data->size(), 0.0);
  return *grad;
}

bool TensorImpl::grad_target(double** out) {
  if (!grad) {
    grad = std::make_shared<DataVec>(data->size());  // default-init, caller assigns all
    *out = grad->data();
    return true;
  }
  *out = grad->data();
  return false;
}

Tensor::Tensor(Shape shape) {
  std::size_t n = shape_numel(shape);
  impl_ = std::make_shared<TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::make_shared<DataVec>(n, 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values) {
  std::size_t n = shape_numel(shape);
  if (n != values.size())
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  impl_ = std::make_shared<TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::make_shared<DataVec>(values.begin(), values.end());
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.values().begin(), t.values().end(), value);
  return t;
}

Tensor Tensor::uninitialized(Shape shape) {
  std::size_t n = shape_numel(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::make_shared<DataVec>(n);  // default-init, no zero fill
  return Tensor(impl);
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() requires a scalar tensor, got " + shape_str(shape()));
  return (*impl_->data)[0];
}

const DataVec& Tensor::grad() const {
  return impl_->grad_ref();
}

void Tensor::zero_grad() {
  if (impl_->grad) std::fill(impl_->grad->begin(), impl_->grad->end(), 0.0);
}

void Tape::backward(const Tensor& loss) {
  if (used_) throw StateError("tape already consumed; re-record the forward pass before backward");
  if (loss.size() != 1)
    throw std::invalid_argument("backward requires a scalar loss, got " + shape_str(loss.shape()));
  used_ = true;
  loss.impl()->grad_ref()[0] += 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = prev_; }

}  // namespace tag
