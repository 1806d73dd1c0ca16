#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"

namespace tag {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// All numeric storage is 64-byte aligned so vectorized kernels always see the
// same alignment; otherwise per-allocation loop peeling would make repeated
// runs differ in the last ulp and break the bit-reproducibility contract.
template <typename T, std::size_t Align>
struct AlignedAllocator {
  using value_type = T;
  template <typename U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(Align)));
  }
  void deallocate(T* p, std::size_t n) {
    ::operator delete(p, n * sizeof(T), std::align_val_t(Align));
  }
  // Default-insertion leaves trivials uninitialized, so vector(n) skips the
  // zero fill; vector(n, 0.0) still zero-fills.
  template <typename U>
  void construct(U* p) {
    ::new (static_cast<void*>(p)) U;
  }
  template <typename U, typename... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
  template <typename U>
  bool operator==(const AlignedAllocator<U, Align>&) const {
    return true;
  }
};

using DataVec = std::vector<double, AlignedAllocator<double, 64>>;

struct TensorImpl {
  Shape shape;
  std::shared_ptr<DataVec> data;
  bool requires_grad = false;
  std::shared_ptr<DataVec> grad;  // allocated on first accumulation

  DataVec& grad_ref();  // allocates zeros on demand

  // Gradient target for a backward rule that writes EVERY element: the first
  // caller gets an uninitialized buffer and must assign (returns true),
  // later callers accumulate (returns false). Partial writers must use
  // grad_ref() instead.
  bool grad_target(double** out);
};

// Dense row-major tensor. Copies share storage; values are treated as
// immutable once an op has consumed them, so sharing is safe.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }
  // Contents undefined; for op outputs that overwrite every element.
  static Tensor uninitialized(Shape shape);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int dim(std::size_t i) const { return impl_->shape.at(i); }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  std::size_t size() const { return impl_->data->size(); }

  double* data() { return impl_->data->data(); }
  const double* data() const { return impl_->data->data(); }
  DataVec& values() { return *impl_->data; }
  const DataVec& values() const { return *impl_->data; }

  // Scalar convenience; throws unless size() == 1.
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool flag) {
    impl_->requires_grad = flag;
    return *this;
  }

  // Gradient of the last backward pass; zeros if this tensor was never on a
  // path to the loss.
  const DataVec& grad() const;
  void zero_grad();

  std::shared_ptr<TensorImpl> impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Records backward rules in forward execution order. Replaying the steps in
// reverse visits every node after all of its consumers.
class Tape {
 public:
  using Step = std::function<void()>;

  void record(Step step) { steps_.push_back(std::move(step)); }

  // Seeds d(loss)/d(loss) = 1 and replays the recorded steps in reverse.
  // loss must be scalar; a second call without re-recording throws.
  void backward(const Tensor& loss);

  std::size_t recorded_steps() const { return steps_.size(); }
  bool used() const { return used_; }

 private:
  std::vector<Step> steps_;
  bool used_ = false;
};

Tape* active_tape();

// Installs a tape for the current thread; ops record onto it while in scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

}  // namespace tag
