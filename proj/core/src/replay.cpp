#include "sflab/replay.hpp"

#include <algorithm>

namespace sflab::agent {

ReplayBuffer::ReplayBuffer(TransitionLayout layout, std::size_t capacity) : layout_(layout), capacity_(capacity) {
  if (capacity == 0) throw Error("ReplayBuffer: capacity must be positive");
  if (layout.obs_dim <= 0 || layout.action_dim <= 0 || layout.feature_dim <= 0 || layout.n_alternatives < 0) {
    throw DimensionError("ReplayBuffer: invalid layout");
  }
}

void ReplayBuffer::push(const Transition& t) {
  require_dims(t.s.size(), layout_.obs_dim, "Transition.s");
  require_dims(t.s_next.size(), layout_.obs_dim, "Transition.s_next");
  require_dims(t.a.size(), layout_.action_dim, "Transition.a");
  require_dims(t.phi.size(), layout_.feature_dim, "Transition.phi");
  require_dims(t.w.size(), layout_.feature_dim, "Transition.w");
  require_dims(static_cast<Eigen::Index>(t.alternatives.size()), layout_.n_alternatives, "Transition.alternatives");
  const std::size_t stride = layout_.row_size();
  if (size_ < capacity_ && head_ * stride >= storage_.size()) {
    storage_.resize(storage_.size() + stride);
  }
  double* out = storage_.data() + head_ * stride;
  auto put = [&out](const Vector& v) { out = std::copy(v.data(), v.data() + v.size(), out); };
  put(t.s);
  put(t.a);
  put(t.phi);
  put(t.s_next);
  put(t.w);
  for (const Vector& z : t.alternatives) {
    require_dims(z.size(), layout_.feature_dim, "Transition.alternative");
    put(z);
  }
  *out = t.done ? 1.0 : 0.0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++total_pushed_;
}

std::size_t ReplayBuffer::slot_of_age(std::size_t age) const {
  if (age >= size_) throw Error("ReplayBuffer: index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return (oldest + age) % capacity_;
}

Transition ReplayBuffer::at(std::size_t age) const {
  const double* p = row(slot_of_age(age));
  auto take = [&p](int n) {
    Vector v = Eigen::Map<const Vector>(p, n);
    p += n;
    return v;
  };
  Transition t;
  t.s = take(layout_.obs_dim);
  t.a = take(layout_.action_dim);
  t.phi = take(layout_.feature_dim);
  t.s_next = take(layout_.obs_dim);
  t.w = take(layout_.feature_dim);
  for (int k = 0; k < layout_.n_alternatives; ++k) t.alternatives.push_back(take(layout_.feature_dim));
  t.done = *p != 0.0;
  return t;
}

Batch ReplayBuffer::gather(std::span<const std::size_t> ages) const {
  const auto n = static_cast<Eigen::Index>(ages.size());
  const int o = layout_.obs_dim, a = layout_.action_dim, d = layout_.feature_dim;
  Batch b;
  b.s.resize(o, n);
  b.a.resize(a, n);
  b.phi.resize(d, n);
  b.s_next.resize(o, n);
  b.w.resize(d, n);
  b.alternatives.assign(static_cast<std::size_t>(layout_.n_alternatives), Matrix(d, n));
  b.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* p = row(slot_of_age(ages[static_cast<std::size_t>(j)]));
    b.s.col(j) = Eigen::Map<const Vector>(p, o);
    p += o;
    b.a.col(j) = Eigen::Map<const Vector>(p, a);
    p += a;
    b.phi.col(j) = Eigen::Map<const Vector>(p, d);
    p += d;
    b.s_next.col(j) = Eigen::Map<const Vector>(p, o);
    p += o;
    b.w.col(j) = Eigen::Map<const Vector>(p, d);
    p += d;
    for (auto& alt : b.alternatives) {
      alt.col(j) = Eigen::Map<const Vector>(p, d);
      p += d;
    }
    b.done[j] = *p;
  }
  return b;
}

Batch ReplayBuffer::sample(int batch_size, Rng& rng) const {
  if (size_ == 0) throw Error("ReplayBuffer: cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> ages(static_cast<std::size_t>(batch_size));
  for (auto& age : ages) age = pick(rng);
  return gather(ages);
}

}  // namespace sflab::agent
