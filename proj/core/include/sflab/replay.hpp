#pragma once

#include <span>
#include <vector>

#include "sflab/types.hpp"

namespace sflab::agent {

/// One environment step as stored for off-policy learning. The scalar reward
/// is not stored; it is always reconstructed as phi^T w.
struct Transition {
  Vector s;
  Vector a;
  Vector phi;
  Vector s_next;
  bool done = false;  // true only on terminal states (no bootstrapping)
  Vector w;
  std::vector<Vector> alternatives;
};

struct TransitionLayout {
  int obs_dim = 0;
  int action_dim = 0;
  int feature_dim = 0;
  int n_alternatives = 0;

  std::size_t row_size() const {
    return static_cast<std::size_t>(2 * obs_dim + action_dim + feature_dim * (2 + n_alternatives) + 1);
  }
};

/// Column-major minibatch: every matrix holds one transition per column.
struct Batch {
  Matrix s;
  Matrix a;
  Matrix phi;
  Matrix s_next;
  Matrix w;
  std::vector<Matrix> alternatives;
  Vector done;

  Eigen::Index size() const { return s.cols(); }
};

/// Fixed-capacity FIFO ring buffer over flat row storage, sampled uniformly
/// from the filled region.
class ReplayBuffer {
 public:
  ReplayBuffer(TransitionLayout layout, std::size_t capacity);

  void push(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_pushed() const { return total_pushed_; }
  const TransitionLayout& layout() const { return layout_; }

  /// i-th oldest transition still held (0 = oldest).
  Transition at(std::size_t i) const;

  Batch sample(int batch_size, Rng& rng) const;
  /// Batch from explicit ages (0 = oldest), in the given order.
  Batch gather(std::span<const std::size_t> ages) const;

 private:
  std::size_t slot_of_age(std::size_t age) const;
  const double* row(std::size_t slot) const { return storage_.data() + slot * layout_.row_size(); }

  TransitionLayout layout_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next slot to write
  std::uint64_t total_pushed_ = 0;
  std::vector<double> storage_;
};

}  // namespace sflab::agent
