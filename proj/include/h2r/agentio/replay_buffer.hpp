#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

#include "h2r/common/errors.hpp"
#include "h2r/common/types.hpp"

namespace h2r::agentio {

template <typename Scalar>
struct Transition {
  VectorX<Scalar> state;
  VectorX<Scalar> action;
  Scalar reward = Scalar(0);
  VectorX<Scalar> next_state;
  bool done = false;
};

// Column-major batch: one sample per column.
template <typename Scalar>
struct Batch {
  MatrixX<Scalar> states;
  MatrixX<Scalar> actions;
  VectorX<Scalar> rewards;
  MatrixX<Scalar> next_states;
  VectorX<Scalar> dones;
  Eigen::Index size() const { return states.cols(); }
};

// Fixed-capacity FIFO of transitions with uniform batch sampling. Storage is
// flat and grows on demand up to the capacity.
template <typename Scalar>
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
      : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
    if (capacity == 0) throw ConfigError("replay capacity must be > 0", "/td3/buffer_capacity");
  }

  void push(const Transition<Scalar>& t) {
    if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ ||
        t.action.size() != action_dim_)
      throw ShapeError("transition shape does not match buffer");
    if (!t.state.allFinite() || !t.next_state.allFinite() || !t.action.allFinite() ||
        !std::isfinite(static_cast<double>(t.reward)))
      throw DomainError("non-finite transition");
    std::size_t slot;
    if (size_ < capacity_) {
      slot = size_++;
      states_.resize(size_ * state_dim_);
      next_states_.resize(size_ * state_dim_);
      actions_.resize(size_ * action_dim_);
      rewards_.resize(size_);
      dones_.resize(size_);
      ids_.resize(size_);
    } else {
      slot = head_;
      head_ = (head_ + 1) % capacity_;
    }
    std::copy(t.state.data(), t.state.data() + state_dim_, states_.begin() + slot * state_dim_);
    std::copy(t.next_state.data(), t.next_state.data() + state_dim_,
              next_states_.begin() + slot * state_dim_);
    std::copy(t.action.data(), t.action.data() + action_dim_, actions_.begin() + slot * action_dim_);
    rewards_[slot] = t.reward;
    dones_[slot] = t.done ? Scalar(1) : Scalar(0);
    ids_[slot] = pushed_++;
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_pushed() const { return pushed_; }

  // Insertion sequence number of the transition in storage slot i.
  std::uint64_t id_at(std::size_t i) const { return ids_.at(i); }

  Transition<Scalar> at(std::size_t i) const {
    if (i >= size_) throw StateError("replay index out of range");
    Transition<Scalar> t;
    t.state = Eigen::Map<const VectorX<Scalar>>(&states_[i * state_dim_], state_dim_);
    t.next_state = Eigen::Map<const VectorX<Scalar>>(&next_states_[i * state_dim_], state_dim_);
    t.action = Eigen::Map<const VectorX<Scalar>>(&actions_[i * action_dim_], action_dim_);
    t.reward = rewards_[i];
    t.done = dones_[i] != Scalar(0);
    return t;
  }

  // Distinct slots within a batch (Floyd's algorithm); independent across calls.
  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const {
    if (batch == 0 || size_ < batch) throw StateError("replay buffer holds fewer transitions than the batch size");
    std::vector<std::size_t> out;
    out.reserve(batch);
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(batch * 2);
    for (std::size_t j = size_ - batch; j < size_; ++j) {
      const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
      const std::size_t pick = chosen.count(t) ? j : t;
      chosen.insert(pick);
      out.push_back(pick);
    }
    return out;
  }

  Batch<Scalar> sample(std::size_t batch, std::mt19937_64& rng) const {
    const auto idx = sample_indices(batch, rng);
    Batch<Scalar> b;
    const auto n = static_cast<Eigen::Index>(batch);
    b.states.resize(state_dim_, n);
    b.next_states.resize(state_dim_, n);
    b.actions.resize(action_dim_, n);
    b.rewards.resize(n);
    b.dones.resize(n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t i = idx[c];
      b.states.col(c) = Eigen::Map<const VectorX<Scalar>>(&states_[i * state_dim_], state_dim_);
      b.next_states.col(c) = Eigen::Map<const VectorX<Scalar>>(&next_states_[i * state_dim_], state_dim_);
      b.actions.col(c) = Eigen::Map<const VectorX<Scalar>>(&actions_[i * action_dim_], action_dim_);
      b.rewards(c) = rewards_[i];
      b.dones(c) = dones_[i];
    }
    return b;
  }

 private:
  std::size_t capacity_;
  int state_dim_;
  int action_dim_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  std::uint64_t pushed_ = 0;
  std::vector<Scalar> states_, next_states_, actions_, rewards_, dones_;
  std::vector<std::uint64_t> ids_;
};

}  // namespace h2r::agentio
