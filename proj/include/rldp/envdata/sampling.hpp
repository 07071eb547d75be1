#pragma once

#include <rldp/diffcore/random.hpp>
#include <rldp/envdata/dataset.hpp>

#include <stdexcept>
#include <vector>

namespace rldp {

/// Horizon-H slices s_0..s_H, a_0..a_{H-1}, stacked over the batch:
/// states[t] is B x obs_dim, actions[t] is B x action_input_dim.
struct SegmentBatch {
  std::size_t horizon = 0;
  std::vector<std::size_t> starts;  // index of the first transition of each segment
  std::vector<Tensor> states;
  std::vector<Tensor> actions;

  std::size_t batch_size() const noexcept { return starts.size(); }
};

/// A single segment, for callers that want one slice at a time.
struct Segment {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> actions;
};

inline Segment segment_at(const Dataset& data, std::size_t start, std::size_t horizon) {
  Segment seg;
  for (std::size_t t = 0; t < horizon; ++t) {
    auto s = data.state(start + t);
    seg.states.emplace_back(s.begin(), s.end());
    std::vector<double> a(data.meta.action_input_dim());
    data.action_input(start + t, a);
    seg.actions.push_back(std::move(a));
  }
  auto last = data.next_state(start + horizon - 1);
  seg.states.emplace_back(last.begin(), last.end());
  return seg;
}

/// Stacks the segments starting at `starts` into batch tensors.
inline SegmentBatch segments_at(const Dataset& data, std::span<const std::size_t> starts, std::size_t horizon) {
  SegmentBatch b;
  b.horizon = horizon;
  b.starts.assign(starts.begin(), starts.end());
  const std::size_t n = starts.size();
  for (std::size_t t = 0; t <= horizon; ++t) b.states.push_back(Tensor::matrix(n, data.meta.obs_dim));
  for (std::size_t t = 0; t < horizon; ++t) b.actions.push_back(Tensor::matrix(n, data.meta.action_input_dim()));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s0 = starts[i];
    for (std::size_t t = 0; t < horizon; ++t) {
      auto st = data.state(s0 + t);
      std::copy(st.begin(), st.end(), b.states[t].row(i).begin());
      data.action_input(s0 + t, b.actions[t].row(i));
    }
    auto last = data.next_state(s0 + horizon - 1);
    std::copy(last.begin(), last.end(), b.states[horizon].row(i).begin());
  }
  return b;
}

/// Draws segments uniformly over all valid start indices; a segment never
/// crosses an episode boundary.
class SegmentSampler {
 public:
  SegmentSampler(const Dataset& data, std::size_t horizon) : data_(&data), horizon_(horizon) {
    if (horizon == 0) throw std::invalid_argument("segment horizon must be >= 1");
    for (const auto& ep : data.episodes()) {
      if (ep.length() < horizon) continue;
      for (std::size_t s = ep.begin; s + horizon <= ep.end; ++s) valid_.push_back(s);
    }
    if (valid_.empty()) {
      throw std::invalid_argument("no episode is long enough for horizon " + std::to_string(horizon));
    }
  }

  const std::vector<std::size_t>& valid_starts() const noexcept { return valid_; }

  SegmentBatch sample(std::size_t batch, Rng& rng) const {
    std::vector<std::size_t> starts(batch);
    for (auto& s : starts) s = valid_[uniform_index(rng, valid_.size())];
    return segments_at(*data_, starts, horizon_);
  }

 private:
  const Dataset* data_;
  std::size_t horizon_;
  std::vector<std::size_t> valid_;
};

inline SegmentBatch sample_segments(const Dataset& data, std::size_t horizon, std::size_t batch, Rng& rng) {
  return SegmentSampler(data, horizon).sample(batch, rng);
}

/// (s, a, s') rows plus an independently drawn batch of s+ states.
struct TransitionBatch {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> plus_indices;
  Tensor states;
  Tensor actions;  // network input encoding
  Tensor next_states;
  Tensor plus_states;
  std::vector<double> not_done;  // 0 where bootstrapping is cut

  std::size_t size() const noexcept { return indices.size(); }
};

/// Builds a batch from explicit indices. s+ rows are next states of the
/// transitions listed in `plus_indices`.
inline TransitionBatch transitions_at(const Dataset& data, std::span<const std::size_t> indices,
                                      std::span<const std::size_t> plus_indices) {
  TransitionBatch b;
  b.indices.assign(indices.begin(), indices.end());
  b.plus_indices.assign(plus_indices.begin(), plus_indices.end());
  const std::size_t n = indices.size();
  b.states = Tensor::matrix(n, data.meta.obs_dim);
  b.next_states = Tensor::matrix(n, data.meta.obs_dim);
  b.actions = Tensor::matrix(n, data.meta.action_input_dim());
  b.not_done.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = indices[i];
    auto s = data.state(k);
    auto sn = data.next_state(k);
    std::copy(s.begin(), s.end(), b.states.row(i).begin());
    std::copy(sn.begin(), sn.end(), b.next_states.row(i).begin());
    data.action_input(k, b.actions.row(i));
    b.not_done[i] = data.done(k) ? 0.0 : 1.0;
  }
  b.plus_states = Tensor::matrix(plus_indices.size(), data.meta.obs_dim);
  for (std::size_t i = 0; i < plus_indices.size(); ++i) {
    auto sp = data.next_state(plus_indices[i]);
    std::copy(sp.begin(), sp.end(), b.plus_states.row(i).begin());
  }
  return b;
}

/// Uniform (s, a, s') draws with replacement, and s+ drawn independently,
/// uniform over the stored next states.
inline TransitionBatch sample_transitions(const Dataset& data, std::size_t batch, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("sample_transitions: empty dataset");
  std::vector<std::size_t> idx(batch), plus(batch);
  for (auto& i : idx) i = uniform_index(rng, data.size());
  for (auto& i : plus) i = uniform_index(rng, data.size());
  return transitions_at(data, idx, plus);
}

/// Uniform draw of dataset states (rows of the state block).
inline Tensor sample_states(const Dataset& data, std::size_t batch, Rng& rng) {
  Tensor out = Tensor::matrix(batch, data.meta.obs_dim);
  for (std::size_t i = 0; i < batch; ++i) {
    auto s = data.state(uniform_index(rng, data.size()));
    std::copy(s.begin(), s.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace rldp
