#pragma once

#include <rldp/diffcore/io.hpp>
#include <rldp/diffcore/tensor.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rldp {

struct DatasetMeta {
  std::string env_id;
  std::string observation;  // "one_hot", "xy" or "state"
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;   // stored action width: 1 (an index) for discrete envs
  std::size_t num_actions = 0;  // 0 for continuous action spaces
  std::string policy;
  std::uint64_t seed = 0;

  bool discrete() const noexcept { return num_actions > 0; }
  /// Width of the action as fed to networks (one-hot for discrete actions).
  std::size_t action_input_dim() const noexcept { return discrete() ? num_actions : action_dim; }

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

/// One reward-free step. For discrete envs `action` holds the action index.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> next_state;
  bool done = false;
};

struct EpisodeRange {
  std::size_t begin = 0;  // first transition
  std::size_t end = 0;    // one past the last
  std::size_t length() const noexcept { return end - begin; }
};

/// Offline transitions stored column-block-wise. Episodes are contiguous;
/// `done` marks only the last (truncated) step of each episode. There is
/// no reward anywhere in here.
class Dataset {
 public:
  DatasetMeta meta;

  Dataset() = default;
  explicit Dataset(DatasetMeta m) : meta(std::move(m)) {}

  std::size_t size() const noexcept { return done_.size(); }
  bool empty() const noexcept { return done_.empty(); }
  std::size_t num_episodes() const noexcept { return episodes_.size(); }
  const std::vector<EpisodeRange>& episodes() const noexcept { return episodes_; }

  std::span<const double> state(std::size_t i) const { return {states_.data() + i * meta.obs_dim, meta.obs_dim}; }
  std::span<const double> next_state(std::size_t i) const {
    return {next_states_.data() + i * meta.obs_dim, meta.obs_dim};
  }
  std::span<const double> action(std::size_t i) const {
    return {actions_.data() + i * meta.action_dim, meta.action_dim};
  }
  bool done(std::size_t i) const { return done_.at(i) != 0; }
  std::size_t episode_of(std::size_t i) const { return episode_.at(i); }
  std::size_t action_index(std::size_t i) const { return static_cast<std::size_t>(actions_.at(i * meta.action_dim)); }

  Transition transition(std::size_t i) const {
    return {{state(i).begin(), state(i).end()},
            {action(i).begin(), action(i).end()},
            {next_state(i).begin(), next_state(i).end()},
            done(i)};
  }

  /// Writes the network input for action i into `out` (one-hot for discrete).
  void action_input(std::size_t i, std::span<double> out) const {
    if (meta.discrete()) {
      std::fill(out.begin(), out.end(), 0.0);
      out[action_index(i)] = 1.0;
    } else {
      auto a = action(i);
      std::copy(a.begin(), a.end(), out.begin());
    }
  }

  /// Appends an episode; the last transition is marked done.
  void append_episode(const std::vector<Transition>& steps) {
    if (steps.empty()) return;
    const std::size_t begin = size();
    const auto ep = static_cast<std::uint32_t>(episodes_.size());
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const auto& tr = steps[t];
      if (tr.state.size() != meta.obs_dim || tr.next_state.size() != meta.obs_dim || tr.action.size() != meta.action_dim) {
        throw DimensionError("Dataset::append_episode", "transition widths do not match metadata");
      }
      states_.insert(states_.end(), tr.state.begin(), tr.state.end());
      actions_.insert(actions_.end(), tr.action.begin(), tr.action.end());
      next_states_.insert(next_states_.end(), tr.next_state.begin(), tr.next_state.end());
      done_.push_back(t + 1 == steps.size() ? 1 : 0);
      episode_.push_back(ep);
    }
    episodes_.push_back({begin, size()});
  }

  /// Raw column blocks, in file order.
  const std::vector<double>& states_block() const noexcept { return states_; }
  const std::vector<double>& actions_block() const noexcept { return actions_; }
  const std::vector<double>& next_states_block() const noexcept { return next_states_; }
  const std::vector<std::uint8_t>& done_block() const noexcept { return done_; }
  const std::vector<std::uint32_t>& episode_block() const noexcept { return episode_; }

  /// Rebuilds a dataset from column blocks (the loader's entry point).
  static Dataset from_blocks(DatasetMeta meta, std::vector<double> states, std::vector<double> actions,
                             std::vector<double> next_states, std::vector<std::uint8_t> done,
                             std::vector<std::uint32_t> episode) {
    Dataset d(std::move(meta));
    d.states_ = std::move(states);
    d.actions_ = std::move(actions);
    d.next_states_ = std::move(next_states);
    d.done_ = std::move(done);
    d.episode_ = std::move(episode);
    for (std::size_t i = 0; i < d.done_.size(); ++i) {
      if (i == 0 || d.episode_[i] != d.episode_[i - 1]) d.episodes_.push_back({i, i});
      d.episodes_.back().end = i + 1;
    }
    return d;
  }

 private:
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> next_states_;
  std::vector<std::uint8_t> done_;
  std::vector<std::uint32_t> episode_;
  std::vector<EpisodeRange> episodes_;
};

/// True when every stored value agrees after rounding to float32 and the
/// metadata and episode structure match.
inline bool equal_at_f32(const Dataset& a, const Dataset& b) {
  if (!(a.meta == b.meta) || a.size() != b.size()) return false;
  auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (static_cast<float>(x[i]) != static_cast<float>(y[i])) return false;
    return true;
  };
  return same(a.states_block(), b.states_block()) && same(a.actions_block(), b.actions_block()) &&
         same(a.next_states_block(), b.next_states_block()) && a.done_block() == b.done_block() &&
         a.episode_block() == b.episode_block();
}

// File layout:
//   line 1   "RLDP-DATASET 1"
//   line 2   JSON header: env_id, observation, obs_dim, action_dim, num_actions,
//            policy, seed, num_transitions, num_episodes, blob_bytes
//   blob     little-endian float32, blocks in order:
//            states [N x obs_dim], actions [N x action_dim],
//            next_states [N x obs_dim], done [N] (0/1), episode index [N]
inline constexpr std::string_view kDatasetMagic = "RLDP-DATASET 1";

inline std::string encode_dataset(const Dataset& d) {
  std::string blob;
  blob.reserve(4 * (d.states_block().size() * 2 + d.actions_block().size() + 2 * d.size()));
  for (double v : d.states_block()) append_f32_le(blob, v);
  for (double v : d.actions_block()) append_f32_le(blob, v);
  for (double v : d.next_states_block()) append_f32_le(blob, v);
  for (auto v : d.done_block()) append_f32_le(blob, v);
  for (auto v : d.episode_block()) append_f32_le(blob, static_cast<double>(v));
  nlohmann::json header = {{"env_id", d.meta.env_id},
                           {"observation", d.meta.observation},
                           {"obs_dim", d.meta.obs_dim},
                           {"action_dim", d.meta.action_dim},
                           {"num_actions", d.meta.num_actions},
                           {"policy", d.meta.policy},
                           {"seed", d.meta.seed},
                           {"num_transitions", d.size()},
                           {"num_episodes", d.num_episodes()},
                           {"blob_bytes", blob.size()}};
  return std::string(kDatasetMagic) + "\n" + header.dump() + "\n" + blob;
}

inline Dataset decode_dataset(std::string_view bytes) {
  const auto magic_end = bytes.find('\n');
  if (magic_end == std::string_view::npos || bytes.substr(0, magic_end) != kDatasetMagic) {
    throw FormatError("dataset: missing '" + std::string(kDatasetMagic) + "' magic line", 0);
  }
  const auto header_end = bytes.find('\n', magic_end + 1);
  if (header_end == std::string_view::npos) throw FormatError("dataset: unterminated header line", magic_end + 1);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(magic_end + 1, header_end - magic_end - 1));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset: corrupt header: ") + e.what(), magic_end + 1);
  }
  DatasetMeta meta;
  std::size_t n = 0;
  std::uint64_t declared = 0;
  try {
    meta.env_id = h.at("env_id").get<std::string>();
    meta.observation = h.at("observation").get<std::string>();
    meta.obs_dim = h.at("obs_dim").get<std::size_t>();
    meta.action_dim = h.at("action_dim").get<std::size_t>();
    meta.num_actions = h.at("num_actions").get<std::size_t>();
    meta.policy = h.at("policy").get<std::string>();
    meta.seed = h.at("seed").get<std::uint64_t>();
    n = h.at("num_transitions").get<std::size_t>();
    declared = h.at("blob_bytes").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset: corrupt header: ") + e.what(), magic_end + 1);
  }
  const std::size_t blob_start = header_end + 1;
  const std::uint64_t expected = 4ull * n * (2 * meta.obs_dim + meta.action_dim + 2);
  if (declared != expected) {
    throw FormatError("dataset: header declares " + std::to_string(declared) + " blob bytes, dimensions imply " +
                          std::to_string(expected),
                      magic_end + 1);
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t cursor = blob_start;
  auto read_block = [&](std::size_t count, const char* name) {
    if (cursor + 4 * count > bytes.size()) {
      throw FormatError(std::string("dataset: truncated ") + name + " block (file has " + std::to_string(bytes.size()) +
                            " bytes)",
                        cursor);
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = read_f32_le(p + cursor + 4 * i);
    cursor += 4 * count;
    return out;
  };
  auto states = read_block(n * meta.obs_dim, "states");
  auto actions = read_block(n * meta.action_dim, "actions");
  auto next_states = read_block(n * meta.obs_dim, "next_states");
  auto done_f = read_block(n, "done");
  auto episode_f = read_block(n, "episode");
  if (cursor != bytes.size()) throw FormatError("dataset: trailing bytes after blob", cursor);
  std::vector<std::uint8_t> done(n);
  std::vector<std::uint32_t> episode(n);
  for (std::size_t i = 0; i < n; ++i) {
    done[i] = done_f[i] != 0.0 ? 1 : 0;
    episode[i] = static_cast<std::uint32_t>(episode_f[i]);
  }
  return Dataset::from_blocks(std::move(meta), std::move(states), std::move(actions), std::move(next_states),
                              std::move(done), std::move(episode));
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& path) { atomic_write(path, encode_dataset(d)); }

inline Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace rldp
