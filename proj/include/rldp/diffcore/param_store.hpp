#pragma once

#include <rldp/diffcore/autodiff.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rldp {

/// Named parameter tensors in insertion order. Names are dot-separated
/// paths such as "phi.l0.weight".
class ParamStore {
 public:
  Var add(const std::string& name, Tensor value, bool trainable = true) {
    if (index_.contains(name)) throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, Var::leaf(std::move(value), trainable));
    return entries_.back().second;
  }

  bool contains(const std::string& name) const { return index_.contains(name); }

  const Var& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return entries_[it->second].second;
  }

  Var& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return entries_[it->second].second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [n, _] : entries_) out.push_back(n);
    return out;
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  void zero_grad() {
    for (auto& [_, v] : entries_)
      if (v.requires_grad()) v.mutable_grad().fill(0.0);
  }

  /// Snapshot of current gradients (zeros for parameters without one).
  std::map<std::string, Tensor> gradients() const {
    std::map<std::string, Tensor> out;
    for (const auto& [n, v] : entries_) {
      out.emplace(n, v.grad().shape() == v.shape() ? v.grad() : Tensor(v.shape(), 0.0));
    }
    return out;
  }

  /// Deep copy with independent storage.
  ParamStore clone(bool trainable) const {
    ParamStore out;
    for (const auto& [n, v] : entries_) out.add(n, v.value(), trainable);
    return out;
  }

  /// Copies values name-by-name from `src`; every name in this store must exist there.
  void copy_values_from(const ParamStore& src) {
    for (auto& [n, v] : entries_) {
      const Tensor& from = src.get(n).value();
      if (from.shape() != v.shape()) {
        throw DimensionError(n, "copy shape " + shape_str(from.shape()) + " vs " + shape_str(v.shape()));
      }
      v.mutable_value() = from;
    }
  }

  /// Inserts every entry of `other` under `prefix` (sharing the leaves).
  void merge(const ParamStore& other, const std::string& prefix = "") {
    for (const auto& [n, v] : other) {
      const std::string full = prefix + n;
      if (index_.contains(full)) throw std::invalid_argument("ParamStore: duplicate parameter '" + full + "'");
      index_.emplace(full, entries_.size());
      entries_.emplace_back(full, v);
    }
  }

  /// Entries whose names start with `prefix`, sharing leaves; the prefix is stripped when `strip` is set.
  ParamStore subset(const std::string& prefix, bool strip = false) const {
    ParamStore out;
    for (const auto& [n, v] : entries_) {
      if (n.rfind(prefix, 0) != 0) continue;
      const std::string key = strip ? n.substr(prefix.size()) : n;
      out.index_.emplace(key, out.entries_.size());
      out.entries_.emplace_back(key, v);
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, Var>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Frozen deep copy used as a target network; never receives gradients.
inline ParamStore hard_copy_targets(const ParamStore& params) { return params.clone(false); }

}  // namespace rldp
