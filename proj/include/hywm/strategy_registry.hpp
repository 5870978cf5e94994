#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hywm/errors.hpp"

namespace hywm {

/// Name -> strategy table. Documents refer to local functions and decision
/// rule tables by name; the engine resolves them here at run time.
template <class Fn>
class StrategyRegistry {
 public:
  StrategyRegistry& add(std::string name, Fn fn) {
    strategies_[std::move(name)] = std::move(fn);
    return *this;
  }

  bool contains(const std::string& name) const { return strategies_.contains(name); }

  const Fn& get(const std::string& name) const {
    auto it = strategies_.find(name);
    if (it == strategies_.end()) throw UnknownKey("strategy '" + name + "'");
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : strategies_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, Fn> strategies_;
};

}  // namespace hywm
