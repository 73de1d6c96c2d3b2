#pragma once

#include <map>
#include <mutex>

#include "hglue/model_metrics.hpp"
#include "hglue/toda.hpp"

namespace hglue::testing {

// One solve per rank per test process.
inline const TodaSolution& toda(int K) {
  static std::mutex lock;
  static std::map<int, TodaSolution> solved;
  std::lock_guard guard(lock);
  auto it = solved.find(K);
  if (it == solved.end()) it = solved.emplace(K, solve_toda(K)).first;
  return it->second;
}

inline TodaFamily family(std::initializer_list<int> ranks) {
  TodaFamily f;
  for (int K : ranks) f.add(toda(K));
  return f;
}

}  // namespace hglue::testing
