#pragma once

#include <cstdint>

namespace lpnest::instrument {

// Node-visit counter used by the complexity tests. Incremented by tree
// traversals (evaluate, gradients) and by the sampler, once per node touched.
inline thread_local std::uint64_t node_visits = 0;

inline void reset_node_visits() { node_visits = 0; }

}  // namespace lpnest::instrument
