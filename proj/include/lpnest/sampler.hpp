#pragma once

#include "lpnest/dataset.hpp"
#include "lpnest/density.hpp"
#include "lpnest/rng.hpp"
#include "lpnest/tree.hpp"

namespace lpnest {

// Uniform samples inside the unit f-ball: Beta(n, 1) root radius, one
// Dirichlet draw per inner node raised to 1/p_I, radii propagated
// top-down, then independent sign flips.
Dataset sample_uniform_ball(const LpTree& tree, Rng& rng, std::size_t count);

// Samples from the model: ball samples normalized to the unit sphere,
// scaled by radii from the radial law, and pulled back through W^-1 so
// that W x follows the symmetric law.
Dataset sample(const LpNestedModel& model, Rng& rng, std::size_t count);

}  // namespace lpnest
