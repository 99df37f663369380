#pragma once

#include "bn/collision.hpp"

namespace bn {

/**
 * Reference loss and gain rates by a plain triple loop over (i, j, k): no
 * y <-> z symmetry, no pointer reuse, its own interpolation. O(N^3), so grids
 * above 64 nodes are rejected. The blended rule is summed as three separate
 * shares, each over its own pair of node energies.
 */
CollisionRates loss_gain_oracle(const Distribution& dist, Quadrature quad = Quadrature::nodal);

}  // namespace bn
