#pragma once

#include "fracms/fracture.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracms {

/// Names accepted by generate_fractures.
std::vector<std::string> generator_names();

/// Seeded synthetic fracture sets. DFM vertices sit on fine nodes.
///  - isolated:   short fractures, each inside one coarse element
///  - channels:   long horizontal channels plus isolated inclusions
///  - network:    crossing horizontal, vertical and diagonal fractures
///  - mixed:      isolated DFM pieces plus long oblique EFM fractures
///  - single_efm: one long oblique EFM fracture
///  - curved:     a curved EFM polyline plus isolated DFM pieces
/// Ids start at `first_id`. Aperture and permeability come from the arguments.
std::vector<Fracture> generate_fractures(const std::string& name, const GridHierarchy& grid, std::uint64_t seed,
                                         double aperture, double kappa_f, int first_id = 0);

}  // namespace fracms
