#pragma once

#include <string>

#include "fracsde/time_grid.hpp"

// CSV serialization of sampled paths. Format: header line "t,value", one row
// per node, every number printed with 17 significant digits so that doubles
// round-trip losslessly (write -> read -> write is byte-identical).

namespace fracsde {

void write_csv(const std::string& filename, const SampledPath& path);

// Reconstructs the grid from the time column; the file must contain a
// uniform grid starting at 0, else IoError.
SampledPath read_csv(const std::string& filename);

} // namespace fracsde
