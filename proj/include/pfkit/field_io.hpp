#pragma once

#include <iosfwd>
#include <string>

#include "pfkit/model.hpp"

namespace pfkit {

/// Text dump: a header (dimensionality, extents, spacing, boundaries, time,
/// field names) followed by one line per cell for each field. Values are
/// written with 17 significant digits and read back bit-exactly.
void write_fields(std::ostream& os, const State& state);
void write_fields(const std::string& path, const State& state);

State read_fields(std::istream& is);
State read_fields(const std::string& path);

}  // namespace pfkit
