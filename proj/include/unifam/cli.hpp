#pragma once

// Batch front door. Exit codes: 0 ok, 1 unexpected failure, 2 input
// validation, 3 synthesis finished but tolerance unmet (outputs still
// written), 4 resource cap. Nothing is written on 2 or 4.

#include <iosfwd>
#include <string>
#include <vector>

#include "unifam/hilbert.hpp"

namespace unifam::cli {

enum Exit : int { Ok = 0, Unexpected = 1, Validation = 2, ToleranceUnmet = 3, ResourceCap = 4 };

/// "2,4,8" or the inclusive range "a:b".
std::vector<Index> parse_dims(const std::string& text);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unifam::cli
