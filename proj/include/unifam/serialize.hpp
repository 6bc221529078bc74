#pragma once

// JSON interchange. Output is canonical: fixed key order, shortest round-trip
// float formatting, one element per line for top-level arrays. Parse errors
// throw SchemaError naming the JSON path of the offending field.

#include <string>
#include <vector>

#include <json.hpp>

#include "unifam/verify.hpp"

namespace unifam::io {

using Json = nlohmann::ordered_json;

Json parse_text(const std::string& text, const std::string& origin);
std::string canonical_dump(const Json& j);

StateVector parse_state(const Json& j);
Json to_json(const StateVector& s);

DensityMatrix parse_density(const Json& j, double tol = kStructuralTol);
Json to_json(const DensityMatrix& d);

struct UnitaryFile {
  Window window;
  CMatrix matrix;
};
UnitaryFile parse_unitary(const Json& j);

ChannelProgram parse_program(const Json& j);
Json to_json(const ChannelProgram& p);
Json to_json(const GeneratorSequence& s);

Json to_json(const SynthesisReport& r);
Json to_json(const verify::SweepResult& r);
Json to_json(const verify::NegativeControlReport& r);
Json to_json(const std::vector<verify::CoverageRow>& rows, const verify::CoverageOptions& opts);

std::string read_file(const std::string& path);
/// Writes to a temporary sibling and renames over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace unifam::io
