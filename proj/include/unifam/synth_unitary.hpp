#pragma once

#include <utility>

#include "unifam/generators.hpp"

namespace unifam {

struct SynthesisReport {
  double final_error = 0.0;
  std::size_t op_count = 0;
  std::size_t u2_count = 0;
  std::size_t shift_count = 0;
  std::size_t stage_count = 0;
  double wall_time_s = 0.0;
};

SynthesisReport report_for(const GeneratorSequence& seq, double final_error, double wall_time_s);

struct Synthesis {
  GeneratorSequence sequence;
  SynthesisReport report;
};

/// Word sending `a` to e0 with a real non-negative e0 amplitude.
///
/// The support is first trimmed: leading and trailing amplitudes whose total
/// squared modulus stays within eps/2 are left out of the merge chain (the
/// tail-mass contract; the measured error reported includes their effect).
/// The kept block is shifted onto [0, n-1], then n-1 times the pair at {0, 1}
/// is merged into index 1 and the whole vector is shifted down by one. A final
/// diagonal U(2) makes the surviving amplitude real and non-negative.
///
/// report.final_error = 1 - Re <e0 | result>.
Synthesis fold_to_e0(const StateVector& a, double eps);

/// Reverses the word, negating shifts and taking U(2) adjoints.
GeneratorSequence invert(const GeneratorSequence& seq);
/// Throws NotInvertible if the program contains a Kraus stage.
GeneratorSequence invert(const ChannelProgram& prog);

/// fold(source) followed by invert(fold(target)).
/// report.final_error = 1 - Re <target | result>, so global phase counts.
Synthesis steer_state(const StateVector& source, const StateVector& target, double eps);

/// Word whose dense restriction to `window` equals `u` (max-norm within eps).
///
/// Columns are cleared left to right by adjacent two-level rotations, bottom
/// row first; each rotation on absolute pair (a, a+1) is Shift(-a) U2 Shift(a).
/// The leftover diagonal is removed with diagonal U(2) blocks, and the word is
/// inverted. Adjacent U(2) blocks are multiplied together.
/// report.final_error = max |materialize(word) - u|.
Synthesis compile_unitary(const CMatrix& u, const Window& window, double eps = 1e-10);

/// Multiplies runs of adjacent U2At01 ops into one (identity products vanish).
GeneratorSequence fuse_u2(const GeneratorSequence& seq);

}  // namespace unifam
