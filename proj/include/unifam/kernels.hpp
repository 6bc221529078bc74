#pragma once

// Inner loops shared by the generator and synthesis layers. Each parallel
// kernel has a serial reference; both produce bit-identical results because
// every output entry is computed by the same sequence of operations.

#include <vector>

#include "unifam/generators.hpp"

namespace unifam::kernels {

/// Mutable windowed vector used while stepping through a word.
struct WorkState {
  Index offset = 0;
  std::vector<Complex> amps;

  static WorkState basis(Index k) { return {k, {Complex{1.0, 0.0}}}; }
  static WorkState from(const StateVector& s);
  StateVector to_state() const;

  Index end() const noexcept { return offset + static_cast<Index>(amps.size()); }
  Complex at(Index k) const noexcept {
    return (k >= offset && k < end()) ? amps[static_cast<std::size_t>(k - offset)] : Complex{};
  }
  /// Zero-pads so that absolute indices lo..hi are stored.
  void extend(Index lo, Index hi);
};

void apply_op(WorkState& s, const UnitaryOp& op);
void apply_u2(WorkState& s, const Mat2& g);

/// Column j is the word applied to e_{window.offset + j}.
CMatrix materialize_columns(const GeneratorSequence& seq, const Window& window, Backend backend);

/// M <- G M G^dagger on the local index pair (i0, i1).
void conjugate_pair(CMatrix& m, Index i0, Index i1, const Mat2& g);

/// sum_i K_i rho K_i^dagger for a symbolic stage. `zero` is the local index of
/// absolute index 0; the window of `rho` must already contain every touched index.
CMatrix accumulate_kraus(const CMatrix& rho, Index zero, const KrausStage& stage, Backend backend);

}  // namespace unifam::kernels
