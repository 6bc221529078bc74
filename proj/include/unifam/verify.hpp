#pragma once

// Verification lab: seeded samplers, universality sweeps, the shift-free
// negative control, a brute-force covering-radius oracle at dimension 2, and
// the sequence-length benchmark.

#include <cstdint>
#include <string>
#include <vector>

#include "unifam/synth_kraus.hpp"

namespace unifam::verify {

/// Order-independent per-trial seed derived from (seed, a, b).
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Haar-uniform unit vector on [offset, offset + n): normalized complex Gaussian.
StateVector random_state(Index n, std::uint64_t seed, Index offset = 0);
/// Haar unitary: complex Gaussian matrix, QR, phases of diag(R) divided out.
CMatrix random_unitary(Index n, std::uint64_t seed);
/// Flat-Dirichlet spectrum conjugated by a Haar unitary.
DensityMatrix random_density(Index n, std::uint64_t seed, Index offset = 0);

/// Dense-route application, independent of the structural kernels: every U(2)
/// op and Kraus stage is materialized on the current window and multiplied.
StateVector dense_apply(const StateVector& x, const GeneratorSequence& seq);
DensityMatrix dense_apply(const DensityMatrix& x, const ChannelProgram& prog);

enum class Family { U2Only, Full };
/// Random word; U2Only draws only U2At01 ops, Full mixes in shifts of +-1.
GeneratorSequence random_word(Family family, std::size_t length, std::uint64_t seed);

enum class SweepKind { State, Density };

struct TrialRow {
  Index dim = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double final_error = 0.0;
  std::size_t op_count = 0;
  std::size_t u2_count = 0;
  std::size_t shift_count = 0;
  double wall_time_s = 0.0;
};

struct SweepResult {
  SweepKind kind = SweepKind::State;
  std::vector<Index> dims;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  std::vector<TrialRow> rows;

  double max_error = 0.0;
  double mean_op_count = 0.0;
  std::size_t max_op_count = 0;
  double wall_time_s = 0.0;
  bool passed = false;
  std::vector<std::uint64_t> failing_seeds;
};

/// Recomputes the aggregate fields from rows and eps.
void summarize(SweepResult& r);

/// State trials steer e0 to a random target on a random offset; density trials
/// steer a random rho to a random sigma (odd trials use a smaller sigma
/// support). Error is measured on the dense route. Passes iff max error <= eps.
SweepResult universality_sweep(SweepKind kind, const std::vector<Index>& dims, std::size_t trials,
                               double eps, std::uint64_t seed, Backend backend = Backend::OpenMP);

struct NegativeControlReport {
  Index target_index = 2;
  std::size_t word_length = 0;
  std::uint64_t seed = 0;
  double max_target_fidelity = 0.0;   // over every prefix of the U2-only word, from e0
  double max_complement_drift = 0.0;  // amplitude moduli outside {0, 1}
  double full_family_fidelity = 0.0;  // e0 -> e_target with shifts allowed
  bool passed = false;
};

NegativeControlReport negative_control(Index target_index, std::size_t word_length, std::uint64_t seed);

struct CoverageOptions {
  int grid_steps = 16;
  int max_word_length = 4;
  int sample_points = 256;
  std::uint64_t node_cap = 4'000'000;
};

struct CoverageRow {
  int length = 0;
  double radius = 0.0;  // fidelity angle, arccos |<s|psi>|
  std::uint64_t nodes = 0;
};

/// Dimension-2 covering radius of the orbit of e0 under all words of length
/// <= L over the alphabet {U2(2 pi j/g, 0, 0, 0)} u {U2(0, 2 pi j/g, 0, 0), j >= 1},
/// measured against a Fibonacci-sphere sample of pure states.
/// Throws BudgetExceeded when the word count passes node_cap.
std::vector<CoverageRow> net_coverage_oracle(const CoverageOptions& opts,
                                             Backend backend = Backend::OpenMP);

/// State-steering cost rows: random source and target per (dim, trial).
std::vector<TrialRow> bench(const std::vector<Index>& dims, double eps, std::size_t trials,
                            std::uint64_t seed, Backend backend = Backend::OpenMP);

/// RFC-4180 CSV with header dim,trial,op_count,u2_count,shift_count,final_error,wall_time_s.
/// With include_timing unset the wall-time column is written as 0.
std::string to_csv(const std::vector<TrialRow>& rows, bool include_timing);

/// Least-squares slope of op_count against dim.
double op_count_slope(const std::vector<TrialRow>& rows);

}  // namespace unifam::verify
