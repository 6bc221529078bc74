#pragma once

#include <vector>

#include "unifam/synth_unitary.hpp"

namespace unifam {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  CMatrix basis;               // columns are eigenvectors
  Window window;
};

/// Deterministic eigendecomposition: values descending, each eigenvector
/// scaled so its largest-modulus component (lowest index on ties) is real positive.
EigenDecomposition diagonalize(const DensityMatrix& rho);

/// K_i = P0 Pi_{0,i} for i < n, with the complement element on.
KrausStage collapse_stage(Index n);
/// K_i = sqrt(w_i) Pi_{0,i}. Throws BadWeights unless w_i >= 0 and sum w = 1 within 1e-10.
KrausStage build_stage(const std::vector<double>& weights);

struct ChannelSynthesis {
  ChannelProgram program;
  SynthesisReport report;
};

/// Program taking rho to sigma:
///   shift rho onto [0, n-1], compile V_rho^dagger (diagonalizes), collapse to
///   |e0><e0|, build diag(lambda_sigma), compile V_sigma, shift onto sigma's window.
/// The collapse uses one element per eigenvalue >= 1e-12 (at least one); the
/// complement element absorbs the rest exactly. Build weights below 1e-12
/// become zero and the weights are renormalized.
/// report.final_error = trace distance between the program output and sigma.
ChannelSynthesis steer_density(const DensityMatrix& rho, const DensityMatrix& sigma, double eps);

}  // namespace unifam
