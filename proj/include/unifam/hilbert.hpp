#pragma once

// Finite-window representation of vectors and density operators on l2(Z).
//
// A window is a contiguous block of absolute indices [offset, offset + length).
// Amplitudes outside a value's window are exactly zero. Binary operations
// zero-pad both operands to the smallest common window.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include <Eigen/Dense>

namespace unifam {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Index = std::int64_t;

inline constexpr double kStructuralTol = 1e-10;
inline constexpr double kIdentityTol = 1e-12;
inline constexpr std::size_t kDefaultWindowCap = 4096;

// Process-wide limit on window length. Set once at startup (the CLI does this
// from --window-cap); reads are atomic.
std::size_t window_cap() noexcept;
void set_window_cap(std::size_t cap);

struct Window {
  Index offset = 0;
  Index length = 1;

  Index end() const noexcept { return offset + length; }
  Index last() const noexcept { return offset + length - 1; }
  bool contains(Index k) const noexcept { return k >= offset && k < end(); }
  bool contains(const Window& w) const noexcept { return w.offset >= offset && w.end() <= end(); }

  /// Smallest window holding absolute indices lo..hi; throws WindowOverflow past the cap.
  static Window covering(Index lo, Index hi);
  static Window spanning(const Window& a, const Window& b) {
    return covering(std::min(a.offset, b.offset), std::max(a.last(), b.last()));
  }

  friend bool operator==(const Window&, const Window&) = default;
};

/// Throws WindowOverflow if the window is empty or longer than window_cap().
void check_window(const Window& w);

double max_abs(const CMatrix& m);

class StateVector {
 public:
  /// No normalization check; callers guarantee the invariant (norm-preserving
  /// operations, internal kernels).
  static StateVector unchecked(Index offset, CVector amps);

  Index offset() const noexcept { return offset_; }
  const CVector& amps() const noexcept { return amps_; }
  Index size() const noexcept { return amps_.size(); }
  Window window() const noexcept { return {offset_, size()}; }

  /// Amplitude at absolute index k (zero outside the window).
  Complex amplitude(Index k) const noexcept;
  double norm() const { return amps_.norm(); }

  /// Same vector re-expressed on a window that contains the current one.
  StateVector on_window(const Window& w) const;

 private:
  StateVector(Index offset, CVector amps) : offset_(offset), amps_(std::move(amps)) {}
  Index offset_ = 0;
  CVector amps_;
};

StateVector make_state(std::span<const Complex> amps, Index offset, bool normalize);
StateVector basis_state(Index k);

/// <a|b>, conjugate-linear in a.
Complex inner(const StateVector& a, const StateVector& b);
/// |<a|b>|; phase-insensitive.
double state_fidelity(const StateVector& a, const StateVector& b);

std::pair<StateVector, StateVector> align_windows(const StateVector& a, const StateVector& b);

class DensityMatrix {
 public:
  static DensityMatrix unchecked(Index offset, CMatrix matrix);

  Index offset() const noexcept { return offset_; }
  const CMatrix& matrix() const noexcept { return matrix_; }
  Index size() const noexcept { return matrix_.rows(); }
  Window window() const noexcept { return {offset_, size()}; }

  Complex entry(Index row, Index col) const noexcept;
  DensityMatrix on_window(const Window& w) const;

 private:
  DensityMatrix(Index offset, CMatrix m) : offset_(offset), matrix_(std::move(m)) {}
  Index offset_ = 0;
  CMatrix matrix_;
};

/// Checks the Hermitian, positive-semidefinite and unit-trace invariants;
/// throws NotHermitian / NotPositive / TraceNotOne with the measured residual.
void validate_density(const CMatrix& m, double tol = kStructuralTol);

DensityMatrix make_density(CMatrix matrix, Index offset, double tol = kStructuralTol);
DensityMatrix pure_density(const StateVector& psi);

/// Half the trace norm of rho - sigma, via a Hermitian eigensolve.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

std::pair<DensityMatrix, DensityMatrix> align_windows(const DensityMatrix& a,
                                                      const DensityMatrix& b);

}  // namespace unifam
