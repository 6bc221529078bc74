#include "unifam/hilbert.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "unifam/error.hpp"

namespace unifam {

namespace {

std::atomic<std::size_t> g_window_cap{kDefaultWindowCap};

// Keeps index arithmetic far from int64 overflow.
constexpr Index kIndexLimit = Index{1} << 60;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

bool all_finite(const CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

}  // namespace

std::size_t window_cap() noexcept { return g_window_cap.load(std::memory_order_relaxed); }

void set_window_cap(std::size_t cap) {
  if (cap < 1) throw Error(ErrorCode::InvalidArgument, "window cap must be positive");
  g_window_cap.store(cap, std::memory_order_relaxed);
}

Window Window::covering(Index lo, Index hi) {
  if (lo > hi) throw Error(ErrorCode::InvalidArgument, "empty index range");
  if (lo < -kIndexLimit || hi > kIndexLimit)
    throw Error(ErrorCode::WindowOverflow, "absolute index out of representable range");
  Window w{lo, hi - lo + 1};
  check_window(w);
  return w;
}

void check_window(const Window& w) {
  if (w.length < 1) throw Error(ErrorCode::InvalidArgument, "window length must be >= 1");
  if (static_cast<std::size_t>(w.length) > window_cap())
    throw Error(ErrorCode::WindowOverflow, "window length " + std::to_string(w.length) +
                                               " exceeds cap " + std::to_string(window_cap()));
  if (w.offset < -kIndexLimit || w.end() > kIndexLimit)
    throw Error(ErrorCode::WindowOverflow, "window offset out of representable range");
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// StateVector

StateVector StateVector::unchecked(Index offset, CVector amps) {
  return StateVector(offset, std::move(amps));
}

Complex StateVector::amplitude(Index k) const noexcept {
  return window().contains(k) ? amps_[k - offset_] : Complex{};
}

StateVector StateVector::on_window(const Window& w) const {
  if (!w.contains(window()))
    throw Error(ErrorCode::InvalidArgument, "target window does not contain the state window");
  check_window(w);
  if (w == window()) return *this;
  CVector out = CVector::Zero(w.length);
  out.segment(offset_ - w.offset, size()) = amps_;
  return StateVector(w.offset, std::move(out));
}

StateVector make_state(std::span<const Complex> amps, Index offset, bool normalize) {
  if (amps.empty()) throw Error(ErrorCode::InvalidArgument, "amplitude list is empty");
  check_window({offset, static_cast<Index>(amps.size())});
  CVector v(static_cast<Index>(amps.size()));
  for (std::size_t k = 0; k < amps.size(); ++k) {
    if (!std::isfinite(amps[k].real()) || !std::isfinite(amps[k].imag()))
      throw Error(ErrorCode::InvalidArgument, "non-finite amplitude at position " + std::to_string(k));
    v[static_cast<Index>(k)] = amps[k];
  }
  const double norm = v.norm();
  if (normalize) {
    if (norm < 1e-14) throw Error(ErrorCode::ZeroVector, "norm " + fmt(norm) + " below 1e-14");
    v /= norm;
  } else if (std::abs(v.squaredNorm() - 1.0) > kStructuralTol) {
    throw Error(ErrorCode::NotNormalized,
                "squared norm deviates from 1 by " + fmt(std::abs(v.squaredNorm() - 1.0)));
  }
  return StateVector::unchecked(offset, std::move(v));
}

StateVector basis_state(Index k) {
  CVector v(1);
  v[0] = 1.0;
  return StateVector::unchecked(k, std::move(v));
}

Complex inner(const StateVector& a, const StateVector& b) {
  const Index lo = std::max(a.offset(), b.offset());
  const Index hi = std::min(a.window().end(), b.window().end());
  Complex acc{};
  for (Index k = lo; k < hi; ++k) acc += std::conj(a.amps()[k - a.offset()]) * b.amps()[k - b.offset()];
  return acc;
}

double state_fidelity(const StateVector& a, const StateVector& b) { return std::abs(inner(a, b)); }

std::pair<StateVector, StateVector> align_windows(const StateVector& a, const StateVector& b) {
  const Window w = Window::spanning(a.window(), b.window());
  return {a.on_window(w), b.on_window(w)};
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix DensityMatrix::unchecked(Index offset, CMatrix matrix) {
  return DensityMatrix(offset, std::move(matrix));
}

Complex DensityMatrix::entry(Index row, Index col) const noexcept {
  const Window w = window();
  if (!w.contains(row) || !w.contains(col)) return {};
  return matrix_(row - offset_, col - offset_);
}

DensityMatrix DensityMatrix::on_window(const Window& w) const {
  if (!w.contains(window()))
    throw Error(ErrorCode::InvalidArgument, "target window does not contain the density window");
  check_window(w);
  if (w == window()) return *this;
  CMatrix out = CMatrix::Zero(w.length, w.length);
  const Index shift = offset_ - w.offset;
  out.block(shift, shift, size(), size()) = matrix_;
  return DensityMatrix(w.offset, std::move(out));
}

void validate_density(const CMatrix& m, double tol) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw Error(ErrorCode::InvalidArgument, "density matrix must be square and non-empty");
  if (!all_finite(m)) throw Error(ErrorCode::InvalidArgument, "non-finite density matrix entry");
  const double herm = max_abs(m - m.adjoint());
  if (herm > tol) throw Error(ErrorCode::NotHermitian, "max |M - M^dagger| = " + fmt(herm));
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol) throw Error(ErrorCode::NotPositive, "min eigenvalue = " + fmt(min_eig));
  const Complex tr = m.trace();
  const double tr_err = std::abs(tr - Complex{1.0, 0.0});
  if (tr_err > tol) throw Error(ErrorCode::TraceNotOne, "|trace - 1| = " + fmt(tr_err));
}

DensityMatrix make_density(CMatrix matrix, Index offset, double tol) {
  validate_density(matrix, tol);
  check_window({offset, matrix.rows()});
  return DensityMatrix::unchecked(offset, std::move(matrix));
}

DensityMatrix pure_density(const StateVector& psi) {
  return DensityMatrix::unchecked(psi.offset(), psi.amps() * psi.amps().adjoint());
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const auto [a, b] = align_windows(rho, sigma);
  CMatrix diff = a.matrix() - b.matrix();
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::pair<DensityMatrix, DensityMatrix> align_windows(const DensityMatrix& a,
                                                      const DensityMatrix& b) {
  const Window w = Window::spanning(a.window(), b.window());
  return {a.on_window(w), b.on_window(w)};
}

}  // namespace unifam
