#include "unifam/kernels.hpp"

#include <algorithm>
#include <exception>

#include "unifam/error.hpp"

namespace unifam::kernels {

WorkState WorkState::from(const StateVector& s) {
  WorkState w{s.offset(), std::vector<Complex>(static_cast<std::size_t>(s.size()))};
  for (Index k = 0; k < s.size(); ++k) w.amps[static_cast<std::size_t>(k)] = s.amps()[k];
  return w;
}

StateVector WorkState::to_state() const {
  CVector v(static_cast<Index>(amps.size()));
  for (std::size_t k = 0; k < amps.size(); ++k) v[static_cast<Index>(k)] = amps[k];
  return StateVector::unchecked(offset, std::move(v));
}

void WorkState::extend(Index lo, Index hi) {
  const Index new_lo = std::min(offset, lo);
  const Index new_hi = std::max(end() - 1, hi);
  if (new_lo == offset && new_hi == end() - 1) return;
  const Window w = Window::covering(new_lo, new_hi);
  std::vector<Complex> grown(static_cast<std::size_t>(w.length));
  std::copy(amps.begin(), amps.end(), grown.begin() + (offset - new_lo));
  amps = std::move(grown);
  offset = new_lo;
}

void apply_u2(WorkState& s, const Mat2& g) {
  s.extend(0, 1);
  auto& a0 = s.amps[static_cast<std::size_t>(-s.offset)];
  auto& a1 = s.amps[static_cast<std::size_t>(1 - s.offset)];
  const Complex x = a0;
  const Complex y = a1;
  a0 = g(0, 0) * x + g(0, 1) * y;
  a1 = g(1, 0) * x + g(1, 1) * y;
}

void apply_op(WorkState& s, const UnitaryOp& op) {
  if (const auto* sh = std::get_if<Shift>(&op)) {
    check_window({s.offset + sh->k, static_cast<Index>(s.amps.size())});
    s.offset += sh->k;
  } else {
    apply_u2(s, u2_matrix(std::get<U2At01>(op).params));
  }
}

namespace {

constexpr double kLeakTol = 1e-14;

void materialize_column(const GeneratorSequence& seq, const Window& window, Index j, CMatrix& out) {
  WorkState s = WorkState::basis(window.offset + j);
  for (const auto& op : seq.ops()) apply_op(s, op);
  for (std::size_t k = 0; k < s.amps.size(); ++k) {
    const Index abs_idx = s.offset + static_cast<Index>(k);
    if (!window.contains(abs_idx) && std::abs(s.amps[k]) > kLeakTol)
      throw Error(ErrorCode::ShiftLeak, "basis vector e_" + std::to_string(window.offset + j) +
                                            " is carried to index " + std::to_string(abs_idx) +
                                            " outside the window");
  }
  for (Index i = 0; i < window.length; ++i) out(i, j) = s.at(window.offset + i);
}

}  // namespace

CMatrix materialize_columns(const GeneratorSequence& seq, const Window& window, Backend backend) {
  check_window(window);
  CMatrix out = CMatrix::Zero(window.length, window.length);
  if (backend == Backend::Serial) {
    for (Index j = 0; j < window.length; ++j) materialize_column(seq, window, j, out);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(window.length));
#pragma omp parallel for schedule(dynamic)
  for (Index j = 0; j < window.length; ++j) {
    try {
      materialize_column(seq, window, j, out);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void conjugate_pair(CMatrix& m, Index i0, Index i1, const Mat2& g) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    const Complex x = m(i0, j);
    const Complex y = m(i1, j);
    m(i0, j) = g(0, 0) * x + g(0, 1) * y;
    m(i1, j) = g(1, 0) * x + g(1, 1) * y;
  }
  const Mat2 gd = g.adjoint();
  for (Index i = 0; i < n; ++i) {
    const Complex x = m(i, i0);
    const Complex y = m(i, i1);
    m(i, i0) = x * gd(0, 0) + y * gd(1, 0);
    m(i, i1) = x * gd(0, 1) + y * gd(1, 1);
  }
}

namespace {

struct LocalElement {
  double weight;
  Index swap;  // local index exchanged with `zero`
  bool project;
};

inline Index swap_through(Index a, Index zero, Index other) {
  if (a == zero) return other;
  if (a == other) return zero;
  return a;
}

void kraus_row(const CMatrix& rho, Index zero, const std::vector<LocalElement>& elems,
               bool complement, Index a, CMatrix& out) {
  const Index n = rho.rows();
  const Index n_proj = static_cast<Index>(elems.size());
  for (const auto& e : elems) {
    if (e.weight == 0.0) continue;
    if (e.project) {
      if (a == zero) out(zero, zero) += e.weight * rho(e.swap, e.swap);
      continue;
    }
    const Index ra = swap_through(a, zero, e.swap);
    for (Index b = 0; b < n; ++b) out(a, b) += e.weight * rho(ra, swap_through(b, zero, e.swap));
  }
  if (complement) {
    auto outside = [&](Index i) { return i < zero || i >= zero + n_proj; };
    if (outside(a))
      for (Index b = 0; b < n; ++b)
        if (outside(b)) out(a, b) += rho(a, b);
  }
}

}  // namespace

CMatrix accumulate_kraus(const CMatrix& rho, Index zero, const KrausStage& stage, Backend backend) {
  std::vector<LocalElement> elems;
  elems.reserve(stage.elements.size());
  for (const auto& e : stage.elements) elems.push_back({e.weight, zero + e.swap_index, e.project});
  const Index n = rho.rows();
  CMatrix out = CMatrix::Zero(n, n);
  if (backend == Backend::Serial) {
    for (Index a = 0; a < n; ++a) kraus_row(rho, zero, elems, stage.complement, a, out);
  } else {
#pragma omp parallel for schedule(static)
    for (Index a = 0; a < n; ++a) kraus_row(rho, zero, elems, stage.complement, a, out);
  }
  return out;
}

}  // namespace unifam::kernels
