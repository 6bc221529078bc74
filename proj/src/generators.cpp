#include "unifam/generators.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "unifam/error.hpp"
#include "unifam/kernels.hpp"

namespace unifam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::atomic<std::size_t> g_program_cap{kDefaultProgramCap};

// Wraps into [0, 2pi).
double wrap_angle(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// e^{ix}, exact at multiples of pi/2 so that Pi and diagonal sign flips stay exact.
Complex unit_phase(double x) {
  const double r = std::remainder(x, kTwoPi);
  if (r == 0.0) return {1.0, 0.0};
  if (r == kPi || r == -kPi) return {-1.0, 0.0};
  if (r == kPi / 2) return {0.0, 1.0};
  if (r == -kPi / 2) return {0.0, -1.0};
  return std::polar(1.0, x);
}

// (cos h, sin h), exact at multiples of pi/2.
std::pair<double, double> cos_sin(double h) {
  const double r = std::remainder(h, kTwoPi);
  if (r == 0.0) return {1.0, 0.0};
  if (r == kPi / 2) return {0.0, 1.0};
  if (r == kPi || r == -kPi) return {-1.0, 0.0};
  if (r == -kPi / 2) return {0.0, -1.0};
  return {std::cos(h), std::sin(h)};
}

void check_shift(Index k) {
  if (static_cast<std::size_t>(k < 0 ? -k : k) > window_cap())
    throw Error(ErrorCode::WindowOverflow,
                "shift " + std::to_string(k) + " exceeds window cap " + std::to_string(window_cap()));
}

void check_params(const U2Params& p) {
  if (!std::isfinite(p.theta) || !std::isfinite(p.phi) || !std::isfinite(p.lam) ||
      !std::isfinite(p.delta))
    throw Error(ErrorCode::InvalidArgument, "non-finite U(2) parameter");
}

void check_length(std::size_t n) {
  if (n > program_cap())
    throw Error(ErrorCode::BudgetExceeded, "program length " + std::to_string(n) +
                                               " exceeds cap " + std::to_string(program_cap()));
}

void check_stage(const KrausStage& stage) {
  for (const auto& e : stage.elements) {
    if (!std::isfinite(e.weight) || e.weight < 0.0 || e.weight > 1.0)
      throw Error(ErrorCode::InvalidArgument, "Kraus weight must be finite and in [0, 1]");
    if (e.swap_index < 0) throw Error(ErrorCode::InvalidArgument, "Kraus swap index must be >= 0");
    check_shift(e.swap_index);
  }
}

void check_op(const UnitaryOp& op) {
  if (const auto* s = std::get_if<Shift>(&op))
    check_shift(s->k);
  else
    check_params(std::get<U2At01>(op).params);
}

// Shift fusion on any vector whose element type can hold a Shift.
template <class Vec>
void push_fused(Vec& ops, const UnitaryOp& op) {
  check_op(op);
  if (const auto* s = std::get_if<Shift>(&op)) {
    if (s->k == 0) return;
    if (!ops.empty()) {
      if (auto* last = std::get_if<Shift>(&ops.back())) {
        const Index sum = last->k + s->k;
        if (static_cast<std::size_t>(sum < 0 ? -sum : sum) <= window_cap()) {
          if (sum == 0)
            ops.pop_back();
          else
            last->k = sum;
          return;
        }
      }
    }
    check_length(ops.size() + 1);
    ops.push_back(*s);
    return;
  }
  check_length(ops.size() + 1);
  ops.push_back(std::get<U2At01>(op));
}

void apply_unitary_inplace(Index& offset, CMatrix& m, const UnitaryOp& op) {
  if (const auto* s = std::get_if<Shift>(&op)) {
    check_window({offset + s->k, m.rows()});
    offset += s->k;
    return;
  }
  const Window cur{offset, m.rows()};
  const Window w = Window::spanning(cur, Window{0, 2});
  if (w != cur) {
    CMatrix grown = CMatrix::Zero(w.length, w.length);
    grown.block(offset - w.offset, offset - w.offset, m.rows(), m.cols()) = m;
    m = std::move(grown);
    offset = w.offset;
  }
  kernels::conjugate_pair(m, -offset, 1 - offset, u2_matrix(std::get<U2At01>(op).params));
}

}  // namespace

std::size_t program_cap() noexcept { return g_program_cap.load(std::memory_order_relaxed); }

void set_program_cap(std::size_t cap) {
  if (cap < 1) throw Error(ErrorCode::InvalidArgument, "program cap must be positive");
  g_program_cap.store(cap, std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------
// U(2) chart

U2Params U2Params::canonical() const {
  U2Params p = *this;
  double t = std::remainder(theta, 2.0 * kTwoPi);  // [-2pi, 2pi]
  if (t < 0.0) {
    t += kTwoPi;
    p.delta += kPi;
  } else if (t >= kTwoPi) {
    t -= kTwoPi;
    p.delta += kPi;
  }
  p.theta = t >= kTwoPi ? 0.0 : t;
  p.phi = wrap_angle(p.phi);
  p.lam = wrap_angle(p.lam);
  p.delta = wrap_angle(p.delta);
  return p;
}

Mat2 u2_matrix(const U2Params& p) {
  const auto [c, s] = cos_sin(p.theta / 2.0);
  Mat2 m;
  m(0, 0) = unit_phase(p.delta) * c;
  m(0, 1) = -unit_phase(p.delta + p.lam) * s;
  m(1, 0) = unit_phase(p.delta + p.phi) * s;
  m(1, 1) = unit_phase(p.delta + p.phi + p.lam) * c;
  return m;
}

U2Params u2_params_from_matrix(const Mat2& m) {
  const double c = std::abs(m(0, 0));
  const double s = std::abs(m(1, 0));
  U2Params p;
  p.theta = 2.0 * std::atan2(s, c);
  if (c >= s) {
    p.delta = std::arg(m(0, 0));
    p.phi = s > 0.0 ? std::arg(m(1, 0)) - p.delta : 0.0;
    p.lam = std::arg(m(1, 1)) - p.delta - p.phi;
  } else {
    const double a = std::arg(m(1, 0));
    const double b = std::arg(-m(0, 1));
    p.delta = c > 0.0 ? a + b - std::arg(m(1, 1)) : 0.0;
    p.phi = a - p.delta;
    p.lam = b - p.delta;
  }
  return p.canonical();
}

U2Params u2_adjoint(const U2Params& p) {
  return U2Params{-p.theta, -p.lam, -p.phi, -p.delta}.canonical();
}

U2Params diagonal_u2(Complex p, Complex q) {
  const double ap = std::arg(p);
  return U2Params{0.0, std::arg(q) - ap, 0.0, ap}.canonical();
}

U2Params pi_op() { return U2Params{kPi, 0.0, kPi, 0.0}; }

// ---------------------------------------------------------------------------
// Sequences and programs

GeneratorSequence::GeneratorSequence(std::vector<UnitaryOp> ops) : ops_(std::move(ops)) {
  check_length(ops_.size());
  for (const auto& op : ops_) check_op(op);
}

void GeneratorSequence::push_back(const UnitaryOp& op) { push_fused(ops_, op); }

void GeneratorSequence::append(const GeneratorSequence& other) {
  for (const auto& op : other.ops_) push_back(op);
}

OpCounts GeneratorSequence::counts() const {
  OpCounts c;
  for (const auto& op : ops_) (std::holds_alternative<Shift>(op) ? c.shift : c.u2)++;
  return c;
}

ChannelProgram::ChannelProgram(std::vector<ProgramItem> items) : items_(std::move(items)) {
  check_length(items_.size());
  for (const auto& item : items_) {
    if (const auto* s = std::get_if<Shift>(&item)) check_shift(s->k);
    else if (const auto* u = std::get_if<U2At01>(&item)) check_params(u->params);
    else check_stage(std::get<KrausStage>(item));
  }
}

void ChannelProgram::push_back(const UnitaryOp& op) { push_fused(items_, op); }

void ChannelProgram::push_back(const KrausStage& stage) {
  check_stage(stage);
  check_length(items_.size() + 1);
  items_.push_back(stage);
}

void ChannelProgram::append(const GeneratorSequence& seq) {
  for (const auto& op : seq.ops()) push_back(op);
}

bool ChannelProgram::is_unitary() const noexcept {
  for (const auto& item : items_)
    if (std::holds_alternative<KrausStage>(item)) return false;
  return true;
}

GeneratorSequence ChannelProgram::as_sequence() const {
  std::vector<UnitaryOp> ops;
  ops.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& item = items_[i];
    if (const auto* s = std::get_if<Shift>(&item)) ops.push_back(*s);
    else if (const auto* u = std::get_if<U2At01>(&item)) ops.push_back(*u);
    else throw Error(ErrorCode::NotInvertible, "item " + std::to_string(i) + " is a Kraus stage");
  }
  return GeneratorSequence(std::move(ops));
}

OpCounts ChannelProgram::counts() const {
  OpCounts c;
  for (const auto& item : items_) {
    if (std::holds_alternative<Shift>(item)) ++c.shift;
    else if (std::holds_alternative<U2At01>(item)) ++c.u2;
    else ++c.stage;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Application

StateVector apply_unitary(const StateVector& x, const UnitaryOp& op) {
  check_op(op);
  if (const auto* s = std::get_if<Shift>(&op)) {
    check_window({x.offset() + s->k, x.size()});
    return StateVector::unchecked(x.offset() + s->k, x.amps());
  }
  auto w = kernels::WorkState::from(x);
  kernels::apply_op(w, op);
  return w.to_state();
}

DensityMatrix apply_unitary(const DensityMatrix& x, const UnitaryOp& op) {
  check_op(op);
  Index offset = x.offset();
  CMatrix m = x.matrix();
  apply_unitary_inplace(offset, m, op);
  return DensityMatrix::unchecked(offset, std::move(m));
}

GeneratorSequence pi_n_sequence(Index n) {
  GeneratorSequence seq;
  seq.push_back(Shift{-n});
  seq.push_back(U2At01{pi_op()});
  seq.push_back(Shift{n});
  return seq;
}

GeneratorSequence swap_chain_sequence(Index k, Index p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "swap distance p must be >= 1");
  GeneratorSequence seq;
  for (Index j = k; j < k + p; ++j) seq.append(pi_n_sequence(j));
  for (Index j = k + p - 2; j >= k; --j) seq.append(pi_n_sequence(j));
  return seq;
}

CMatrix materialize(const GeneratorSequence& seq, const Window& window, Backend backend) {
  return kernels::materialize_columns(seq, window, backend);
}

CMatrix materialize(const KrausElement& element, const Window& window) {
  check_window(window);
  if (!window.contains(0) || !window.contains(element.swap_index))
    throw Error(ErrorCode::WindowOverflow, "Kraus element touches index " +
                                               std::to_string(element.swap_index) +
                                               " outside the window");
  const Index n = window.length;
  const Index z = -window.offset;
  const Index s = z + element.swap_index;
  CMatrix perm = CMatrix::Identity(n, n);
  if (s != z) {
    perm(z, z) = perm(s, s) = 0.0;
    perm(z, s) = perm(s, z) = 1.0;
  }
  if (element.project) {
    const CMatrix row = perm.row(z);
    perm.setZero();
    perm.row(z) = row;
  }
  return std::sqrt(element.weight) * perm;
}

std::vector<CMatrix> materialize(const KrausStage& stage, const Window& window) {
  std::vector<CMatrix> ks;
  for (const auto& e : stage.elements) ks.push_back(materialize(e, window));
  if (stage.complement) {
    const Index n_proj = static_cast<Index>(stage.elements.size());
    CMatrix c = CMatrix::Zero(window.length, window.length);
    for (Index i = 0; i < window.length; ++i) {
      const Index abs_idx = window.offset + i;
      if (abs_idx < 0 || abs_idx >= n_proj) c(i, i) = 1.0;
    }
    ks.push_back(std::move(c));
  }
  return ks;
}

Window stage_window(const KrausStage& stage, const Window& base) {
  Index hi = 0;
  for (const auto& e : stage.elements) hi = std::max(hi, e.swap_index);
  if (stage.complement && !stage.elements.empty())
    hi = std::max(hi, static_cast<Index>(stage.elements.size()) - 1);
  return Window::spanning(base, Window::covering(0, hi));
}

double tp_residual(const KrausStage& stage, const Window& window) {
  check_stage(stage);
  if (!window.contains(stage_window(stage, window)))
    throw Error(ErrorCode::InvalidArgument, "window does not contain every index the stage touches");
  // Every K_i^dagger K_i here is diagonal: Pi_{0,i} P0 Pi_{0,i} = |e_i><e_i| and Pi_{0,i}^2 = I.
  std::vector<double> diag(static_cast<std::size_t>(window.length), 0.0);
  const Index z = -window.offset;
  for (const auto& e : stage.elements) {
    if (e.project) {
      diag[static_cast<std::size_t>(z + e.swap_index)] += e.weight;
    } else {
      for (auto& d : diag) d += e.weight;
    }
  }
  if (stage.complement) {
    const Index n_proj = static_cast<Index>(stage.elements.size());
    for (Index i = 0; i < window.length; ++i) {
      const Index abs_idx = window.offset + i;
      if (abs_idx < 0 || abs_idx >= n_proj) diag[static_cast<std::size_t>(i)] += 1.0;
    }
  }
  double res = 0.0;
  for (double d : diag) res = std::max(res, std::abs(d - 1.0));
  return res;
}

DensityMatrix apply_kraus_stage(const DensityMatrix& rho, const KrausStage& stage, Backend backend) {
  check_stage(stage);
  const Window w = stage_window(stage, rho.window());
  const double res = tp_residual(stage, w);
  if (res > kStructuralTol) {
    std::ostringstream os;
    os << "max |sum K^dagger K - I| = " << std::scientific << res << " on window [" << w.offset
       << ", " << w.last() << "]";
    throw Error(ErrorCode::NotTracePreserving, os.str());
  }
  const DensityMatrix padded = rho.on_window(w);
  return DensityMatrix::unchecked(w.offset,
                                  kernels::accumulate_kraus(padded.matrix(), -w.offset, stage, backend));
}

StateVector apply_program(const StateVector& x, const GeneratorSequence& seq) {
  auto w = kernels::WorkState::from(x);
  for (const auto& op : seq.ops()) kernels::apply_op(w, op);
  return w.to_state();
}

StateVector apply_program(const StateVector& x, const ChannelProgram& prog) {
  for (std::size_t i = 0; i < prog.size(); ++i)
    if (std::holds_alternative<KrausStage>(prog.items()[i]))
      throw Error(ErrorCode::KrausOnState,
                  "item " + std::to_string(i) + " is a Kraus stage; states accept only unitary ops");
  return apply_program(x, prog.as_sequence());
}

DensityMatrix apply_program(const DensityMatrix& x, const GeneratorSequence& seq) {
  Index offset = x.offset();
  CMatrix m = x.matrix();
  for (const auto& op : seq.ops()) apply_unitary_inplace(offset, m, op);
  return DensityMatrix::unchecked(offset, std::move(m));
}

DensityMatrix apply_program(const DensityMatrix& x, const ChannelProgram& prog,
                            const DensityObserver& observer, Backend backend) {
  Index offset = x.offset();
  CMatrix m = x.matrix();
  for (std::size_t i = 0; i < prog.size(); ++i) {
    const auto& item = prog.items()[i];
    if (const auto* stage = std::get_if<KrausStage>(&item)) {
      DensityMatrix out =
          apply_kraus_stage(DensityMatrix::unchecked(offset, std::move(m)), *stage, backend);
      offset = out.offset();
      m = out.matrix();
    } else if (const auto* s = std::get_if<Shift>(&item)) {
      apply_unitary_inplace(offset, m, *s);
    } else {
      apply_unitary_inplace(offset, m, std::get<U2At01>(item));
    }
    if (observer) observer(i, DensityMatrix::unchecked(offset, m));
  }
  return DensityMatrix::unchecked(offset, std::move(m));
}

}  // namespace unifam
