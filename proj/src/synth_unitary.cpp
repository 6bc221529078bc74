#include "unifam/synth_unitary.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>

#include "unifam/error.hpp"

namespace unifam {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1)");
}

// Rotation on {0, 1} sending a0 e0 + a1 e1 to r e1 with r = sqrt(|a0|^2 + |a1|^2) real.
U2Params merge_params(Complex a0, Complex a1) {
  const double alpha = std::arg(a0);
  const double beta = std::arg(a1);
  return U2Params{2.0 * std::atan2(std::abs(a0), std::abs(a1)), -alpha - beta, alpha - beta, beta}
      .canonical();
}

// Rotation on {0, 1} sending x e0 + y e1 to r e0 (zeroes the lower entry).
U2Params clear_params(Complex x, Complex y) {
  constexpr double pi = std::numbers::pi;
  const double alpha = std::arg(x);
  const double beta = std::arg(y);
  return U2Params{2.0 * std::atan2(std::abs(y), std::abs(x)), pi + beta + alpha, pi - beta + alpha,
                  -alpha}
      .canonical();
}

void push_two_level(GeneratorSequence& seq, Index a, const U2Params& p) {
  seq.push_back(Shift{-a});
  seq.push_back(U2At01{p});
  seq.push_back(Shift{a});
}

const Complex kOne{1.0, 0.0};

}  // namespace

SynthesisReport report_for(const GeneratorSequence& seq, double final_error, double wall_time_s) {
  const OpCounts c = seq.counts();
  return SynthesisReport{final_error, c.total(), c.u2, c.shift, 0, wall_time_s};
}

Synthesis fold_to_e0(const StateVector& a, double eps) {
  check_eps(eps);
  const auto t0 = Clock::now();
  const CVector& amps = a.amps();

  // Trim ends while the dropped mass stays within budget; exact zeros always go.
  Index lo = 0;
  Index hi = a.size() - 1;
  double dropped = 0.0;
  const double budget = eps / 2.0;
  while (lo < hi) {
    const double m_lo = std::norm(amps[lo]);
    const double m_hi = std::norm(amps[hi]);
    const bool take_lo = m_lo <= m_hi;
    const double m = take_lo ? m_lo : m_hi;
    if (m != 0.0 && dropped + m > budget) break;
    dropped += m;
    (take_lo ? lo : hi) += take_lo ? 1 : -1;
  }

  GeneratorSequence seq;
  seq.push_back(Shift{-(a.offset() + lo)});
  std::vector<Complex> v(amps.data() + lo, amps.data() + hi + 1);
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    if (std::abs(v[j]) >= 1e-14) {
      const U2Params p = merge_params(v[j], v[j + 1]);
      const Mat2 g = u2_matrix(p);
      const Complex x = v[j];
      const Complex y = v[j + 1];
      v[j] = g(0, 0) * x + g(0, 1) * y;
      v[j + 1] = g(1, 0) * x + g(1, 1) * y;
      seq.push_back(U2At01{p});
    }
    seq.push_back(Shift{-1});
  }
  const Complex z = v.back();
  if (!(z.imag() == 0.0 && z.real() >= 0.0)) seq.push_back(U2At01{diagonal_u2(std::conj(z) / std::abs(z), kOne)});

  const StateVector out = apply_program(a, seq);
  const double err = std::max(0.0, 1.0 - out.amplitude(0).real());
  return {seq, report_for(seq, err, seconds_since(t0))};
}

GeneratorSequence invert(const GeneratorSequence& seq) {
  std::vector<UnitaryOp> ops;
  ops.reserve(seq.size());
  for (auto it = seq.ops().rbegin(); it != seq.ops().rend(); ++it) {
    if (const auto* s = std::get_if<Shift>(&*it))
      ops.push_back(Shift{-s->k});
    else
      ops.push_back(U2At01{u2_adjoint(std::get<U2At01>(*it).params)});
  }
  return GeneratorSequence(std::move(ops));
}

GeneratorSequence invert(const ChannelProgram& prog) { return invert(prog.as_sequence()); }

Synthesis steer_state(const StateVector& source, const StateVector& target, double eps) {
  check_eps(eps);
  const auto t0 = Clock::now();
  const Synthesis fs = fold_to_e0(source, eps / 8.0);
  const Synthesis ft = fold_to_e0(target, eps / 8.0);
  GeneratorSequence seq = fs.sequence;
  seq.append(invert(ft.sequence));
  const StateVector out = apply_program(source, seq);
  const double err = std::max(0.0, 1.0 - inner(target, out).real());
  return {seq, report_for(seq, err, seconds_since(t0))};
}

GeneratorSequence fuse_u2(const GeneratorSequence& seq) {
  GeneratorSequence out;
  std::optional<Mat2> run;
  std::size_t run_len = 0;
  U2Params first{};
  auto flush = [&] {
    if (!run) return;
    if (run_len == 1) {
      out.push_back(U2At01{first});
    } else if (*run != Mat2::Identity()) {
      out.push_back(U2At01{u2_params_from_matrix(*run)});
    }
    run.reset();
    run_len = 0;
  };
  for (const auto& op : seq.ops()) {
    if (const auto* u = std::get_if<U2At01>(&op)) {
      if (!run) {
        run = u2_matrix(u->params);
        first = u->params;
      } else {
        run = (u2_matrix(u->params) * *run).eval();
      }
      ++run_len;
    } else {
      flush();
      out.push_back(op);
    }
  }
  flush();
  return out;
}

Synthesis compile_unitary(const CMatrix& u, const Window& window, double eps) {
  check_eps(eps);
  const auto t0 = Clock::now();
  check_window(window);
  if (u.rows() != u.cols() || u.rows() != window.length)
    throw Error(ErrorCode::InvalidArgument, "unitary must be square with side equal to the window length");
  const Index n = u.rows();
  const double unit_res = max_abs(u.adjoint() * u - CMatrix::Identity(n, n));
  if (!(unit_res <= kStructuralTol))
    throw Error(ErrorCode::NotUnitary, "max |U^dagger U - I| = " + std::to_string(unit_res));

  // Forward word F with F applied = U^{-1}.
  CMatrix w = u;
  GeneratorSequence forward;
  for (Index c = 0; c + 1 < n; ++c) {
    for (Index r = n - 1; r > c; --r) {
      const Complex y = w(r, c);
      if (y == Complex{}) continue;
      const U2Params p = clear_params(w(r - 1, c), y);
      const Mat2 g = u2_matrix(p);
      for (Index j = 0; j < n; ++j) {
        const Complex top = w(r - 1, j);
        const Complex bot = w(r, j);
        w(r - 1, j) = g(0, 0) * top + g(0, 1) * bot;
        w(r, j) = g(1, 0) * top + g(1, 1) * bot;
      }
      push_two_level(forward, window.offset + r - 1, p);
    }
  }

  std::vector<Complex> phase(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    const Complex d = w(j, j);
    phase[static_cast<std::size_t>(j)] = std::conj(d / std::abs(d));
  }
  auto push_diag = [&](Index a, Complex p, Complex q) {
    if (p == kOne && q == kOne) return;
    push_two_level(forward, a, diagonal_u2(p, q));
  };
  for (Index j = 0; j < n; j += 2) {
    const auto pj = phase[static_cast<std::size_t>(j)];
    if (j + 1 < n)
      push_diag(window.offset + j, pj, phase[static_cast<std::size_t>(j + 1)]);
    else if (n >= 2)
      push_diag(window.offset + j - 1, kOne, pj);
    else
      push_diag(window.offset, pj, kOne);
  }

  GeneratorSequence seq = fuse_u2(invert(forward));
  const double err = max_abs(materialize(seq, window) - u);
  return {seq, report_for(seq, err, seconds_since(t0))};
}

}  // namespace unifam
