#include "unifam/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <sstream>

#include "unifam/error.hpp"
#include "unifam/kernels.hpp"

namespace unifam::verify {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CMatrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex{re, im};
    }
  return z;
}

CMatrix two_level_dense(Index n, Index i0, const Mat2& g) {
  CMatrix d = CMatrix::Identity(n, n);
  d.block(i0, i0, 2, 2) = g;
  return d;
}

// Runs body(i) for i in [0, count), serially or with OpenMP; rethrows the
// lowest-index failure.
template <class Body>
void for_each_trial(std::size_t count, Backend backend, Body&& body) {
  if (backend == Backend::Serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Index draw_offset(std::uint64_t seed) {
  return static_cast<Index>(splitmix64(seed) % 9) - 4;
}

}  // namespace

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ splitmix64(a + 0x632be59bd9b4e019ULL));
  return splitmix64(x ^ splitmix64(b + 0x85157af5ULL));
}

StateVector random_state(Index n, std::uint64_t seed, Index offset) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  std::mt19937_64 rng(seed);
  const CMatrix z = gaussian_matrix(n, 1, rng);
  std::vector<Complex> amps(z.data(), z.data() + n);
  return make_state(amps, offset, true);
}

CMatrix random_unitary(Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  std::mt19937_64 rng(seed);
  const CMatrix z = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= d / std::abs(d);
  }
  return q;
}

DensityMatrix random_density(Index n, std::uint64_t seed, Index offset) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (n == 1) return make_density(CMatrix::Identity(1, 1), offset);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd w(n);
  for (Index i = 0; i < n; ++i) w[i] = expo(rng);
  w /= w.sum();
  const CMatrix u = random_unitary(n, sub_seed(seed, 0x5eed));
  CMatrix rho = u * w.cast<Complex>().asDiagonal() * u.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return make_density(std::move(rho), offset);
}

StateVector dense_apply(const StateVector& x, const GeneratorSequence& seq) {
  Index offset = x.offset();
  CVector v = x.amps();
  for (const auto& op : seq.ops()) {
    if (const auto* s = std::get_if<Shift>(&op)) {
      offset += s->k;
      continue;
    }
    const Window cur{offset, v.size()};
    const Window w = Window::spanning(cur, Window{0, 2});
    CVector padded = CVector::Zero(w.length);
    padded.segment(offset - w.offset, v.size()) = v;
    v = two_level_dense(w.length, -w.offset, u2_matrix(std::get<U2At01>(op).params)) * padded;
    offset = w.offset;
  }
  return StateVector::unchecked(offset, std::move(v));
}

DensityMatrix dense_apply(const DensityMatrix& x, const ChannelProgram& prog) {
  DensityMatrix cur = x;
  for (const auto& item : prog.items()) {
    if (const auto* s = std::get_if<Shift>(&item)) {
      cur = DensityMatrix::unchecked(cur.offset() + s->k, cur.matrix());
    } else if (const auto* u = std::get_if<U2At01>(&item)) {
      const Window w = Window::spanning(cur.window(), Window{0, 2});
      const DensityMatrix p = cur.on_window(w);
      const CMatrix g = two_level_dense(w.length, -w.offset, u2_matrix(u->params));
      cur = DensityMatrix::unchecked(w.offset, g * p.matrix() * g.adjoint());
    } else {
      const auto& stage = std::get<KrausStage>(item);
      const Window w = stage_window(stage, cur.window());
      const DensityMatrix p = cur.on_window(w);
      CMatrix acc = CMatrix::Zero(w.length, w.length);
      for (const auto& k : materialize(stage, w)) acc += k * p.matrix() * k.adjoint();
      cur = DensityMatrix::unchecked(w.offset, std::move(acc));
    }
  }
  return cur;
}

GeneratorSequence random_word(Family family, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<UnitaryOp> ops;
  ops.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    if (family == Family::Full) {
      const int c = pick(rng);
      if (c < 2) {
        ops.push_back(Shift{c == 0 ? -1 : 1});
        continue;
      }
    }
    U2Params p;
    p.theta = angle(rng);
    p.phi = angle(rng);
    p.lam = angle(rng);
    p.delta = angle(rng);
    ops.push_back(U2At01{p});
  }
  return GeneratorSequence(std::move(ops));
}

// ---------------------------------------------------------------------------
// Sweeps

void summarize(SweepResult& r) {
  r.max_error = 0.0;
  r.max_op_count = 0;
  r.wall_time_s = 0.0;
  r.failing_seeds.clear();
  double ops = 0.0;
  for (const auto& row : r.rows) {
    r.max_error = std::max(r.max_error, row.final_error);
    r.max_op_count = std::max(r.max_op_count, row.op_count);
    r.wall_time_s += row.wall_time_s;
    ops += static_cast<double>(row.op_count);
    if (!(row.final_error <= r.eps)) r.failing_seeds.push_back(row.seed);
  }
  r.mean_op_count = r.rows.empty() ? 0.0 : ops / static_cast<double>(r.rows.size());
  r.passed = r.failing_seeds.empty();
}

SweepResult universality_sweep(SweepKind kind, const std::vector<Index>& dims, std::size_t trials,
                               double eps, std::uint64_t seed, Backend backend) {
  const Index dim_limit = kind == SweepKind::State ? 64 : 16;
  for (Index d : dims)
    if (d < 1 || d > dim_limit)
      throw Error(ErrorCode::InvalidArgument,
                  "sweep dimension " + std::to_string(d) + " outside [1, " + std::to_string(dim_limit) + "]");
  SweepResult res;
  res.kind = kind;
  res.dims = dims;
  res.trials = trials;
  res.seed = seed;
  res.eps = eps;
  res.rows.resize(dims.size() * trials);

  for_each_trial(res.rows.size(), backend, [&](std::size_t idx) {
    const Index d = dims[idx / trials];
    const std::size_t t = idx % trials;
    const std::uint64_t s = sub_seed(seed, static_cast<std::uint64_t>(d), t);
    TrialRow row{d, t, s};
    if (kind == SweepKind::State) {
      const StateVector target = random_state(d, sub_seed(s, 1), draw_offset(sub_seed(s, 2)));
      const StateVector source = basis_state(0);
      const Synthesis syn = steer_state(source, target, eps);
      const StateVector out = dense_apply(source, syn.sequence);
      row.final_error = std::max(0.0, 1.0 - inner(target, out).real());
      row.op_count = syn.report.op_count;
      row.u2_count = syn.report.u2_count;
      row.shift_count = syn.report.shift_count;
      row.wall_time_s = syn.report.wall_time_s;
    } else {
      const Index d_sigma = (t % 2 == 0) ? d : std::max<Index>(1, d / 2);
      const DensityMatrix rho = random_density(d, sub_seed(s, 1), draw_offset(sub_seed(s, 2)));
      const DensityMatrix sigma = random_density(d_sigma, sub_seed(s, 3), draw_offset(sub_seed(s, 4)));
      const ChannelSynthesis syn = steer_density(rho, sigma, eps);
      row.final_error = trace_distance(dense_apply(rho, syn.program), sigma);
      row.op_count = syn.report.op_count;
      row.u2_count = syn.report.u2_count;
      row.shift_count = syn.report.shift_count;
      row.wall_time_s = syn.report.wall_time_s;
    }
    res.rows[idx] = row;
  });
  summarize(res);
  return res;
}

// ---------------------------------------------------------------------------
// Negative control

NegativeControlReport negative_control(Index target_index, std::size_t word_length, std::uint64_t seed) {
  if (target_index == 0 || target_index == 1)
    throw Error(ErrorCode::InvalidArgument, "target index must lie outside {0, 1}");
  NegativeControlReport rep;
  rep.target_index = target_index;
  rep.word_length = word_length;
  rep.seed = seed;

  const GeneratorSequence word = random_word(Family::U2Only, word_length, seed);

  kernels::WorkState from_e0 = kernels::WorkState::basis(0);
  const Index lo = std::min<Index>(-2, target_index - 2);
  const Index hi = std::max<Index>(3, target_index + 2);
  const Complex r{std::sqrt(0.5), 0.0};
  const Index two_lo = std::min<Index>(0, target_index);
  kernels::WorkState two{two_lo, std::vector<Complex>(static_cast<std::size_t>(std::abs(target_index) + 1))};
  two.amps[static_cast<std::size_t>(-two_lo)] = r;
  two.amps[static_cast<std::size_t>(target_index - two_lo)] = r;
  kernels::WorkState spread = kernels::WorkState::from(random_state(hi - lo + 1, sub_seed(seed, 7), lo));

  auto moduli = [](const kernels::WorkState& s) {
    std::vector<std::pair<Index, double>> m;
    for (std::size_t k = 0; k < s.amps.size(); ++k) {
      const Index idx = s.offset + static_cast<Index>(k);
      if (idx != 0 && idx != 1) m.emplace_back(idx, std::abs(s.amps[k]));
    }
    return m;
  };
  const auto ref_two = moduli(two);
  const auto ref_spread = moduli(spread);
  auto drift = [](const kernels::WorkState& s, const std::vector<std::pair<Index, double>>& ref) {
    double d = 0.0;
    for (const auto& [idx, m] : ref) d = std::max(d, std::abs(std::abs(s.at(idx)) - m));
    return d;
  };

  for (const auto& op : word.ops()) {
    kernels::apply_op(from_e0, op);
    kernels::apply_op(two, op);
    kernels::apply_op(spread, op);
    rep.max_target_fidelity = std::max(rep.max_target_fidelity, std::abs(from_e0.at(target_index)));
    rep.max_complement_drift =
        std::max({rep.max_complement_drift, drift(two, ref_two), drift(spread, ref_spread)});
  }

  const StateVector goal = basis_state(target_index);
  const Synthesis full = steer_state(basis_state(0), goal, 1e-12);
  rep.full_family_fidelity = state_fidelity(apply_program(basis_state(0), full.sequence), goal);
  rep.passed = rep.max_target_fidelity <= 1e-15 && rep.max_complement_drift <= 1e-12 &&
               rep.full_family_fidelity >= 1.0 - 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// Covering radius

namespace {

struct CoverageWalk {
  const std::vector<Mat2>& letters;
  const std::vector<std::array<Complex, 2>>& samples;
  int max_len;
  // best[d][s]: max fidelity between sample s and any orbit point of word length exactly d.
  std::vector<std::vector<double>> best;

  CoverageWalk(const std::vector<Mat2>& l, const std::vector<std::array<Complex, 2>>& s, int L)
      : letters(l), samples(s), max_len(L),
        best(static_cast<std::size_t>(L + 1), std::vector<double>(s.size(), 0.0)) {}

  void visit(Complex x0, Complex x1, int depth) {
    auto& row = best[static_cast<std::size_t>(depth)];
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const double f = std::abs(std::conj(samples[s][0]) * x0 + std::conj(samples[s][1]) * x1);
      if (f > row[s]) row[s] = f;
    }
    if (depth == max_len) return;
    for (const auto& g : letters) visit(g(0, 0) * x0 + g(0, 1) * x1, g(1, 0) * x0 + g(1, 1) * x1, depth + 1);
  }

  void merge(const CoverageWalk& other) {
    for (std::size_t d = 0; d < best.size(); ++d)
      for (std::size_t s = 0; s < samples.size(); ++s) best[d][s] = std::max(best[d][s], other.best[d][s]);
  }
};

}  // namespace

std::vector<CoverageRow> net_coverage_oracle(const CoverageOptions& opts, Backend backend) {
  if (opts.grid_steps < 1 || opts.grid_steps > 32)
    throw Error(ErrorCode::InvalidArgument, "grid_steps must lie in [1, 32]");
  if (opts.max_word_length < 0 || opts.max_word_length > 6)
    throw Error(ErrorCode::InvalidArgument, "max_word_length must lie in [0, 6]");
  if (opts.sample_points < 1) throw Error(ErrorCode::InvalidArgument, "sample_points must be >= 1");

  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Mat2> letters;
  for (int j = 0; j < opts.grid_steps; ++j)
    letters.push_back(u2_matrix(U2Params{two_pi * j / opts.grid_steps, 0.0, 0.0, 0.0}));
  for (int j = 1; j < opts.grid_steps; ++j)
    letters.push_back(u2_matrix(U2Params{0.0, two_pi * j / opts.grid_steps, 0.0, 0.0}));

  const auto a = static_cast<std::uint64_t>(letters.size());
  std::vector<std::uint64_t> nodes_at(static_cast<std::size_t>(opts.max_word_length + 1));
  std::uint64_t total = 0;
  std::uint64_t layer = 1;
  for (int d = 0; d <= opts.max_word_length; ++d) {
    total += layer;
    nodes_at[static_cast<std::size_t>(d)] = total;
    if (total > opts.node_cap)
      throw Error(ErrorCode::BudgetExceeded, "coverage enumeration needs more than " +
                                                 std::to_string(opts.node_cap) + " words");
    layer *= a;
  }

  // Fibonacci sphere on the Bloch sphere, mapped to (cos(t/2), e^{ip} sin(t/2)).
  std::vector<std::array<Complex, 2>> samples;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < opts.sample_points; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / opts.sample_points;
    const double t = std::acos(z);
    const double p = golden * i;
    samples.push_back({Complex{std::cos(t / 2.0), 0.0}, std::polar(std::sin(t / 2.0), p)});
  }

  const int L = opts.max_word_length;
  CoverageWalk root(letters, samples, L);
  for (std::size_t s = 0; s < samples.size(); ++s) root.best[0][s] = std::abs(samples[s][0]);
  if (L > 0) {
    std::vector<CoverageWalk> parts;
    parts.reserve(letters.size());
    for (std::size_t i = 0; i < letters.size(); ++i) parts.emplace_back(letters, samples, L);
    auto walk = [&](std::size_t i) {
      const Mat2& g = letters[i];
      parts[i].visit(g(0, 0), g(1, 0), 1);
    };
    if (backend == Backend::Serial) {
      for (std::size_t i = 0; i < letters.size(); ++i) walk(i);
    } else {
      const auto n = static_cast<std::int64_t>(letters.size());
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t i = 0; i < n; ++i) walk(static_cast<std::size_t>(i));
    }
    for (const auto& part : parts) root.merge(part);
  }

  std::vector<CoverageRow> rows;
  std::vector<double> cumulative(samples.size(), 0.0);
  for (int d = 0; d <= L; ++d) {
    double radius = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      cumulative[s] = std::max(cumulative[s], root.best[static_cast<std::size_t>(d)][s]);
      radius = std::max(radius, std::acos(std::min(1.0, cumulative[s])));
    }
    rows.push_back({d, radius, nodes_at[static_cast<std::size_t>(d)]});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Benchmark rows

std::vector<TrialRow> bench(const std::vector<Index>& dims, double eps, std::size_t trials,
                            std::uint64_t seed, Backend backend) {
  for (Index d : dims)
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "bench dimension must be >= 1");
  std::vector<TrialRow> rows(dims.size() * trials);
  for_each_trial(rows.size(), backend, [&](std::size_t idx) {
    const Index d = dims[idx / trials];
    const std::size_t t = idx % trials;
    const std::uint64_t s = sub_seed(seed, static_cast<std::uint64_t>(d), t);
    const StateVector source = random_state(d, sub_seed(s, 1));
    const StateVector target = random_state(d, sub_seed(s, 2));
    const Synthesis syn = steer_state(source, target, eps);
    rows[idx] = TrialRow{d, t, s, syn.report.final_error, syn.report.op_count,
                         syn.report.u2_count, syn.report.shift_count, syn.report.wall_time_s};
  });
  return rows;
}

std::string to_csv(const std::vector<TrialRow>& rows, bool include_timing) {
  std::ostringstream os;
  os << "dim,trial,op_count,u2_count,shift_count,final_error,wall_time_s\r\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.dim << ',' << r.trial << ',' << r.op_count << ',' << r.u2_count << ',' << r.shift_count
       << ',' << r.final_error << ',' << (include_timing ? r.wall_time_s : 0.0) << "\r\n";
  }
  return os.str();
}

double op_count_slope(const std::vector<TrialRow>& rows) {
  if (rows.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (const auto& r : rows) {
    mx += static_cast<double>(r.dim);
    my += static_cast<double>(r.op_count);
  }
  mx /= static_cast<double>(rows.size());
  my /= static_cast<double>(rows.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : rows) {
    const double dx = static_cast<double>(r.dim) - mx;
    sxy += dx * (static_cast<double>(r.op_count) - my);
    sxx += dx * dx;
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

}  // namespace unifam::verify
