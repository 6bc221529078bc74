#include <doctest.h>

#include <omp.h>

#include "oracles.hpp"
#include "unifam/error.hpp"
#include "unifam/kernels.hpp"
#include "unifam/verify.hpp"

using namespace unifam;

namespace {

// Forces a real thread team even on a single-core host.
struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

bool bit_equal(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("materialize_columns: serial and OpenMP are bit-identical") {
    Threads t(4);
    for (Index n : {1, 3, 8, 17, 40}) {
      const Synthesis c = compile_unitary(verify::random_unitary(n, static_cast<std::uint64_t>(n)), Window{-2, n});
      const CMatrix s = kernels::materialize_columns(c.sequence, Window{-2, n}, Backend::Serial);
      const CMatrix p = kernels::materialize_columns(c.sequence, Window{-2, n}, Backend::OpenMP);
      CHECK(bit_equal(s, p));
      CHECK(oracle::max_abs(s - oracle::dense(c.sequence, -2, n)) <= 1e-12);
    }
  }

  TEST_CASE("materialize_columns: ShiftLeak from every backend") {
    Threads t(4);
    const GeneratorSequence w({Shift{2}});
    for (Backend b : {Backend::Serial, Backend::OpenMP}) {
      try {
        kernels::materialize_columns(w, Window{0, 32}, b);
        FAIL("leak not detected");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShiftLeak);
      }
    }
  }

  TEST_CASE("accumulate_kraus: serial and OpenMP are bit-identical") {
    Threads t(4);
    for (Index n : {1, 2, 5, 12, 33}) {
      const DensityMatrix r = verify::random_density(n, static_cast<std::uint64_t>(n), -1).on_window(Window{-1, n + 3});
      const KrausStage stages[] = {collapse_stage(n), build_stage(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n))};
      for (const auto& st : stages) {
        const CMatrix s = kernels::accumulate_kraus(r.matrix(), 1, st, Backend::Serial);
        const CMatrix p = kernels::accumulate_kraus(r.matrix(), 1, st, Backend::OpenMP);
        CHECK(bit_equal(s, p));
        const auto ops = oracle::kraus_ops(st, -1, n + 3);
        CHECK(oracle::max_abs(s - oracle::operator_sum(ops, r.matrix())) <= 1e-12);
      }
    }
  }

  TEST_CASE("conjugate_pair matches the dense two-level product") {
    const DensityMatrix r = verify::random_density(5, 8);
    const Mat2 g = u2_matrix({0.7, 1.3, -0.4, 2.2});
    CMatrix m = r.matrix();
    kernels::conjugate_pair(m, 2, 3, g);
    CMatrix big = CMatrix::Identity(5, 5);
    big.block(2, 2, 2, 2) = oracle::u2(0.7, 1.3, -0.4, 2.2);
    CHECK(oracle::max_abs(m - big * r.matrix() * big.adjoint()) <= 1e-14);
  }

  TEST_CASE("WorkState extension keeps amplitudes") {
    kernels::WorkState w = kernels::WorkState::from(verify::random_state(3, 1, 5));
    const auto before = w.amps;
    w.extend(-2, 9);
    CHECK(w.offset == -2);
    CHECK(w.end() == 10);
    for (Index k = 0; k < 3; ++k) CHECK(w.at(5 + k) == before[static_cast<std::size_t>(k)]);
    CHECK(w.at(0) == Complex{});
  }

  TEST_CASE("sweeps and coverage: serial and OpenMP agree exactly") {
    Threads t(4);
    const auto a = verify::universality_sweep(verify::SweepKind::State, {3, 9}, 8, 1e-9, 4, Backend::Serial);
    const auto b = verify::universality_sweep(verify::SweepKind::State, {3, 9}, 8, 1e-9, 4, Backend::OpenMP);
    CHECK(verify::to_csv(a.rows, false) == verify::to_csv(b.rows, false));
    const auto c = verify::universality_sweep(verify::SweepKind::Density, {3, 4}, 4, 1e-8, 4, Backend::Serial);
    const auto d = verify::universality_sweep(verify::SweepKind::Density, {3, 4}, 4, 1e-8, 4, Backend::OpenMP);
    CHECK(verify::to_csv(c.rows, false) == verify::to_csv(d.rows, false));
    verify::CoverageOptions o;
    o.grid_steps = 6;
    o.max_word_length = 3;
    const auto x = verify::net_coverage_oracle(o, Backend::Serial);
    const auto y = verify::net_coverage_oracle(o, Backend::OpenMP);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].radius == y[i].radius);
    CHECK(verify::to_csv(verify::bench({2, 7}, 1e-9, 5, 3, Backend::Serial), false) ==
          verify::to_csv(verify::bench({2, 7}, 1e-9, 5, 3, Backend::OpenMP), false));
  }

  TEST_CASE("parallel trials rethrow the lowest-index failure") {
    Threads t(4);
    set_window_cap(16);
    try {
      verify::universality_sweep(verify::SweepKind::State, {2, 20}, 3, 1e-9, 0, Backend::OpenMP);
      FAIL("expected overflow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::WindowOverflow);
    }
    set_window_cap(kDefaultWindowCap);
  }
}
