#include "unifam/synth_kraus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <iomanip>
#include <sstream>

#include "unifam/error.hpp"

namespace unifam {

namespace {

constexpr double kNullEigenvalue = 1e-12;

}  // namespace

EigenDecomposition diagonalize(const DensityMatrix& rho) {
  const CMatrix h = 0.5 * (rho.matrix() + rho.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const Index n = h.rows();
  EigenDecomposition out;
  out.window = rho.window();
  out.values.resize(static_cast<std::size_t>(n));
  out.basis.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = n - 1 - j;  // Eigen sorts ascending
    out.values[static_cast<std::size_t>(j)] = es.eigenvalues()[src];
    CVector v = es.eigenvectors().col(src);
    const double peak = v.cwiseAbs().maxCoeff();
    Index anchor = 0;
    while (std::abs(v[anchor]) < peak - 1e-12) ++anchor;
    const double mag = std::abs(v[anchor]);
    v *= std::conj(v[anchor]) / mag;
    v[anchor] = mag;
    out.basis.col(j) = v;
  }
  return out;
}

KrausStage collapse_stage(Index n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "collapse stage needs n >= 1");
  KrausStage stage;
  stage.complement = true;
  for (Index i = 0; i < n; ++i) stage.elements.push_back({1.0, i, true});
  return stage;
}

KrausStage build_stage(const std::vector<double>& weights) {
  if (weights.empty()) throw Error(ErrorCode::BadWeights, "weight list is empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0)
      throw Error(ErrorCode::BadWeights, "weight " + std::to_string(i) + " is negative or non-finite");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kStructuralTol) {
    std::ostringstream os;
    os << "weights sum to " << std::setprecision(17) << sum;
    throw Error(ErrorCode::BadWeights, os.str());
  }
  KrausStage stage;
  for (std::size_t i = 0; i < weights.size(); ++i)
    stage.elements.push_back({weights[i], static_cast<Index>(i), false});
  return stage;
}

ChannelSynthesis steer_density(const DensityMatrix& rho, const DensityMatrix& sigma, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1)");
  const auto t0 = std::chrono::steady_clock::now();
  const EigenDecomposition dr = diagonalize(rho);
  const EigenDecomposition ds = diagonalize(sigma);
  const Index n = rho.size();
  const Index m = sigma.size();

  ChannelProgram prog;
  prog.push_back(Shift{-rho.offset()});
  prog.append(compile_unitary(dr.basis.adjoint(), Window{0, n}, eps / 2.0).sequence);

  const Index rank = std::max<Index>(
      1, std::count_if(dr.values.begin(), dr.values.end(), [](double v) { return v >= kNullEigenvalue; }));
  prog.push_back(collapse_stage(rank));

  std::vector<double> w(ds.values.size());
  std::transform(ds.values.begin(), ds.values.end(), w.begin(),
                 [](double v) { return v < kNullEigenvalue ? 0.0 : v; });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  prog.push_back(build_stage(w));

  prog.append(compile_unitary(ds.basis, Window{0, m}, eps / 2.0).sequence);
  prog.push_back(Shift{sigma.offset()});

  const DensityMatrix out = apply_program(rho, prog);
  const double err = trace_distance(out, sigma);
  const OpCounts c = prog.counts();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {prog, SynthesisReport{err, c.total(), c.u2, c.shift, c.stage, secs}};
}

}  // namespace unifam
