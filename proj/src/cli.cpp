#include "unifam/cli.hpp"

#include <chrono>
#include <ostream>
#include <utility>

#include <CLI11.hpp>

#include "unifam/error.hpp"
#include "unifam/serialize.hpp"

namespace unifam::cli {

namespace {

using io::Json;

// Everything a subcommand produces. Files are written only after the command
// finished without throwing, so a failing run leaves no partial output.
struct Outcome {
  int code = Ok;
  std::string stdout_text;
  std::vector<std::pair<std::string, std::string>> files;

  void emit(const std::string& path, std::string contents) {
    if (!path.empty()) files.emplace_back(path, std::move(contents));
  }
};

struct Options {
  std::size_t window_cap = kDefaultWindowCap;
  bool timing = false;

  std::string source, target, input, matrix, program, out, csv;
  double eps = 0.0;
  std::string dims;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string suite = "universality";
  std::string kind = "state";
  Index target_index = 2;
  std::size_t word_length = 10'000;
  verify::CoverageOptions coverage;
};

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorCode::InvalidArgument, "--eps must lie in (0, 1), got " + std::to_string(eps));
}

Json load(const std::string& path) { return io::parse_text(io::read_file(path), path); }

void stamp(SynthesisReport& r, bool timing) {
  if (!timing) r.wall_time_s = 0.0;
}

void stamp(verify::SweepResult& r, bool timing) {
  if (timing) return;
  for (auto& row : r.rows) row.wall_time_s = 0.0;
  summarize(r);
}

std::string report_text(const SynthesisReport& r) { return io::canonical_dump(io::to_json(r)); }

int tolerance_code(double err, double eps) { return err <= eps ? Ok : ToleranceUnmet; }

Outcome steer_state_cmd(const Options& o) {
  check_eps(o.eps);
  const StateVector src = io::parse_state(load(o.source));
  const StateVector tgt = io::parse_state(load(o.target));
  Synthesis syn = steer_state(src, tgt, o.eps);
  stamp(syn.report, o.timing);
  Outcome res;
  res.code = tolerance_code(syn.report.final_error, o.eps);
  res.stdout_text = report_text(syn.report);
  res.emit(o.out, io::canonical_dump(io::to_json(syn.sequence)));
  return res;
}

Outcome steer_density_cmd(const Options& o) {
  check_eps(o.eps);
  const DensityMatrix rho = io::parse_density(load(o.source));
  const DensityMatrix sigma = io::parse_density(load(o.target));
  ChannelSynthesis syn = steer_density(rho, sigma, o.eps);
  stamp(syn.report, o.timing);
  Outcome res;
  res.code = tolerance_code(syn.report.final_error, o.eps);
  res.stdout_text = report_text(syn.report);
  res.emit(o.out, io::canonical_dump(io::to_json(syn.program)));
  return res;
}

Outcome compile_unitary_cmd(const Options& o) {
  check_eps(o.eps);
  const io::UnitaryFile u = io::parse_unitary(load(o.matrix));
  Synthesis syn = compile_unitary(u.matrix, u.window, o.eps);
  stamp(syn.report, o.timing);
  Outcome res;
  res.code = tolerance_code(syn.report.final_error, o.eps);
  res.stdout_text = report_text(syn.report);
  res.emit(o.out, io::canonical_dump(io::to_json(syn.sequence)));
  return res;
}

Outcome apply_cmd(const Options& o) {
  const ChannelProgram prog = io::parse_program(load(o.program));
  const Json in = load(o.input);
  Json result;
  if (o.kind == "state") {
    result = io::to_json(apply_program(io::parse_state(in), prog));
  } else {
    result = io::to_json(apply_program(io::parse_density(in), prog));
  }
  Outcome res;
  res.stdout_text = io::canonical_dump(result);
  res.emit(o.out, res.stdout_text);
  return res;
}

Outcome verify_cmd(const Options& o) {
  Outcome res;
  Json report;
  if (o.suite == "universality") {
    check_eps(o.eps);
    const auto kind = o.kind == "state" ? verify::SweepKind::State : verify::SweepKind::Density;
    verify::SweepResult r = verify::universality_sweep(kind, parse_dims(o.dims), o.trials, o.eps, o.seed);
    stamp(r, o.timing);
    report = io::to_json(r);
    res.code = r.passed ? Ok : ToleranceUnmet;
    res.emit(o.csv, verify::to_csv(r.rows, o.timing));
  } else if (o.suite == "negative") {
    const verify::NegativeControlReport r = verify::negative_control(o.target_index, o.word_length, o.seed);
    report = io::to_json(r);
    res.code = r.passed ? Ok : ToleranceUnmet;
  } else {
    const auto rows = verify::net_coverage_oracle(o.coverage);
    bool shape = rows.size() < 2 || rows[1].radius < rows[0].radius;
    for (std::size_t i = 2; i < rows.size(); ++i) shape = shape && rows[i].radius <= rows[i - 1].radius;
    report = io::to_json(rows, o.coverage);
    report["passed"] = shape;
    res.code = shape ? Ok : ToleranceUnmet;
  }
  res.stdout_text = io::canonical_dump(report);
  res.emit(o.out, res.stdout_text);
  return res;
}

Outcome bench_cmd(const Options& o) {
  check_eps(o.eps);
  const std::vector<Index> dims = parse_dims(o.dims);
  std::vector<verify::TrialRow> rows = verify::bench(dims, o.eps, o.trials, o.seed);
  if (!o.timing)
    for (auto& r : rows) r.wall_time_s = 0.0;
  double max_error = 0.0, ops = 0.0;
  for (const auto& r : rows) {
    max_error = std::max(max_error, r.final_error);
    ops += static_cast<double>(r.op_count);
  }
  Json report;
  report["dims"] = dims;
  report["trials"] = o.trials;
  report["seed"] = o.seed;
  report["eps"] = o.eps;
  report["max_error"] = max_error;
  report["mean_op_count"] = rows.empty() ? 0.0 : ops / static_cast<double>(rows.size());
  report["op_count_slope"] = verify::op_count_slope(rows);
  Outcome res;
  res.code = tolerance_code(max_error, o.eps);
  res.stdout_text = io::canonical_dump(report);
  res.emit(o.out, res.stdout_text);
  res.emit(o.csv, verify::to_csv(rows, o.timing));
  return res;
}

int exit_for(ErrorCode code) {
  return (code == ErrorCode::WindowOverflow || code == ErrorCode::BudgetExceeded) ? ResourceCap : Validation;
}

}  // namespace

std::vector<Index> parse_dims(const std::string& text) {
  auto number = [&](const std::string& s) -> Index {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw Error(ErrorCode::InvalidArgument, "--dims: \"" + s + "\" is not an integer");
    return static_cast<Index>(v);
  };
  std::vector<Index> dims;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const Index a = number(text.substr(0, colon));
    const Index b = number(text.substr(colon + 1));
    if (b < a) throw Error(ErrorCode::InvalidArgument, "--dims: empty range " + text);
    for (Index d = a; d <= b; ++d) dims.push_back(d);
  } else {
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      dims.push_back(number(text.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  for (Index d : dims)
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "--dims: dimension " + std::to_string(d) + " < 1");
  return dims;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"unifam: generator-sequence and channel-program synthesis on l2(Z)"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--window-cap", o.window_cap, "Largest window length")->check(CLI::Range(16ul, 1ul << 40));
  app.add_flag("--timing", o.timing, "Record wall-clock times (otherwise written as 0)");

  auto* ss = app.add_subcommand("steer-state", "Word steering --source to --target");
  ss->add_option("--source", o.source)->required();
  ss->add_option("--target", o.target)->required();
  ss->add_option("--eps", o.eps)->default_val(1e-9);
  ss->add_option("--out", o.out, "Program JSON");

  auto* sd = app.add_subcommand("steer-density", "Channel program steering --source to --target");
  sd->add_option("--source", o.source)->required();
  sd->add_option("--target", o.target)->required();
  sd->add_option("--eps", o.eps)->default_val(1e-8);
  sd->add_option("--out", o.out, "Program JSON");

  auto* cu = app.add_subcommand("compile-unitary", "Word realizing a unitary on its window");
  cu->add_option("--matrix", o.matrix)->required();
  cu->add_option("--eps", o.eps)->default_val(1e-10);
  cu->add_option("--out", o.out, "Program JSON");

  auto* ap = app.add_subcommand("apply", "Run a program on a state or density");
  ap->add_option("--program", o.program)->required();
  ap->add_option("--input", o.input)->required();
  ap->add_option("--kind", o.kind)->check(CLI::IsMember({"state", "density"}));
  ap->add_option("--out", o.out);

  auto* vf = app.add_subcommand("verify", "Verification suites");
  vf->add_option("--suite", o.suite)->check(CLI::IsMember({"universality", "negative", "coverage"}));
  vf->add_option("--kind", o.kind)->check(CLI::IsMember({"state", "density"}));
  vf->add_option("--dims", o.dims)->default_val("2,4,8");
  vf->add_option("--trials", o.trials)->default_val(50);
  vf->add_option("--eps", o.eps)->default_val(1e-9);
  vf->add_option("--seed", o.seed)->default_val(0);
  vf->add_option("--target-index", o.target_index);
  vf->add_option("--word-length", o.word_length);
  vf->add_option("--grid", o.coverage.grid_steps);
  vf->add_option("--max-length", o.coverage.max_word_length);
  vf->add_option("--samples", o.coverage.sample_points)->check(CLI::PositiveNumber);
  vf->add_option("--node-cap", o.coverage.node_cap);
  vf->add_option("--csv", o.csv);
  vf->add_option("--out", o.out, "Report JSON");

  auto* bn = app.add_subcommand("bench", "Sequence-length benchmark");
  bn->add_option("--dims", o.dims)->default_val("2,4,8,16,32,64");
  bn->add_option("--trials", o.trials)->default_val(10);
  bn->add_option("--eps", o.eps)->default_val(1e-9);
  bn->add_option("--seed", o.seed)->default_val(0);
  bn->add_option("--csv", o.csv);
  bn->add_option("--out", o.out, "Report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "InvalidArgument: " << e.what() << "\n";
    return Validation;
  }

  const std::size_t saved_cap = window_cap();
  set_window_cap(o.window_cap);
  Outcome res;
  try {
    if (ss->parsed()) res = steer_state_cmd(o);
    else if (sd->parsed()) res = steer_density_cmd(o);
    else if (cu->parsed()) res = compile_unitary_cmd(o);
    else if (ap->parsed()) res = apply_cmd(o);
    else if (vf->parsed()) res = verify_cmd(o);
    else res = bench_cmd(o);
    for (const auto& [path, contents] : res.files) io::write_file_atomic(path, contents);
  } catch (const Error& e) {
    set_window_cap(saved_cap);
    err << e.what() << "\n";
    return exit_for(e.code());
  } catch (const std::exception& e) {
    set_window_cap(saved_cap);
    err << "Unexpected: " << e.what() << "\n";
    return Unexpected;
  }
  set_window_cap(saved_cap);

  out << res.stdout_text;
  if (res.code == ToleranceUnmet) err << "ToleranceUnmet: final error exceeds --eps\n";
  return res.code;
}

}  // namespace unifam::cli
