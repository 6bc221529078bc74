#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "unifam/cli.hpp"
#include "unifam/error.hpp"
#include "unifam/serialize.hpp"

using namespace unifam;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("unifam_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "unifam");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = unifam::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void put(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string slurp(const std::string& path) { return io::read_file(path); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an unifam::Error");
  return ErrorCode::InvalidArgument;
}

const char* kE0 = R"({"offset": 0, "amplitudes": [[1, 0]]})";
const char* kPlusDensity = R"({"offset": 0, "matrix": [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]})";
const char* kMixedDensity = R"({"offset": 3, "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]})";
const char* kBadDensity = R"({"offset": 0, "matrix": [[[0.5, 0], [0.6, 0]], [[0.6, 0], [0.5, 0]]]})";

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("canonical state file re-serializes byte for byte") {
    const std::string text =
        "{\n  \"offset\": -2,\n  \"amplitudes\": [\n    [0.6,0.0],\n    [0.0,-0.8]\n  ]\n}\n";
    const StateVector s = io::parse_state(io::parse_text(text, "mem"));
    CHECK(io::canonical_dump(io::to_json(s)) == text);
  }

  TEST_CASE("round trips: parse(serialize(x)) == x") {
    const StateVector s = make_state(std::vector<Complex>{{0.1, 0.2}, {-1.0 / 3.0, 0.0}, {0.0, 0.7}}, 5, true);
    const StateVector s2 = io::parse_state(io::parse_text(io::canonical_dump(io::to_json(s)), "mem"));
    CHECK(s2.offset() == s.offset());
    CHECK(s2.amps() == s.amps());

    CMatrix m(2, 2);
    m << 0.3, Complex{0.1, 0.2}, Complex{0.1, -0.2}, 0.7;
    const DensityMatrix d = make_density(m, -4);
    const DensityMatrix d2 = io::parse_density(io::parse_text(io::canonical_dump(io::to_json(d)), "mem"));
    CHECK(d2.offset() == -4);
    CHECK(d2.matrix() == d.matrix());

    ChannelProgram p;
    p.push_back(Shift{3});
    p.push_back(Shift{-1});  // fuses into Shift(2)
    p.push_back(U2At01{U2Params{0.1, 0.2, 0.3, 0.4}});
    p.push_back(KrausStage{{{0.25, 0, false}, {0.75, 3, true}}, true});
    p.push_back(Shift{-7});
    REQUIRE(p.size() == 4);
    const std::string text = io::canonical_dump(io::to_json(p));
    const ChannelProgram p2 = io::parse_program(io::parse_text(text, "mem"));
    CHECK(p2 == p);
    CHECK(io::canonical_dump(io::to_json(p2)) == text);
  }

  TEST_CASE("schema errors name the field path") {
    auto msg = [](const std::string& text, int which) {
      try {
        const io::Json j = io::parse_text(text, "in.json");
        if (which == 0) io::parse_state(j);
        if (which == 1) io::parse_density(j);
        if (which == 2) io::parse_program(j);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
        return std::string(e.what());
      }
      FAIL("accepted malformed input");
      return std::string();
    };
    CHECK(msg(R"({"offset":0,"amplitudes":[[1,0,0]]})", 0).find("/amplitudes/0") != std::string::npos);
    CHECK(msg(R"({"offset":0,"amplitudes":[[1,0],["x",0]]})", 0).find("/amplitudes/1/0") != std::string::npos);
    CHECK(msg(R"({"amplitudes":[[1,0]]})", 0).find("/offset") != std::string::npos);
    CHECK(msg(R"({"offset":0.5,"amplitudes":[[1,0]]})", 0).find("/offset") != std::string::npos);
    CHECK(msg(R"({"offset":0,"matrix":[[[1,0]],[[0,0]]]})", 1).find("/matrix/0") != std::string::npos);
    CHECK(msg(R"({"ops":[{"op":"shift","k":1},{"op":"warp"}]})", 2).find("/ops/1/op") != std::string::npos);
    CHECK(msg(R"({"ops":[{"op":"u2","theta":1,"phi":0,"lambda":0}]})", 2).find("/ops/0/delta") != std::string::npos);
    CHECK(msg(R"({"ops":[{"op":"kraus","elements":[{"weight":2,"swap":0,"project":true}],"complement":false}]})", 2)
              .find("/ops/0/elements/0/weight") != std::string::npos);
    CHECK(msg("{not json", 0).find("in.json") != std::string::npos);
  }

  TEST_CASE("invariant errors surface through parsing") {
    CHECK(code_of([] { io::parse_state(io::parse_text(R"({"offset":0,"amplitudes":[[1,0],[1,0]]})", "m")); }) ==
          ErrorCode::NotNormalized);
    CHECK(code_of([] { io::parse_density(io::parse_text(kBadDensity, "m")); }) == ErrorCode::NotPositive);
  }

  TEST_CASE("atomic write leaves no temporary behind") {
    TempDir d;
    io::write_file_atomic(d / "x.json", "abc");
    io::write_file_atomic(d / "x.json", "def");
    CHECK(slurp(d / "x.json") == "def");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(d.path)) ++entries;
    CHECK(entries == 1);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("parse_dims") {
    CHECK(cli::parse_dims("2,4,8") == std::vector<Index>{2, 4, 8});
    CHECK(cli::parse_dims("2:4") == std::vector<Index>{2, 3, 4});
    CHECK(cli::parse_dims("7") == std::vector<Index>{7});
    CHECK(code_of([] { cli::parse_dims("2,,4"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { cli::parse_dims("4:2"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { cli::parse_dims("0,1"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { cli::parse_dims("a"); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("steer-state e0 to e0") {
    TempDir d;
    put(d / "e0.json", kE0);
    const Run r = run_cli({"steer-state", "--source", d / "e0.json", "--target", d / "e0.json", "--out", d / "p.json"});
    CHECK(r.code == 0);
    const ChannelProgram p = io::parse_program(io::parse_text(slurp(d / "p.json"), "p"));
    CHECK(p.size() <= 1);
    CHECK(io::parse_text(r.out, "stdout")["final_error"].get<double>() <= 1e-9);
  }

  TEST_CASE("steer-density with a NotPositive input") {
    TempDir d;
    put(d / "bad.json", kBadDensity);
    put(d / "ok.json", kMixedDensity);
    const Run r = run_cli({"steer-density", "--source", d / "bad.json", "--target", d / "ok.json", "--out", d / "p.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("NotPositive") != std::string::npos);
    CHECK(r.err.find("e-01") != std::string::npos);  // residual is reported
    CHECK_FALSE(fs::exists(d / "p.json"));
  }

  TEST_CASE("malformed amplitudes exit 2 with the field path") {
    TempDir d;
    put(d / "odd.json", R"({"offset": 0, "amplitudes": [[1, 0, 0]]})");
    put(d / "e0.json", kE0);
    const Run r = run_cli({"steer-state", "--source", d / "odd.json", "--target", d / "e0.json", "--out", d / "p.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("SchemaError") != std::string::npos);
    CHECK(r.err.find("/amplitudes/0") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "p.json"));
  }

  TEST_CASE("verify universality produces 150 CSV rows") {
    TempDir d;
    const Run r = run_cli({"verify", "--suite", "universality", "--kind", "state", "--dims", "2,4,8", "--trials", "50",
                       "--eps", "1e-9", "--seed", "7", "--csv", d / "u.csv", "--out", d / "u.json"});
    CHECK(r.code == 0);
    const std::string csv = slurp(d / "u.csv");
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 151);
    CHECK(csv.rfind("dim,trial,op_count,u2_count,shift_count,final_error,wall_time_s\r\n", 0) == 0);
    CHECK(slurp(d / "u.json") == r.out);
    const io::Json rep = io::parse_text(r.out, "stdout");
    CHECK(rep["passed"].get<bool>());
    CHECK(rep["rows"].size() == 150);
  }

  TEST_CASE("verify negative and coverage suites") {
    const Run n = run_cli({"verify", "--suite", "negative", "--target-index", "2", "--word-length", "2000", "--seed", "1"});
    CHECK(n.code == 0);
    CHECK(io::parse_text(n.out, "o")["max_target_fidelity"].get<double>() == 0.0);
    const Run c = run_cli({"verify", "--suite", "coverage", "--grid", "4", "--max-length", "2", "--samples", "32"});
    CHECK(c.code == 0);
    CHECK(io::parse_text(c.out, "o")["rows"].size() == 3);
    const Run b = run_cli({"verify", "--suite", "coverage", "--grid", "16", "--max-length", "6", "--node-cap", "1000"});
    CHECK(b.code == 4);
    CHECK(b.err.find("BudgetExceeded") != std::string::npos);
  }

  TEST_CASE("compile-unitary and apply agree") {
    TempDir d;
    put(d / "u.json", R"({"offset": 1, "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]})");
    const Run c = run_cli({"compile-unitary", "--matrix", d / "u.json", "--out", d / "p.json"});
    CHECK(c.code == 0);
    put(d / "x.json", R"({"offset": 1, "amplitudes": [[1, 0]]})");
    const Run a = run_cli({"apply", "--program", d / "p.json", "--input", d / "x.json", "--out", d / "y.json"});
    CHECK(a.code == 0);
    const StateVector y = io::parse_state(io::parse_text(slurp(d / "y.json"), "y"));
    CHECK(std::abs(y.amplitude(2) - 1.0) <= 1e-12);

    put(d / "nu.json", R"({"offset": 0, "matrix": [[[1, 0], [0.5, 0]], [[0, 0], [1, 0]]]})");
    const Run bad = run_cli({"compile-unitary", "--matrix", d / "nu.json", "--out", d / "q.json"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("NotUnitary") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "q.json"));
  }

  TEST_CASE("apply on densities and the KrausOnState guard") {
    TempDir d;
    put(d / "rho.json", kPlusDensity);
    put(d / "sigma.json", kMixedDensity);
    const Run s = run_cli({"steer-density", "--source", d / "rho.json", "--target", d / "sigma.json", "--out", d / "p.json"});
    CHECK(s.code == 0);
    const Run a = run_cli({"apply", "--kind", "density", "--program", d / "p.json", "--input", d / "rho.json"});
    CHECK(a.code == 0);
    const DensityMatrix out = io::parse_density(io::parse_text(a.out, "o"));
    CHECK(trace_distance(out, io::parse_density(io::parse_text(kMixedDensity, "m"))) <= 1e-8);
    put(d / "e0.json", kE0);
    const Run k = run_cli({"apply", "--program", d / "p.json", "--input", d / "e0.json", "--out", d / "z.json"});
    CHECK(k.code == 2);
    CHECK(k.err.find("KrausOnState") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "z.json"));
  }

  TEST_CASE("tolerance unmet exits 3 and still writes outputs") {
    TempDir d;
    // An eps below double-precision rounding cannot be met.
    const Run r = run_cli({"verify", "--suite", "universality", "--dims", "8", "--trials", "3", "--eps", "1e-300",
                       "--csv", d / "u.csv"});
    CHECK(r.code == 3);
    CHECK(r.err.find("ToleranceUnmet") != std::string::npos);
    CHECK(fs::exists(d / "u.csv"));
  }

  TEST_CASE("argument validation exits 2 and writes nothing") {
    TempDir d;
    put(d / "e0.json", kE0);
    CHECK(run_cli({"steer-state", "--source", d / "e0.json"}).code == 2);
    CHECK(run_cli({"steer-state", "--source", d / "e0.json", "--target", d / "e0.json", "--eps", "1.5"}).code == 2);
    CHECK(run_cli({"--window-cap", "8", "steer-state", "--source", d / "e0.json", "--target", d / "e0.json"}).code == 2);
    CHECK(run_cli({"nonsense"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"verify", "--suite", "bogus"}).code == 2);
    CHECK(run_cli({"verify", "--dims", "2,x", "--csv", d / "c.csv"}).code == 2);
    CHECK(run_cli({"steer-state", "--source", d / "missing.json", "--target", d / "e0.json"}).code == 2);
    CHECK_FALSE(fs::exists(d / "c.csv"));
    CHECK(run_cli({"--help"}).code == 0);
  }

  TEST_CASE("window cap overflow exits 4 and writes nothing") {
    TempDir d;
    put(d / "e0.json", kE0);
    put(d / "far.json", R"({"offset": 40, "amplitudes": [[1, 0]]})");
    const Run r = run_cli({"steer-state", "--window-cap", "16", "--source", d / "e0.json", "--target", d / "far.json",
                       "--out", d / "p.json"});
    CHECK(r.code == 4);
    CHECK(r.err.find("WindowOverflow") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "p.json"));
    CHECK(window_cap() == kDefaultWindowCap);
  }

  TEST_CASE("bench rows and slope") {
    TempDir d;
    const Run r = run_cli({"bench", "--dims", "2:4", "--trials", "2", "--csv", d / "b.csv"});
    CHECK(r.code == 0);
    std::size_t lines = 0;
    for (char c : slurp(d / "b.csv")) lines += c == '\n';
    CHECK(lines == 7);
  }

  TEST_CASE("timing is opt-in") {
    const Run a = run_cli({"verify", "--dims", "4", "--trials", "3"});
    CHECK(io::parse_text(a.out, "o")["wall_time_s"].get<double>() == 0.0);
    const Run b = run_cli({"--timing", "verify", "--dims", "4", "--trials", "3"});
    CHECK(b.code == 0);
    const Run c = run_cli({"verify", "--timing", "--dims", "4", "--trials", "3"});
    CHECK(c.code == 0);
  }
}
