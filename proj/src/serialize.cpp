#include "unifam/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "unifam/error.hpp"

namespace unifam::io {

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, (path.empty() ? "/" : path) + ": " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema(path + "/" + key, "missing field");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  return j.get<double>();
}

Index integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) schema(path, "expected an integer");
  return j.get<Index>();
}

bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) schema(path, "expected true or false");
  return j.get<bool>();
}

Complex complex_pair(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) schema(path, "expected [re, im] pair");
  return {number(j[0], path + "/0"), number(j[1], path + "/1")};
}

Json pair(Complex z) { return Json::array({z.real(), z.imag()}); }

CMatrix parse_square(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema(path, "expected a non-empty array of rows");
  const auto n = static_cast<Index>(j.size());
  CMatrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    const std::string rp = path + "/" + std::to_string(r);
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      schema(rp, "expected a row of " + std::to_string(n) + " [re, im] pairs");
    for (Index c = 0; c < n; ++c)
      m(r, c) = complex_pair(row[static_cast<std::size_t>(c)], rp + "/" + std::to_string(c));
  }
  return m;
}

Json matrix_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(pair(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Json parse_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, origin + ": malformed JSON (" + e.what() + ")");
  }
}

std::string canonical_dump(const Json& j) {
  if (!j.is_object()) return j.dump() + "\n";
  std::string out = "{\n";
  bool first = true;
  for (const auto& [key, value] : j.items()) {
    if (!first) out += ",\n";
    first = false;
    out += "  " + Json(key).dump() + ": ";
    if (value.is_array() && !value.empty()) {
      out += "[\n";
      for (std::size_t i = 0; i < value.size(); ++i) {
        out += "    " + value[i].dump();
        out += (i + 1 < value.size()) ? ",\n" : "\n";
      }
      out += "  ]";
    } else {
      out += value.dump();
    }
  }
  out += "\n}\n";
  return out;
}

StateVector parse_state(const Json& j) {
  const Index offset = integer(field(j, "offset", ""), "/offset");
  const Json& amps = field(j, "amplitudes", "");
  if (!amps.is_array() || amps.empty()) schema("/amplitudes", "expected a non-empty array");
  std::vector<Complex> v;
  v.reserve(amps.size());
  for (std::size_t k = 0; k < amps.size(); ++k) v.push_back(complex_pair(amps[k], "/amplitudes/" + std::to_string(k)));
  return make_state(v, offset, false);
}

Json to_json(const StateVector& s) {
  Json amps = Json::array();
  for (Index k = 0; k < s.size(); ++k) amps.push_back(pair(s.amps()[k]));
  Json j;
  j["offset"] = s.offset();
  j["amplitudes"] = std::move(amps);
  return j;
}

DensityMatrix parse_density(const Json& j, double tol) {
  const Index offset = integer(field(j, "offset", ""), "/offset");
  return make_density(parse_square(field(j, "matrix", ""), "/matrix"), offset, tol);
}

Json to_json(const DensityMatrix& d) {
  Json j;
  j["offset"] = d.offset();
  j["matrix"] = matrix_json(d.matrix());
  return j;
}

UnitaryFile parse_unitary(const Json& j) {
  const Index offset = integer(field(j, "offset", ""), "/offset");
  CMatrix m = parse_square(field(j, "matrix", ""), "/matrix");
  const Window w{offset, m.rows()};
  check_window(w);
  return {w, std::move(m)};
}

ChannelProgram parse_program(const Json& j) {
  const Json& ops = field(j, "ops", "");
  if (!ops.is_array()) schema("/ops", "expected an array");
  std::vector<ProgramItem> items;
  items.reserve(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const std::string p = "/ops/" + std::to_string(i);
    const Json& op = ops[i];
    const Json& kind = field(op, "op", p);
    if (!kind.is_string()) schema(p + "/op", "expected a string");
    const std::string name = kind.get<std::string>();
    if (name == "shift") {
      items.push_back(Shift{integer(field(op, "k", p), p + "/k")});
    } else if (name == "u2") {
      U2Params u{number(field(op, "theta", p), p + "/theta"), number(field(op, "phi", p), p + "/phi"),
                 number(field(op, "lambda", p), p + "/lambda"), number(field(op, "delta", p), p + "/delta")};
      items.push_back(U2At01{u.canonical()});
    } else if (name == "kraus") {
      KrausStage stage;
      const Json& elems = field(op, "elements", p);
      if (!elems.is_array()) schema(p + "/elements", "expected an array");
      for (std::size_t e = 0; e < elems.size(); ++e) {
        const std::string ep = p + "/elements/" + std::to_string(e);
        KrausElement el;
        el.weight = number(field(elems[e], "weight", ep), ep + "/weight");
        el.swap_index = integer(field(elems[e], "swap", ep), ep + "/swap");
        el.project = boolean(field(elems[e], "project", ep), ep + "/project");
        if (!(el.weight >= 0.0 && el.weight <= 1.0)) schema(ep + "/weight", "expected a weight in [0, 1]");
        if (el.swap_index < 0) schema(ep + "/swap", "expected a non-negative index");
        stage.elements.push_back(el);
      }
      stage.complement = boolean(field(op, "complement", p), p + "/complement");
      items.push_back(std::move(stage));
    } else {
      schema(p + "/op", "unknown op \"" + name + "\"");
    }
  }
  return ChannelProgram(std::move(items));
}

Json to_json(const ChannelProgram& p) {
  Json ops = Json::array();
  for (const auto& item : p.items()) {
    Json o;
    if (const auto* s = std::get_if<Shift>(&item)) {
      o["op"] = "shift";
      o["k"] = s->k;
    } else if (const auto* u = std::get_if<U2At01>(&item)) {
      o["op"] = "u2";
      o["theta"] = u->params.theta;
      o["phi"] = u->params.phi;
      o["lambda"] = u->params.lam;
      o["delta"] = u->params.delta;
    } else {
      const auto& stage = std::get<KrausStage>(item);
      o["op"] = "kraus";
      Json elems = Json::array();
      for (const auto& e : stage.elements) {
        Json ej;
        ej["weight"] = e.weight;
        ej["swap"] = e.swap_index;
        ej["project"] = e.project;
        elems.push_back(std::move(ej));
      }
      o["elements"] = std::move(elems);
      o["complement"] = stage.complement;
    }
    ops.push_back(std::move(o));
  }
  Json j;
  j["ops"] = std::move(ops);
  return j;
}

Json to_json(const GeneratorSequence& s) {
  std::vector<ProgramItem> items;
  for (const auto& op : s.ops()) std::visit([&](const auto& x) { items.push_back(x); }, op);
  return to_json(ChannelProgram(std::move(items)));
}

Json to_json(const SynthesisReport& r) {
  Json j;
  j["final_error"] = r.final_error;
  j["op_count"] = r.op_count;
  j["u2_count"] = r.u2_count;
  j["shift_count"] = r.shift_count;
  j["stage_count"] = r.stage_count;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

Json to_json(const verify::SweepResult& r) {
  Json j;
  j["kind"] = r.kind == verify::SweepKind::State ? "state" : "density";
  j["dims"] = r.dims;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["eps"] = r.eps;
  j["max_error"] = r.max_error;
  j["mean_op_count"] = r.mean_op_count;
  j["max_op_count"] = r.max_op_count;
  j["wall_time_s"] = r.wall_time_s;
  j["passed"] = r.passed;
  j["failing_seeds"] = r.failing_seeds;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json o;
    o["dim"] = row.dim;
    o["trial"] = row.trial;
    o["seed"] = row.seed;
    o["final_error"] = row.final_error;
    o["op_count"] = row.op_count;
    o["u2_count"] = row.u2_count;
    o["shift_count"] = row.shift_count;
    o["wall_time_s"] = row.wall_time_s;
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  return j;
}

Json to_json(const verify::NegativeControlReport& r) {
  Json j;
  j["target_index"] = r.target_index;
  j["word_length"] = r.word_length;
  j["seed"] = r.seed;
  j["max_target_fidelity"] = r.max_target_fidelity;
  j["max_complement_drift"] = r.max_complement_drift;
  j["full_family_fidelity"] = r.full_family_fidelity;
  j["passed"] = r.passed;
  return j;
}

Json to_json(const std::vector<verify::CoverageRow>& rows, const verify::CoverageOptions& opts) {
  Json j;
  j["grid_steps"] = opts.grid_steps;
  j["max_word_length"] = opts.max_word_length;
  j["sample_points"] = opts.sample_points;
  Json table = Json::array();
  for (const auto& r : rows) {
    Json o;
    o["length"] = r.length;
    o["radius"] = r.radius;
    o["nodes"] = r.nodes;
    table.push_back(std::move(o));
  }
  j["rows"] = std::move(table);
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp);
    out << contents;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error(ErrorCode::InvalidArgument, "short write to " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto " + path + ": " + ec.message());
  }
}

}  // namespace unifam::io
