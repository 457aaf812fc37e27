#include "rpl/pipeline.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "rpl/dynamics.hpp"
#include "rpl/errors.hpp"
#include "rpl/fgr.hpp"
#include "rpl/ground_state.hpp"
#include "rpl/linearization.hpp"
#include "rpl/profile.hpp"
#include "rpl/resonance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rpl {

namespace {

constexpr int kSchemaVersion = 1;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"nonlinearity", {"kind", "numerator", "denominator"}},
      {"grid", {"dimension", "R", "h", "order"}},
      {"omega", {"star", "sweep"}},
      {"tolerances",
       {"tol_gs", "tol_eig", "tol_prof", "tol_mod", "tau_cls", "tau_res", "tau_fgr", "tau_edge", "tau_vk", "tau_cont",
        "tau_kernel"}},
      {"resonance", {"K_max"}},
      {"stages", {"run"}},
      {"simulation",
       {"dt", "T", "stride", "sponge", "sponge_onset", "sponge_strength", "mode", "amplitude", "phase", "transient",
        "windows", "comfort"}},
      {"output", {"dir", "cache_dir"}},
      {"run", {"seed"}},
  };
  return k;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto it = kv_.find(key);
    std::string where = it == kv_.end() ? "" : "line " + std::to_string(it->second.line) + ": ";
    throw Error(ErrorKind::Config, where + key + ": " + msg);
  }

  const std::string& raw(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw Error(ErrorKind::Config, "missing required key " + key);
    return it->second.value;
  }

  double number(const std::string& key) const {
    const std::string& v = raw(key);
    try {
      size_t pos = 0;
      double x = std::stod(v, &pos);
      if (trim(v.substr(pos)).empty() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    fail(key, "expected a finite number, got '" + v + "'");
  }
  double number(const std::string& key, double def) const { return has(key) ? number(key) : def; }

  long long integer(const std::string& key) const {
    const std::string& v = raw(key);
    try {
      size_t pos = 0;
      long long x = std::stoll(v, &pos);
      if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    fail(key, "expected an integer, got '" + v + "'");
  }
  long long integer(const std::string& key, long long def) const { return has(key) ? integer(key) : def; }

  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    std::string v = raw(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    fail(key, "expected a boolean, got '" + raw(key) + "'");
  }

  std::string text(const std::string& key, const std::string& def) const { return has(key) ? raw(key) : def; }

  std::vector<std::string> items(const std::string& key) const {
    std::string v = trim(raw(key));
    if (!v.empty() && v.front() == '[') {
      if (v.back() != ']') fail(key, "unterminated list");
      v = v.substr(1, v.size() - 2);
    }
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list element");
      out.push_back(item);
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : items(key)) {
      try {
        size_t pos = 0;
        double x = std::stod(s, &pos);
        if (pos == s.size() && std::isfinite(x)) {
          out.push_back(x);
          continue;
        }
      } catch (const std::exception&) {
      }
      fail(key, "expected a list of finite numbers, got element '" + s + "'");
    }
    return out;
  }

 private:
  std::map<std::string, Entry> kv_;
};

std::map<std::string, Entry> tokenize(const std::string& text) {
  std::map<std::string, Entry> kv;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t c = line.find_first_of("#;");
    if (c != std::string::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    auto at = [&](const std::string& m) { return Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": " + m); };
    if (line.front() == '[') {
      if (line.back() != ']') throw at("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!allowed_keys().count(section)) throw at("unknown section [" + section + "]");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw at("expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section.empty()) throw at("key '" + key + "' outside any section");
    if (key.empty()) throw at("empty key");
    std::string full = section + "." + key;
    if (!allowed_keys().at(section).count(key)) throw at("unknown key " + full);
    if (kv.count(full)) throw at("duplicate key " + full + " (first at line " + std::to_string(kv[full].line) + ")");
    if (value.empty()) throw at(full + ": empty value");
    kv[full] = {value, lineno};
  }
  return kv;
}

const std::map<std::string, std::vector<std::string>>& dependencies() {
  static const std::map<std::string, std::vector<std::string>> d = {
      {"ground", {}},           {"spectrum", {"ground"}}, {"resonance", {"spectrum"}},
      {"profile", {"resonance"}}, {"fgr", {"profile"}},   {"simulate", {"profile"}},
  };
  return d;
}

json nl_json(const Nonlinearity& nl) {
  return json{{"kind", nl.kind == Nonlinearity::Kind::Polynomial ? "polynomial" : "rational"},
              {"numerator", nl.numerator},
              {"denominator", nl.denominator}};
}

json grid_json(const RadialGrid& g) {
  return json{{"dimension", g.dimension()}, {"R", g.R()}, {"h", g.h()}, {"order", g.order()}};
}

std::string hex(const unsigned char* md, size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (size_t i = 0; i < n; ++i) {
    s += digits[md[i] >> 4];
    s += digits[md[i] & 15];
  }
  return s;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    os << text;
    if (!os) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string num17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void dump_rec(const json& j, int indent, std::string& out) {
  const std::string pad(indent, ' '), pad2(indent + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad2 + json(it.key()).dump() + ": ";
        dump_rec(it.value(), indent + 2, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_rec(j[i], indent + 2, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad2;
        dump_rec(j[i], indent + 2, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += num17(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

json hypothesis_json(const HypothesisStatus& h) {
  json j{{"status", status_name(h.status)}, {"evidence", json::object()}};
  for (const auto& [k, v] : h.evidence) j["evidence"][k] = v;
  if (!h.note.empty()) j["note"] = h.note;
  return j;
}

HypothesisStatus skipped(const std::string& why) {
  HypothesisStatus h;
  h.status = Status::Skipped;
  h.note = why;
  return h;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const std::vector<const Vec*>& cols) {
  std::string s;
  for (size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
  s += "\n";
  const int n = cols.empty() ? 0 : static_cast<int>(cols[0]->size());
  for (int i = 0; i < n; ++i) {
    for (size_t c = 0; c < cols.size(); ++c) s += (c ? "," : "") + num17((*cols[c])[i]);
    s += "\n";
  }
  write_text_atomic(path, s);
}

// bounded worker pool over independent jobs; results keep job order
template <class T>
std::vector<T> parallel_map(size_t n, const std::function<T(size_t)>& f) {
  std::vector<T> out(n);
  size_t width = std::max<size_t>(1, std::thread::hardware_concurrency());
  for (size_t start = 0; start < n; start += width) {
    std::vector<std::future<T>> batch;
    for (size_t i = start; i < std::min(n, start + width); ++i) batch.push_back(std::async(std::launch::async, f, i));
    for (size_t i = 0; i < batch.size(); ++i) out[start + i] = batch[i].get();
  }
  return out;
}

class FieldCache {
 public:
  explicit FieldCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  GroundState ground_state(const Nonlinearity& nl, double omega, const RadialGrid& grid, double tol_gs) {
    json in{{"stage", "ground"}, {"schema", kSchemaVersion}, {"nonlinearity", nl_json(nl)},
            {"omega", omega},    {"grid", grid_json(grid)},  {"tol_gs", tol_gs}};
    const std::string key = cache_key(in);
    const fs::path bin = dir_ / (key + ".bin"), meta = dir_ / (key + ".json");
    if (fs::exists(bin) && fs::exists(meta)) {
      try {
        auto fields = read_fields_binary(bin.string(), grid.hash64());
        std::ifstream is(meta);
        json m = json::parse(is);
        if (fields.size() == 2 && m.at("inputs") == in) {
          GroundState gs;
          gs.omega = omega;
          gs.phi = fields[0];
          gs.dphi = fields[1];
          gs.residual = m.at("residual");
          gs.mass = m.at("mass");
          gs.dmass = m.at("dmass");
          gs.dphi_residual = m.at("dphi_residual");
          gs.newton_iterations = m.at("newton_iterations");
          ++hits;
          return gs;
        }
      } catch (const std::exception&) {
        // unreadable entry: recompute and overwrite
      }
    }
    ++misses;
    GroundStateOptions opt;
    opt.tol = tol_gs;
    GroundState gs = solve_ground_state(nl, omega, grid, std::nullopt, opt);
    json m{{"inputs", in},
           {"residual", gs.residual},
           {"mass", gs.mass},
           {"dmass", gs.dmass},
           {"dphi_residual", gs.dphi_residual},
           {"newton_iterations", gs.newton_iterations}};
    // metadata first: a reader needs both files, and the binary lands last
    write_text_atomic(meta, m.dump());
    write_fields_binary(bin.string(), grid.hash64(), {gs.phi, gs.dphi});
    return gs;
  }

  std::atomic<int> hits{0}, misses{0};

 private:
  fs::path dir_;
};

fs::path resolve(const std::string& base, const std::string& p) {
  fs::path q(p);
  if (q.is_absolute()) return q;
  return fs::path(base) / q;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> s = {"ground", "spectrum", "resonance", "profile", "fgr", "simulate"};
  return s;
}

json PipelineConfig::canonical() const {
  json t{{"tol_gs", tol.tol_gs},     {"tol_eig", tol.tol_eig},   {"tol_prof", tol.tol_prof},
         {"tol_mod", tol.tol_mod},   {"tau_cls", tol.tau_cls},   {"tau_res", tol.tau_res},
         {"tau_fgr", tol.tau_fgr},   {"tau_edge", tol.tau_edge}, {"tau_vk", tol.tau_vk},
         {"tau_cont", tol.tau_cont}, {"tau_kernel", tol.tau_kernel}};
  json s{{"dt", sim.dt},
         {"T", sim.T},
         {"stride", sim.stride},
         {"sponge", sim.sponge},
         {"sponge_onset", sim.sponge_onset},
         {"sponge_strength", sim.sponge_strength},
         {"mode", sim.mode},
         {"amplitude", sim.amplitude},
         {"phase", sim.phase},
         {"transient", sim.transient},
         {"windows", sim.windows},
         {"comfort", sim.comfort}};
  json j{{"nonlinearity", nl_json(nl)},
         {"grid", {{"dimension", dimension}, {"R", R}, {"h", h}, {"order", order}}},
         {"omega", {{"star", omega}, {"sweep", sweep}}},
         {"tolerances", t},
         {"K_max", K_max ? json(*K_max) : json(nullptr)},
         {"stages", stages},
         {"seed", seed}};
  if (std::find(stages.begin(), stages.end(), "simulate") != stages.end()) j["simulation"] = s;
  return j;
}

PipelineConfig parse_config(const std::string& text, const std::string& base_dir) {
  Reader rd(tokenize(text));
  PipelineConfig c;

  std::string kind = rd.text("nonlinearity.kind", "polynomial");
  auto num = rd.numbers("nonlinearity.numerator");
  try {
    if (kind == "polynomial") {
      if (rd.has("nonlinearity.denominator")) {
        auto den = rd.numbers("nonlinearity.denominator");
        if (den.size() > 1) rd.fail("nonlinearity.denominator", "polynomial kind takes no denominator");
      }
      c.nl = Nonlinearity::polynomial(num);
    } else if (kind == "rational") {
      c.nl = Nonlinearity::rational(num, rd.numbers("nonlinearity.denominator"));
    } else {
      rd.fail("nonlinearity.kind", "expected polynomial or rational, got '" + kind + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    rd.fail("nonlinearity.numerator", e.what());
  }

  c.dimension = static_cast<int>(rd.integer("grid.dimension"));
  if (c.dimension < 1 || c.dimension > 3) rd.fail("grid.dimension", "must be 1, 2 or 3");
  c.R = rd.number("grid.R");
  if (!(c.R > 0)) rd.fail("grid.R", "must be positive");
  c.omega = rd.number("omega.star");
  if (!(c.omega > 0)) rd.fail("omega.star", "must be positive");
  // points-per-wavelength default: 120 points across 2 pi / sqrt(omega)
  if (rd.has("grid.h")) {
    c.h = rd.number("grid.h");
  } else {
    double target = 2.0 * std::numbers::pi / (120.0 * std::sqrt(c.omega));
    c.h = c.R / std::ceil(c.R / target);
  }
  if (!(c.h > 0 && c.h < c.R)) rd.fail("grid.h", "must lie in (0, R)");
  c.order = static_cast<int>(rd.integer("grid.order", c.dimension == 2 ? 2 : 4));
  try {
    RadialGrid probe(c.dimension, c.R, c.h, c.order);
  } catch (const Error& e) {
    rd.fail("grid.order", e.what());
  }
  if (rd.has("omega.sweep")) {
    c.sweep = rd.numbers("omega.sweep");
    if (c.sweep.size() < 3) rd.fail("omega.sweep", "needs at least 3 points");
    for (double w : c.sweep)
      if (!(w > 0)) rd.fail("omega.sweep", "every point must be positive");
    if (!std::is_sorted(c.sweep.begin(), c.sweep.end()) ||
        std::adjacent_find(c.sweep.begin(), c.sweep.end()) != c.sweep.end())
      rd.fail("omega.sweep", "must be strictly increasing");
  }

  auto tol = [&](const char* k, double& slot) {
    std::string key = std::string("tolerances.") + k;
    slot = rd.number(key, slot);
    if (!(slot > 0)) rd.fail(key, "must be positive");
  };
  tol("tol_gs", c.tol.tol_gs);
  tol("tol_eig", c.tol.tol_eig);
  tol("tol_prof", c.tol.tol_prof);
  tol("tol_mod", c.tol.tol_mod);
  tol("tau_cls", c.tol.tau_cls);
  tol("tau_res", c.tol.tau_res);
  tol("tau_fgr", c.tol.tau_fgr);
  tol("tau_edge", c.tol.tau_edge);
  tol("tau_vk", c.tol.tau_vk);
  tol("tau_cont", c.tol.tau_cont);
  tol("tau_kernel", c.tol.tau_kernel);

  if (rd.has("resonance.K_max")) {
    long long k = rd.integer("resonance.K_max");
    if (k < 1) rd.fail("resonance.K_max", "must be >= 1");
    c.K_max = static_cast<int>(k);
  }

  std::set<std::string> want;
  if (rd.has("stages.run")) {
    for (const auto& s : rd.items("stages.run")) {
      if (!dependencies().count(s)) rd.fail("stages.run", "unknown stage '" + s + "'");
      want.insert(s);
    }
  } else {
    want = {"ground", "spectrum", "resonance", "profile", "fgr"};
  }
  std::function<void(const std::string&)> close = [&](const std::string& s) {
    for (const auto& d : dependencies().at(s)) {
      want.insert(d);
      close(d);
    }
  };
  for (auto s : std::set<std::string>(want)) close(s);
  for (const auto& s : stage_names())
    if (want.count(s)) c.stages.push_back(s);

  auto& S = c.sim;
  S.dt = rd.number("simulation.dt", S.dt);
  S.T = rd.number("simulation.T", S.T);
  if (!(S.dt > 0)) rd.fail("simulation.dt", "must be positive");
  if (!(S.T > S.dt)) rd.fail("simulation.T", "must exceed dt");
  S.stride = static_cast<int>(rd.integer("simulation.stride", S.stride));
  if (S.stride < 1) rd.fail("simulation.stride", "must be >= 1");
  S.sponge = rd.boolean("simulation.sponge", S.sponge);
  S.sponge_onset = rd.number("simulation.sponge_onset", S.sponge_onset);
  if (rd.has("simulation.sponge_onset") && !(S.sponge_onset > 0 && S.sponge_onset < c.R))
    rd.fail("simulation.sponge_onset", "must lie in (0, R)");
  S.sponge_strength = rd.number("simulation.sponge_strength", S.sponge_strength);
  if (S.sponge_strength < 0) rd.fail("simulation.sponge_strength", "must be >= 0");
  S.mode = static_cast<int>(rd.integer("simulation.mode", S.mode));
  if (S.mode < 0) rd.fail("simulation.mode", "must be >= 0");
  S.amplitude = rd.number("simulation.amplitude", S.amplitude);
  S.phase = rd.number("simulation.phase", S.phase);
  S.transient = rd.number("simulation.transient", S.transient);
  if (!(S.transient >= 0 && S.transient < 1)) rd.fail("simulation.transient", "must lie in [0, 1)");
  S.windows = static_cast<int>(rd.integer("simulation.windows", S.windows));
  if (S.windows < 2) rd.fail("simulation.windows", "must be >= 2");
  S.comfort = rd.number("simulation.comfort", S.comfort);
  if (!(S.comfort > 0)) rd.fail("simulation.comfort", "must be positive");

  c.output_dir = resolve(base_dir, rd.text("output.dir", "rpl-out")).string();
  if (rd.has("output.cache_dir")) c.cache_dir = resolve(base_dir, rd.raw("output.cache_dir")).string();
  long long seed = rd.integer("run.seed", 0);
  if (seed < 0) rd.fail("run.seed", "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  fs::path base = fs::absolute(fs::path(path)).parent_path();
  return parse_config(ss.str(), base.string());
}

std::string cache_key(const json& inputs) {
  const std::string s = inputs.dump();
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(s.data()), s.size(), md);
  return hex(md, SHA256_DIGEST_LENGTH);
}

std::string dump_json(const json& j) {
  std::string out;
  dump_rec(j, 0, out);
  out += "\n";
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  PipelineResult res;
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  fs::path cache_dir = cfg.cache_dir.empty() ? out / "cache" : fs::path(cfg.cache_dir);
  if (const char* env = std::getenv("RPL_CACHE_DIR"); env && *env) cache_dir = env;
  FieldCache cache(cache_dir);

  const RadialGrid grid(cfg.dimension, cfg.R, cfg.h, cfg.order);
  const Nonlinearity& nl = cfg.nl;
  const double omega = cfg.omega;

  json report;
  report["schema_version"] = kSchemaVersion;
  report["config"] = cfg.canonical();
  report["config_key"] = cache_key(report["config"]);
  json stages = json::object();
  json timings{{"stages", json::object()}};

  std::map<std::string, HypothesisStatus> H;
  for (int i = 1; i <= 7; ++i) H["H" + std::to_string(i)] = skipped("stage not run");

  std::optional<GroundState> gs;
  std::vector<GroundState> sweep_gs;
  std::optional<Operators> op;
  std::optional<SpectrumResult> sp;
  std::optional<ResonanceStructure> rs;
  std::optional<RefinedProfile> rp;
  std::vector<FgrGram> grams;
  std::set<std::string> done;

  std::map<std::string, std::function<void(json&)>> body;

  body["ground"] = [&](json& st) {
    GrowthReport gr = growth_report(nl, default_growth_samples());
    report["growth"] = {{"pass", gr.pass}, {"sup_ratio", gr.sup_ratio}, {"flagged", gr.flagged}};
    if (!gr.pass) st["warning"] = "growth condition not met (advisory)";
    gs = cache.ground_state(nl, omega, grid, cfg.tol.tol_gs);
    sweep_gs = parallel_map<GroundState>(cfg.sweep.size(), [&](size_t i) {
      return cache.ground_state(nl, cfg.sweep[i], grid, cfg.tol.tol_gs);
    });
    report["ground"] = {{"omega", gs->omega},
                        {"phi0", gs->phi[0]},
                        {"mass", gs->mass},
                        {"dmass_domega", gs->dmass},
                        {"residual", gs->residual},
                        {"dphi_residual", gs->dphi_residual},
                        {"newton_iterations", gs->newton_iterations},
                        {"virial_defect", virial_defect(grid, gs->phi)}};
    HypothesisStatus h2;
    h2.evidence["dmass_domega"] = gs->dmass;
    h2.evidence["mass"] = gs->mass;
    bool pass = gs->dmass > cfg.tol.tau_vk;
    if (!cfg.sweep.empty()) {
      std::vector<double> masses;
      for (const auto& g : sweep_gs) masses.push_back(g.mass);
      auto vk = vk_from_masses(cfg.sweep, masses, cfg.tol.tau_vk);
      json rows = json::array();
      double min_slope = INFINITY;
      for (size_t i = 0; i < vk.size(); ++i) {
        rows.push_back({{"omega", vk[i].omega}, {"mass", vk[i].mass}, {"slope", vk[i].slope},
                        {"slope_exact", sweep_gs[i].dmass}});
        min_slope = std::min(min_slope, vk[i].slope);
      }
      report["ground"]["vk_sweep"] = rows;
      h2.evidence["sweep_min_slope"] = min_slope;
    }
    h2.status = pass ? Status::Pass : Status::Fail;
    if (!pass) h2.note = "d||phi||^2/domega <= tau_vk at omega*";
    H["H2"] = h2;
    write_csv(out / "ground.csv", {"r", "phi", "dphi_domega"}, {&grid.r(), &gs->phi, &gs->dphi});
  };

  body["spectrum"] = [&](json& st) {
    op = build_operators(*gs, nl, grid);
    SpectrumOptions so;
    so.tol_eig = cfg.tol.tol_eig;
    so.tau_kernel = cfg.tol.tau_kernel;
    sp = discrete_spectrum(*op, so);
    auto lambdas_at = [&](size_t i) {
      Operators o = build_operators(sweep_gs[i], nl, grid);
      return discrete_spectrum(o, so).report.lambdas;
    };
    std::vector<std::vector<double>> sweep_l = parallel_map<std::vector<double>>(cfg.sweep.size(), lambdas_at);
    check_assumptions(sp->report, cfg.tol, cfg.sweep.empty() ? nullptr : &sweep_l,
                      cfg.sweep.empty() ? nullptr : &cfg.sweep);
    const SpectralReport& r = sp->report;
    report["spectrum"] = {{"morse_index", r.morse_index},
                          {"ker_lplus", r.ker_lplus},
                          {"ker_lminus", r.ker_lminus},
                          {"n_modes", r.n_modes},
                          {"lambda", r.lambdas},
                          {"dist_zero", r.dist_zero},
                          {"dist_edge", r.dist_edge},
                          {"krein_cross", r.max_krein_cross},
                          {"krein_defect", r.max_krein_defect},
                          {"threshold_growth", r.threshold_checked ? json(r.threshold_growth) : json(nullptr)},
                          {"lminus_phi", op->lminus_phi},
                          {"lplus_dphi_plus_phi", op->lplus_dphi},
                          {"sigma1_anticommutator", sigma1_anticommutator(*op)}};
    if (grid.dimension() == 1) report["spectrum"]["lplus_translation"] = op->lplus_translation;
    if (!cfg.sweep.empty()) report["spectrum"]["sweep_lambda"] = sweep_l;
    report["N"] = r.n_modes;
    H["H1"] = r.H1;
    H["H3"] = r.H3;
    H["H4"] = r.H4;
    H["H5"] = r.H5;
    std::vector<std::string> head{"r"};
    std::vector<const Vec*> cols{&grid.r()};
    for (const auto& m : sp->modes) {
      head.push_back("xi" + std::to_string(m.j + 1) + "_plus");
      head.push_back("xi" + std::to_string(m.j + 1) + "_minus");
      cols.push_back(&m.xi_plus);
      cols.push_back(&m.xi_minus);
    }
    write_csv(out / "modes.csv", head, cols);
    (void)st;
  };

  body["resonance"] = [&](json& st) {
    rs = classify(sp->report.lambdas, omega, cfg.tol.tau_cls * omega);
    if (cfg.K_max && rs->K_max > *cfg.K_max)
      throw Error(ErrorKind::KTooLarge, "minimal resonant indices reach degree " + std::to_string(rs->K_max) +
                                            " above the configured K_max = " + std::to_string(*cfg.K_max));
    report["resonance"] = json::parse(rs->to_json());
    json rmin = json::array();
    for (const auto& m : rs->R_min) rmin.push_back({{"m", m.str()}, {"r", lam(rs->lambdas, m)}});
    report["R_min"] = rmin;
    H["H6"] = rs->H6;
    (void)st;
  };

  body["profile"] = [&](json& st) {
    if (sp->report.H1.status != Status::Pass)
      throw Error(ErrorKind::InvalidInput, "refined profile needs H1 to pass");
    if (rs->H6.status == Status::Fail) throw Error(ErrorKind::InvalidInput, "refined profile needs H6 to pass");
    ProfileOptions po;
    po.tol_prof = cfg.tol.tol_prof;
    po.tau_res = cfg.tol.tau_res;
    rp = build_refined_profile(*gs, nl, *op, sp->modes, *rs, po);
    json src = json::array();
    std::vector<std::string> head{"r"};
    std::vector<const Vec*> cols{&grid.r()};
    for (const auto& s : rp->sources) {
      src.push_back({{"m", s.m.str()},
                     {"r", s.r},
                     {"G_norm", grid.norm(s.G)},
                     {"Gbar_norm", grid.norm(s.Gbar)},
                     {"sigma_norm", s.sigma_norm},
                     {"orth_defect", s.orth_defect}});
      head.push_back("G_" + s.m.str());
      head.push_back("Gbar_" + s.m.str());
      cols.push_back(&s.G);
      cols.push_back(&s.Gbar);
    }
    report["G_norms"] = src;
    json man = json::parse(rp->manifest_json());
    man["max_residual"] = rp->max_residual;
    man["max_orth"] = rp->max_orth;
    report["profile"] = man;
    write_csv(out / "profile_sources.csv", head, cols);
    (void)st;
  };

  body["fgr"] = [&](json& st) {
    if (grid.dimension() == 2) {
      st["status"] = "skipped";
      st["reason"] = "outgoing closure available for d = 1 and 3 only";
      HypothesisStatus h;
      h.note = "FGR not evaluated in d = 2";
      H["H7"] = h;
      return;
    }
    FgrOptions fo;
    fo.tau_fgr = cfg.tol.tau_fgr;
    grams.clear();
    for (int k = 0; k < static_cast<int>(rs->groups.size()); ++k) grams.push_back(fgr_gram(*rp, *op, k, fo));
    H["H7"] = check_H7(grams, cfg.tol.tau_fgr);
    json arr = json::array(), mins = json::array();
    std::string csv = "k,r,i,j,gamma,gamma_direct,gamma_farfield\n";
    for (const auto& g : grams) {
      arr.push_back(json::parse(gram_json(g)));
      mins.push_back({{"k", g.k + 1}, {"r", g.r}, {"min_eig", g.min_eig}, {"route_error", g.route_error}});
      for (int i = 0; i < g.gamma.rows(); ++i)
        for (int j = 0; j < g.gamma.cols(); ++j)
          csv += std::to_string(g.k + 1) + "," + num17(g.r) + "," + std::to_string(i) + "," + std::to_string(j) + "," +
                 num17(g.gamma(i, j)) + "," + num17(g.gamma_direct(i, j)) + "," + num17(g.gamma_ff(i, j)) + "\n";
    }
    report["fgr"] = arr;
    report["gamma_min_eigenvalues"] = mins;
    write_text_atomic(out / "fgr.csv", csv);
  };

  body["simulate"] = [&](json& st) {
    SimConfig sc;
    sc.grid = grid;
    sc.nl = nl;
    sc.dt = cfg.sim.dt;
    sc.T = cfg.sim.T;
    sc.stride = cfg.sim.stride;
    sc.sponge.on = cfg.sim.sponge;
    sc.sponge.onset = cfg.sim.sponge_onset;
    sc.sponge.strength = cfg.sim.sponge_strength;
    sc.comfort = cfg.sim.comfort;
    if (rp->rs.N > 0) {
      if (cfg.sim.mode >= rp->rs.N) throw Error(ErrorKind::InvalidInput, "simulation.mode exceeds the mode count");
      sc.init.mode = cfg.sim.mode;
      sc.init.amplitude = cfg.sim.amplitude;
      sc.init.phase = cfg.sim.phase;
    } else {
      st["note"] = "no internal modes: soliton initial data";
    }
    DecomposeOptions dop;
    dop.tol_mod = cfg.tol.tol_mod;
    TimeSeries ts = run(sc, *rp, dop);
    json sim{{"steps", ts.steps},
             {"samples", ts.t.size()},
             {"q0_drift", ts.q0_drift},
             {"e_drift", ts.e_drift},
             {"max_newton", ts.max_newton},
             {"varpi_final", ts.varpi.back()},
             {"theta_final", ts.theta.back()}};
    json z0 = json::array(), zT = json::array();
    for (size_t j = 0; j < ts.z.front().size(); ++j) {
      z0.push_back(std::abs(ts.z.front()[j]));
      zT.push_back(std::abs(ts.z.back()[j]));
    }
    sim["abs_z_initial"] = z0;
    sim["abs_z_final"] = zT;
    if (rp->rs.N > 0 && ts.t.size() >= 8) {
      DecayOptions dopt;
      dopt.transient = cfg.sim.transient;
      dopt.windows = cfg.sim.windows;
      DecayMetrics dm = fgr_decay_report(ts, ts.lambdas, dopt);
      sim["decay"] = {{"envelope", dm.envelope},
                      {"monotonicity_defect", dm.monotonicity_defect},
                      {"envelope_drop", dm.envelope_drop},
                      {"phase_consistency", dm.phase_consistency},
                      {"S_total", dm.S_total},
                      {"S_last_quarter_share", dm.S_last_quarter_share},
                      {"varpi_final_oscillation", dm.varpi_final_oscillation},
                      {"varpi_excursion", dm.varpi_excursion},
                      {"varpi_ratio", dm.varpi_ratio}};
    }
    report["simulation"] = sim;
    write_text_atomic(out / "timeseries.csv", time_series_csv(ts));
  };

  for (const auto& name : cfg.stages) {
    json st;
    std::string missing;
    for (const auto& d : dependencies().at(name))
      if (!done.count(d)) missing = d;
    if (!missing.empty()) {
      st["status"] = "skipped";
      st["reason"] = "prerequisite stage " + missing + " did not complete";
      stages[name] = st;
      continue;
    }
    const auto t0 = clock::now();
    try {
      body[name](st);
      if (!st.contains("status")) st["status"] = "ok";
      if (st["status"] == "ok") done.insert(name);
    } catch (const Error& e) {
      st["status"] = "error";
      st["kind"] = kind_name(e.kind());
      st["message"] = e.what();
      res.exit_code = 1;
    } catch (const std::exception& e) {
      st["status"] = "error";
      st["kind"] = "internal";
      st["message"] = e.what();
      res.exit_code = 1;
    }
    timings["stages"][name] = std::chrono::duration<double>(clock::now() - t0).count();
    stages[name] = st;
  }

  json hyp;
  for (const auto& [k, v] : H) hyp[k] = hypothesis_json(v);
  report["hypotheses"] = hyp;
  report["stages"] = stages;
  report["exit_code"] = res.exit_code;

  res.cache_hits = cache.hits;
  res.cache_misses = cache.misses;
  timings["cache"] = {{"dir", fs::absolute(cache_dir).string()}, {"hits", res.cache_hits}, {"misses", res.cache_misses}};
  timings["total"] = std::chrono::duration<double>(clock::now() - t_start).count();
  res.report = report;
  res.timings = timings;
  write_text_atomic(out / "report.json", dump_json(report));
  write_text_atomic(out / "timings.json", dump_json(timings));
  return res;
}

int run_pipeline(const std::string& config_path) { return run_pipeline(load_config(config_path)).exit_code; }

std::string summarize_report(const std::string& dir) {
  fs::path p = fs::path(dir) / "report.json";
  std::ifstream is(p);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + p.string());
  json r = json::parse(is);
  std::ostringstream os;
  os << "report " << p.string() << " (schema " << r.value("schema_version", 0) << ")\n";
  if (r.contains("stages"))
    for (const auto& name : stage_names()) {
      if (!r["stages"].contains(name)) continue;
      const json& st = r["stages"][name];
      os << "  stage " << name << ": " << st.value("status", "?");
      if (st.contains("message")) os << "  (" << st["message"].get<std::string>() << ")";
      if (st.contains("reason")) os << "  (" << st["reason"].get<std::string>() << ")";
      os << "\n";
    }
  if (r.contains("N")) os << "  N = " << r["N"] << "\n";
  if (r.contains("R_min"))
    for (const auto& m : r["R_min"]) os << "  R_min " << m["m"].get<std::string>() << "  r = " << num17(m["r"]) << "\n";
  if (r.contains("gamma_min_eigenvalues"))
    for (const auto& g : r["gamma_min_eigenvalues"])
      os << "  Gamma_" << g["k"] << " min eigenvalue " << num17(g["min_eig"]) << ", route error "
         << num17(g["route_error"]) << "\n";
  if (r.contains("hypotheses"))
    for (auto it = r["hypotheses"].begin(); it != r["hypotheses"].end(); ++it) {
      os << "  " << it.key() << ": " << it.value()["status"].get<std::string>();
      if (it.value().contains("note")) os << "  (" << it.value()["note"].get<std::string>() << ")";
      os << "\n";
    }
  return os.str();
}

int clean_cache(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir);
  static const std::regex entry("[0-9a-f]{64}\\.(bin|json)");
  int removed = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, entry) || name.find(".tmp.") != std::string::npos) {
      fs::remove(e.path());
      ++removed;
    }
  }
  return removed;
}

}  // namespace rpl
