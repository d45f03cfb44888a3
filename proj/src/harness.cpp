#include "covqec/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "covqec/codes.hpp"
#include "covqec/spectral.hpp"

namespace covqec {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where, "expected a number, got '" + s + "'");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------- config

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where, "empty key");
    for (char ch : key)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_'))
        throw ConfigError(where, "invalid character in key '" + key + "'");
    if (value.empty()) throw ConfigError(where, "empty value for '" + key + "'");
    if (c.values_.count(key))
      throw ConfigError(where, "duplicate key '" + key + "' (first on line " + std::to_string(c.values_[key].second) + ")");
    c.values_[key] = {value, lineno};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, "cannot open config file");
  std::stringstream ss;
  ss << f.rdbuf();
  Config c = parse(ss.str(), path);
  c.dir_ = std::filesystem::path(path).parent_path().string();
  return c;
}

std::string Config::where(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.second == 0) return source_ + ": " + key;
  return source_ + ":" + std::to_string(it->second.second) + ": " + key;
}

std::string Config::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(source_, "missing key '" + key + "'");
  return it->second.first;
}
std::string Config::str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }
double Config::num(const std::string& key) const { return parse_double(str(key), where(key)); }
double Config::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }
int Config::integer(const std::string& key) const {
  double v = num(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(where(key), "expected an integer");
  return static_cast<int>(v);
}
int Config::integer(const std::string& key, int def) const { return has(key) ? integer(key) : def; }
bool Config::flag(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where(key), "expected true or false");
}
std::vector<double> Config::list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& t : split_list(str(key))) out.push_back(parse_double(t, where(key)));
  if (out.empty()) throw ConfigError(where(key), "empty list");
  return out;
}
std::vector<double> Config::list(const std::string& key, const std::vector<double>& def) const {
  return has(key) ? list(key) : def;
}
std::string Config::path(const std::string& key) const {
  std::filesystem::path p(str(key));
  if (p.is_relative() && !dir_.empty()) p = std::filesystem::path(dir_) / p;
  return p.string();
}

std::uint64_t seed_from_env() {
  const char* s = std::getenv("COVQEC_SEED");
  if (!s || !*s) return 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (*end) throw ConfigError("COVQEC_SEED", "expected a non-negative integer");
  return v;
}

// ---------------------------------------------------------------- inputs

Channel read_kraus_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, "cannot open Kraus file");
  std::string line;
  int lineno = 0, din = -1, dout = -1;
  std::vector<Mat> ks;
  std::vector<std::vector<cx>> rows;
  auto flush = [&](int at) {
    if (rows.empty()) return;
    if (static_cast<int>(rows.size()) != dout)
      throw ConfigError(path + ":" + std::to_string(at), "Kraus block has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(dout));
    Mat K(dout, din);
    for (int r = 0; r < dout; ++r)
      for (int c = 0; c < din; ++c) K(r, c) = rows[r][c];
    ks.push_back(K);
    rows.clear();
  };
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (line.empty()) {
      flush(lineno);
      continue;
    }
    if (din < 0) {
      std::istringstream hs(line);
      std::string word;
      hs >> word >> din >> dout;
      if (word != "dims" || hs.fail() || din < 1 || dout < 1) throw ConfigError(where, "expected header 'dims <in> <out>'");
      continue;
    }
    std::istringstream ls(line);
    std::string tok;
    std::vector<cx> row;
    while (ls >> tok) {
      const auto comma = tok.find(',');
      if (comma == std::string::npos) throw ConfigError(where, "entry '" + tok + "' is not re,im");
      row.push_back(cx(parse_double(tok.substr(0, comma), where), parse_double(tok.substr(comma + 1), where)));
    }
    if (static_cast<int>(row.size()) != din)
      throw ConfigError(where, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(din));
    rows.push_back(row);
    if (static_cast<int>(rows.size()) == dout) flush(lineno);
  }
  flush(lineno);
  if (din < 0) throw ConfigError(path, "missing 'dims' header");
  if (ks.empty()) throw ConfigError(path, "no Kraus operators");
  try {
    return Channel(ks);
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
}

namespace {

U1Rep charges_from(const Config& cfg, const std::string& key, int dim) {
  std::vector<double> h = cfg.list(key);
  if (static_cast<int>(h.size()) != dim)
    throw ConfigError(cfg.source(), key + " has " + std::to_string(h.size()) + " entries, expected " + std::to_string(dim));
  RVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = h[i];
  return U1Rep::diagonal(v);
}

}  // namespace

U1Code code_from_config(const Config& cfg) {
  const std::string kind = cfg.str("code.kind");
  try {
    if (kind == "thermo") return thermo_code({cfg.integer("code.n"), cfg.integer("code.m", 2), cfg.num("code.q")});
    if (kind == "rm") return rm_code({cfg.integer("code.t", 3)});
    if (kind == "custom") {
      Channel enc = read_kraus_file(cfg.path("code.file"));
      return make_code(cfg.str("code.name", "custom"), enc, charges_from(cfg, "code.logical_charges", enc.dim_in()),
                       charges_from(cfg, "code.physical_charges", enc.dim_out()));
    }
  } catch (const InputError& e) {
    throw ConfigError(cfg.source(), std::string("code: ") + e.what());
  }
  throw ConfigError(cfg.source(), "unknown code.kind '" + kind + "' (thermo, rm, custom)");
}

NoiseModel noise_from_config(const Config& cfg, const U1Code& code) {
  const std::string kind = cfg.str("noise.kind");
  const int D = code.dim_physical();
  int sites = 0;
  while ((1 << sites) < D) ++sites;
  try {
    if (kind == "erasure") {
      if ((1 << sites) != D) throw ConfigError(cfg.source(), "erasure noise needs a qubit code");
      return NoiseModel::erasure_mixture(sites);
    }
    if (kind == "dephasing") {
      if ((1 << sites) != D) throw ConfigError(cfg.source(), "dephasing noise needs a qubit code");
      return NoiseModel::dephasing_mixture(sites, cfg.num("noise.p"));
    }
    if (kind == "identity") return NoiseModel::identity(D);
    if (kind == "custom") {
      Channel ch = read_kraus_file(cfg.path("noise.file"));
      if (ch.dim_in() != D) throw ConfigError(cfg.source(), "noise.file input dimension does not match the code");
      return NoiseModel::from_channel(ch);
    }
  } catch (const InputError& e) {
    throw ConfigError(cfg.source(), std::string("noise: ") + e.what());
  }
  throw ConfigError(cfg.source(), "unknown noise.kind '" + kind + "' (erasure, dephasing, identity, custom)");
}

// ---------------------------------------------------------------- output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (auto p = std::get_if<long long>(&c)) return std::to_string(*p);
  if (auto p = std::get_if<double>(&c)) return format_double(*p);
  if (auto p = std::get_if<bool>(&c)) return *p ? "true" : "false";
  return std::get<std::string>(c);
}

Json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

Json cell_json(const Cell& c) {
  if (auto p = std::get_if<long long>(&c)) return *p;
  if (auto p = std::get_if<double>(&c)) return jnum(*p);
  if (auto p = std::get_if<bool>(&c)) return *p;
  return std::get<std::string>(c);
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
    out += "\r\n";
  }
  return out;
}

Json to_json(const Table& t) {
  Json arr = Json::array();
  for (const auto& row : t.rows) {
    Json o = Json::object();
    for (size_t i = 0; i < row.size(); ++i) o[t.columns[i]] = cell_json(row[i]);
    arr.push_back(o);
  }
  return arr;
}

namespace {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void flatten(const Json& j, const std::string& prefix, Table& t) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), t);
  } else if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), t);
  } else if (j.is_number_float()) {
    t.rows.push_back({prefix, format_double(j.get<double>())});
  } else if (j.is_string()) {
    t.rows.push_back({prefix, j.get<std::string>()});
  } else {
    t.rows.push_back({prefix, j.dump()});
  }
}

Table flatten(const Json& j) {
  Table t;
  t.columns = {"key", "value"};
  flatten(j, "", t);
  return t;
}

}  // namespace

// ---------------------------------------------------------------- measure

namespace {

double logical_variance(const U1Rep& rep) {
  const RVec& h = rep.eigenvalues();
  const double mean = h.mean();
  return (h.array() - mean).square().mean();
}

bool noise_commutes_known(const NoiseModel& noise) {
  return noise.kind() == "erasure" || noise.kind() == "dephasing" || noise.kind() == "identity";
}

Json bracket_json(const EpsilonBracket& b) {
  Json j;
  j["lower"] = jnum(b.lower);
  j["upper"] = jnum(b.upper);
  j["lower_method"] = b.lower_method;
  j["upper_method"] = b.upper_method;
  j["upper_certification"] = to_string(b.upper_cert);
  return j;
}

Json scan_json(const ScanResult& s) {
  Json j;
  j["value"] = jnum(s.value);
  j["theta"] = jnum(s.theta);
  j["certification"] = to_string(s.certified);
  j["ok"] = s.ok;
  return j;
}

}  // namespace

Json measure_report(const U1Code& code, const NoiseModel& noise, const Config& cfg, const RunOptions& opt,
                    int* exit_code) {
  const bool timings = cfg.flag("report.timings", false);
  const bool with_diamond = cfg.flag("measure.diamond", true);
  Json stages = Json::object();
  bool cert_ok = true;
  auto t0 = std::chrono::steady_clock::now();
  auto stage = [&](const char* name) {
    stages[name] = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
  };
  Json r;
  r["code"] = {{"name", code.name},
               {"dim_logical", code.dim_logical()},
               {"dim_physical", code.dim_physical()},
               {"isometric", code.isometric()},
               {"range_HL", code.logical.range()},
               {"range_HS", code.physical.range()},
               {"period", code.tau}};
  r["noise"] = {{"kind", noise.kind()}, {"sites", noise.sites()}, {"kraus", noise.size()}, {"sectors", noise.num_sectors()}};
  r["seed"] = opt.seed;

  // symmetry
  SymmetryReport s = symmetry_report(code, with_diamond);
  {
    Json j;
    j["delta_group"] = scan_json(s.delta_group);
    j["delta_group_choi"] = scan_json(s.delta_group_choi);
    if (with_diamond) j["delta_group_diamond"] = scan_json(s.delta_group_diamond);
    j["delta_point"] = jnum(s.delta_point);
    j["delta_charge"] = jnum(s.delta_charge);
    j["chi"] = jnum(s.chi);
    j["frak_b"] = jnum(s.frak_b);
    j["frak_b_certification"] = to_string(s.frak_b_cert);
    r["symmetry"] = j;
    cert_ok = cert_ok && s.delta_group.ok && s.delta_group_choi.ok && (!with_diamond || s.delta_group_diamond.ok);
  }
  stage("symmetry");

  // error correction
  EpsilonChoiResult ec = epsilon_choi(code, noise);
  EpsilonBracket eb = epsilon_bracket(code, noise);
  EpsilonBracket ed = epsilon_diamond_bracket(code, noise, eb);
  r["epsilon_choi"] = {{"value", jnum(ec.value)}, {"certified_lower", jnum(ec.certified_lower)}, {"method", ec.method}, {"ok", ec.ok}};
  r["epsilon"] = bracket_json(eb);
  r["epsilon_diamond"] = bracket_json(ed);
  cert_ok = cert_ok && ec.ok;
  if (code.isometric()) {
    KlDeviation kl = kl_deviation(code, noise);
    r["knill_laflamme"] = {{"max_violation", jnum(kl.max_violation)}, {"residual", jnum(kl.residual)}};
  }
  stage("epsilon");

  // HKS quantities
  const Mat HS = code.physical.dense();
  NoiseStructureBounds ns = noise_structure_bounds(noise);
  double fj = NAN, ff = NAN;
  bool frak_exact = false, hks = ns.available;
  std::string frak_source = ns.available ? "noise structure (" + ns.note + ")" : "unavailable";
  {
    const int D = noise.dim_in();
    int total_out = 0;
    for (int k = 0; k < noise.num_sectors(); ++k) total_out += noise.sector_dim(k);
    if (D <= 16 && D + noise.size() * total_out <= 160) {
      Channel dense = noise.dense();
      HksResult j = frak_j(dense.kraus(), HS);
      if (j.feasible) {
        HksResult f = frak_f(dense.kraus(), HS);
        fj = j.value;
        ff = f.value;
        frak_exact = true;
        hks = true;
        frak_source = "global programs";
        cert_ok = cert_ok && j.ok && f.ok;
      } else {
        hks = false;
        frak_source = "HKS violated";
      }
    } else if (ns.available) {
      fj = ns.frak_j;
      ff = ns.frak_f;
    }
  }
  double rld = NAN;
  const bool commutes = noise_commutes_known(noise);
  std::string rld_note = commutes ? "" : "noise commutation not established";
  if (commutes) {
    int total_out = 0;
    for (int k = 0; k < noise.num_sectors(); ++k) total_out += noise.sector_dim(k);
    if (noise.dim_in() <= 256 && static_cast<long>(total_out) * noise.dim_in() <= (1L << 20))
      rld = rld_channel_qfi(noise.dense().kraus(), HS);
    else
      rld_note = "noise too large for the dense RLD computation";
  }
  r["hks"] = {{"holds", hks}, {"source", frak_source}, {"frak_j", jnum(fj)}, {"frak_f", jnum(ff)}, {"rld_qfi", jnum(rld)}};
  if (!rld_note.empty()) r["hks"]["rld_note"] = rld_note;
  if (ns.available) {
    r["hks"]["structure_frak_j"] = jnum(ns.frak_j);
    r["hks"]["structure_frak_f"] = jnum(ns.frak_f);
    if (ns.sqrt_f_plus_b > 0) r["hks"]["structure_sqrt_f_plus_b"] = jnum(ns.sqrt_f_plus_b);
  }
  stage("hks");

  // refinement quantity and protocol at the witness recovery
  double dps = NAN;
  if (code.isometric() && !eb.recovery_witness.blocks.empty()) dps = delta_point_star(code, noise, eb.recovery_witness);
  r["delta_point_star"] = jnum(dps);
  Json checks = Json::object();
  bool checks_ok = true;
  auto check = [&](const std::string& name, double lhs, double rhs) {
    const bool ok = lhs >= rhs - BOUND_TOL;
    checks[name] = {{"lhs", jnum(lhs)}, {"rhs", jnum(rhs)}, {"ok", ok}};
    checks_ok = checks_ok && ok;
  };
  if (code.dim_logical() >= 2 && !eb.recovery_witness.blocks.empty()) {
    TwoLevelProtocol p = two_level_protocol(code, noise, eb.recovery_witness);
    const double e = eb.upper;
    r["protocol"] = {{"abs_xi0", std::abs(p.xi0)}, {"abs_dxi0", std::abs(p.dxi0)}, {"dxi_error", p.dxi_error}, {"qfi_at_zero", p.qfi_at_zero}};
    if (eb.upper_cert == Certification::exact) {
      check("xi_vs_epsilon", std::abs(p.xi0), 1 - 2 * e * e);
      check("dxi_vs_chi", std::abs(p.dxi0), std::abs(s.chi) - 2 * e * s.frak_b);
    }
    if (!std::isnan(ff)) check("protocol_qfi_vs_frak_f", ff, p.qfi_at_zero);
  }
  stage("protocol");

  GateErrorBracket g = gate_error_bracket(code, noise, eb, s.delta_group.value, hks ? ff : NAN);
  r["gate_error"] = {{"lower", jnum(g.lower)}, {"upper", jnum(g.upper)}, {"upper_method", g.upper_method}, {"hks", g.hks}};
  stage("gate");

  // consistency before emission
  check("choi_vs_worst_case", eb.upper, ec.value);
  check("bracket_order", eb.upper, eb.lower);
  check("diamond_vs_purified_squared", ed.upper, eb.lower * eb.lower);
  r["checks"] = checks;

  BoundInputs in;
  in.range_HL = code.logical.range();
  in.range_HS = code.physical.range();
  in.variance_HL = logical_variance(code.logical);
  in.isometric = code.isometric();
  in.hks = hks;
  in.noise_commutes = commutes;
  in.eps_lower = eb.lower;
  in.eps_upper = eb.upper;
  in.eps_choi_lower = ec.certified_lower;
  in.delta_group = s.delta_group.value;
  in.delta_group_choi = s.delta_group_choi.value;
  if (with_diamond) in.delta_group_diamond = s.delta_group_diamond.value;
  in.delta_point = s.delta_point;
  in.delta_charge = s.delta_charge;
  in.chi = s.chi;
  in.dual_range = spectral_range(dual_charge(code));
  in.frak_b = s.frak_b;
  in.frak_j = fj;
  in.frak_f = ff;
  in.frak_exact = frak_exact;
  in.rld = rld;
  in.delta_point_star = dps;
  in.eps_star = eb.witness_lower;
  Json bounds = Json::array();
  bool bounds_ok = true;
  for (const auto& e : evaluate_bounds(in)) {
    Json b = {{"name", e.name}, {"applicable", e.applicable}};
    if (e.applicable) {
      b["lhs"] = jnum(e.lhs);
      b["rhs"] = jnum(e.rhs);
      b["slack"] = jnum(e.slack);
      b["satisfied"] = e.satisfied;
    }
    if (!e.note.empty()) b["note"] = e.note;
    bounds.push_back(b);
    bounds_ok = bounds_ok && e.satisfied;
  }
  r["bounds"] = bounds;
  stage("bounds");
  if (timings) r["timings"] = stages;
  int code_out = EXIT_OK;
  if (!cert_ok) code_out = EXIT_CERTIFICATION;
  if (!bounds_ok || !checks_ok) code_out = EXIT_BOUND;
  r["status"] = code_out == EXIT_OK ? "ok" : (code_out == EXIT_BOUND ? "bound violated" : "certification failure");
  if (exit_code) *exit_code = code_out;
  return r;
}

CommandResult cmd_measure(const Config& cfg, const RunOptions& opt) {
  U1Code code = code_from_config(cfg);
  NoiseModel noise = noise_from_config(cfg, code);
  CommandResult out;
  Json r = measure_report(code, noise, cfg, opt, &out.exit_code);
  out.output = opt.format == "csv" ? to_csv(flatten(r)) : dump(r);
  if (out.exit_code == EXIT_BOUND) out.messages.push_back("bound or consistency check violated:\n" + dump(r));
  if (out.exit_code == EXIT_CERTIFICATION) out.messages.push_back("a numerical certificate failed");
  return out;
}

// ---------------------------------------------------------------- fig3

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) throw InputError("loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InputError("loglog_slope: non-positive data");
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<Fig3Row> fig3_rows(int m, const std::vector<int>& ns, const std::vector<double>& qs) {
  std::vector<Fig3Row> rows;
  for (double q : qs)
    for (int n : ns) {
      ClosedFormRecord cf = thermo_closed_forms({n, m, q});
      rows.push_back({n, m, q, cf.delta_group, cf.delta_point, cf.delta_charge, cf.epsilon_tilde});
    }
  return rows;
}

std::vector<Fig3Slopes> fig3_slopes(const std::vector<Fig3Row>& rows) {
  std::vector<Fig3Slopes> out;
  std::vector<double> qs;
  for (const auto& r : rows)
    if (std::find(qs.begin(), qs.end(), r.q) == qs.end()) qs.push_back(r.q);
  for (double q : qs) {
    std::vector<double> n, g, p, c, e;
    for (const auto& r : rows)
      if (r.q == q) {
        n.push_back(r.n);
        g.push_back(r.delta_group);
        p.push_back(r.delta_point);
        c.push_back(r.delta_charge);
        e.push_back(r.epsilon_tilde);
      }
    out.push_back({q, loglog_slope(n, g), loglog_slope(n, p), loglog_slope(n, c), loglog_slope(n, e)});
  }
  return out;
}

namespace {

std::vector<int> doubling(int lo, int hi, const std::string& source) {
  if (lo < 4 || hi < lo) throw ConfigError(source, "grid.n_min/grid.n_max out of range");
  std::vector<int> out;
  for (int n = lo; n <= hi; n *= 2) out.push_back(n);
  return out;
}

const std::vector<double> kFig3Q = {1e-5, 0.25, 0.5, 0.75, 1 - 1e-5};

}  // namespace

CommandResult cmd_fig3(const Config& cfg, const RunOptions& opt) {
  const int m = cfg.integer("code.m", 2);
  std::vector<int> ns = doubling(cfg.integer("grid.n_min", 64), cfg.integer("grid.n_max", 1024), cfg.source());
  std::vector<double> qs = cfg.list("grid.q", kFig3Q);
  std::vector<Fig3Row> rows;
  try {
    rows = fig3_rows(m, ns, qs);
  } catch (const InputError& e) {
    throw ConfigError(cfg.source(), e.what());
  }
  Table t;
  t.columns = {"n", "m", "q", "delta_group", "delta_point", "delta_charge", "epsilon_tilde"};
  for (const auto& r : rows) t.rows.push_back({(long long)r.n, (long long)r.m, r.q, r.delta_group, r.delta_point, r.delta_charge, r.epsilon_tilde});
  Json sl = Json::array();
  for (const auto& s : fig3_slopes(rows))
    sl.push_back({{"q", s.q}, {"delta_group", s.delta_group}, {"delta_point", s.delta_point}, {"delta_charge", s.delta_charge}, {"epsilon_tilde", s.epsilon_tilde}});
  Json side = {{"fit", "least squares of log value against log n"}, {"slopes", sl}};
  CommandResult out;
  if (opt.format == "json") {
    out.output = dump(Json{{"rows", to_json(t)}, {"summary", side}});
  } else {
    out.output = to_csv(t);
    out.sidecars.push_back({".slopes.json", dump(side)});
  }
  return out;
}

// ---------------------------------------------------------------- saturation

BoundInputs thermo_closed_form_inputs(const ThermoParams& p) {
  ClosedFormRecord cf = thermo_closed_forms(p);
  BoundInputs in;
  in.range_HL = cf.range_HL;
  in.range_HS = cf.range_HS;
  in.variance_HL = cf.range_HL * cf.range_HL / 4;
  in.eps_lower = cf.epsilon_lower;
  in.eps_upper = cf.epsilon_tilde;
  in.delta_group = cf.delta_group;
  in.delta_point = cf.delta_point;
  in.delta_charge = cf.delta_charge;
  in.chi = cf.chi;
  in.dual_range = 2 * std::abs(cf.dual_HS_coeff);
  in.frak_b = cf.frak_b;
  // single-erasure mixture with unit site charges
  in.frak_j = p.n;
  in.frak_f = static_cast<double>(p.n) * p.n;
  return in;
}

BoundInputs rm_closed_form_inputs(const RmParams& p) {
  ClosedFormRecord cf = rm_closed_forms(p);
  BoundInputs in;
  const int n = p.n();
  in.range_HL = cf.range_HL;
  in.range_HS = cf.range_HS;
  in.variance_HL = cf.range_HL * cf.range_HL / 4;
  in.eps_lower = 0.0;
  in.eps_upper = 0.0;
  in.delta_group = cf.delta_group;
  in.delta_point = cf.delta_point;
  in.delta_charge = cf.delta_charge;
  in.chi = cf.chi;
  in.dual_range = 2 * std::abs(cf.dual_HS_coeff);
  in.frak_b = cf.frak_b;
  in.frak_j = n;
  in.frak_f = static_cast<double>(n) * n;
  return in;
}

namespace {

struct SatRow {
  std::string family;
  int n = 0;
  double q = NAN;
  double dg = 0, gb = 0, dc = 0, cb = 0;
};

SatRow thermo_saturation(int n, int m, double q) {
  ClosedFormRecord cf = thermo_closed_forms({n, m, q});
  const double G = cf.range_HL - 2 * cf.epsilon_lower * n;
  return {"thermo", n, q, cf.delta_group, global_bound_g(G, cf.range_HS), cf.delta_charge, G};
}

SatRow rm_saturation(int t) {
  RmParams p{t};
  ClosedFormRecord cf = rm_closed_forms(p);
  return {"rm", p.n(), NAN, cf.delta_group, global_bound_g(cf.range_HL, cf.range_HS), cf.delta_charge, cf.range_HL};
}

}  // namespace

CommandResult cmd_saturation(const Config& cfg, const RunOptions& opt) {
  const int m = cfg.integer("code.m", 2);
  std::vector<int> ns = doubling(cfg.integer("grid.n_min", 64), cfg.integer("grid.n_max", 1024), cfg.source());
  std::vector<double> qs = cfg.list("grid.q", {0.5});
  std::vector<double> ts = cfg.list("grid.rm_t", {3, 4});
  std::vector<SatRow> rows;
  try {
    for (double q : qs)
      for (int n : ns) rows.push_back(thermo_saturation(n, m, q));
    for (double t : ts) {
      RmParams{static_cast<int>(t)}.validate();
      rows.push_back(rm_saturation(static_cast<int>(t)));
    }
  } catch (const InputError& e) {
    throw ConfigError(cfg.source(), e.what());
  }
  Table tab;
  tab.columns = {"family", "n", "q", "delta_group", "group_bound", "group_ratio", "delta_charge", "charge_bound", "charge_ratio"};
  for (const auto& r : rows)
    tab.rows.push_back({r.family, (long long)r.n, std::isnan(r.q) ? Cell(std::string()) : Cell(r.q), r.dg, r.gb, r.dg / r.gb, r.dc, r.cb, r.dc / r.cb});
  // ratio(n) = a + b / n fitted per q on the thermodynamic rows
  Json fits = Json::array();
  for (double q : qs) {
    double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0, ty = 0, txy = 0;
    for (const auto& r : rows)
      if (r.family == "thermo" && r.q == q) {
        const double x = 1.0 / r.n, y = r.dg / r.gb, z = r.dc / r.cb;
        s1 += 1;
        sx += x;
        sxx += x * x;
        sy += y;
        sxy += x * y;
        ty += z;
        txy += x * z;
      }
    const double det = s1 * sxx - sx * sx;
    fits.push_back({{"q", q},
                    {"group_ratio_asymptote", (sxx * sy - sx * sxy) / det},
                    {"charge_ratio_asymptote", (sxx * ty - sx * txy) / det}});
  }
  Json side = {{"fit", "ratio = a + b/n, least squares; a reported"}, {"asymptotes", fits}};
  CommandResult out;
  if (opt.format == "json") {
    out.output = dump(Json{{"rows", to_json(tab)}, {"summary", side}});
  } else {
    out.output = to_csv(tab);
    out.sidecars.push_back({".fit.json", dump(side)});
  }
  return out;
}

// ---------------------------------------------------------------- transversal

CommandResult cmd_transversal(const Config& cfg, const RunOptions& opt) {
  std::vector<double> tls = cfg.list("transversal.delta_TL", {1.0});
  std::vector<double> ns = cfg.list("transversal.n", {7, 15, 31, 63, 127});
  const double site = cfg.num("transversal.site_charge", 1.0);
  std::vector<double> ts = cfg.list("transversal.rm_t", {3, 4});
  Table tab;
  tab.columns = {"family", "n", "delta_TL", "site_charge", "cap", "power_of_two_cap", "level_cap", "actual_D", "consistent"};
  try {
    for (double tl : tls)
      for (double nd : ns) {
        const int n = static_cast<int>(nd);
        if (n < 1 || n != nd) throw ConfigError(cfg.source(), "transversal.n must hold positive integers");
        const double cap = transversal_gate_bound(tl, std::vector<double>(n, site));
        const int level = clifford_level_cap(cap);
        tab.rows.push_back({std::string("grid"), (long long)n, tl, site, cap, (long long)(1LL << level), (long long)level, std::string(), std::string()});
      }
    for (double td : ts) {
      RmParams p{static_cast<int>(td)};
      p.validate();
      const double cap = transversal_gate_bound(1.0, std::vector<double>(p.n(), 1.0));
      const int level = clifford_level_cap(cap);
      const long long D = 1LL << (p.t - 1);
      tab.rows.push_back({std::string("rm"), (long long)p.n(), 1.0, 1.0, cap, (long long)(1LL << level), (long long)level, D, D <= cap});
    }
  } catch (const InputError& e) {
    throw ConfigError(cfg.source(), e.what());
  }
  CommandResult out;
  out.output = opt.format == "json" ? dump(to_json(tab)) : to_csv(tab);
  for (const auto& row : tab.rows)
    if (auto b = std::get_if<bool>(&row.back()); b && !*b) out.exit_code = EXIT_BOUND;
  return out;
}

// ---------------------------------------------------------------- verify

CommandResult cmd_verify(const Config& cfg, const RunOptions& opt) {
  (void)cfg;
  std::vector<CriterionResult> res = run_acceptance(opt.jobs, opt.seed);
  CommandResult out;
  bool all = true;
  if (opt.format == "json") {
    Json arr = Json::array();
    for (const auto& r : res) arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    out.output = dump(arr);
  } else {
    for (const auto& r : res) out.output += format_criterion(r) + "\n";
  }
  for (const auto& r : res) all = all && r.pass;
  if (!all) out.exit_code = EXIT_BOUND;
  return out;
}

}  // namespace covqec
