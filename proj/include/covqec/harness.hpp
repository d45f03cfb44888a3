#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "covqec/bound.hpp"
#include "covqec/codes.hpp"
#include "covqec/qec.hpp"

namespace covqec {

using Json = nlohmann::ordered_json;

// exit codes of the command line front end
inline constexpr int EXIT_OK = 0;
inline constexpr int EXIT_CONFIG = 2;
inline constexpr int EXIT_CERTIFICATION = 3;
inline constexpr int EXIT_BOUND = 4;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& msg) : std::runtime_error(where + ": " + msg) {}
};

// flat `key = value` file; `#` starts a comment; keys may repeat only once
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& def) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double def) const;
  int integer(const std::string& key) const;
  int integer(const std::string& key, int def) const;
  bool flag(const std::string& key, bool def) const;
  // comma or whitespace separated
  std::vector<double> list(const std::string& key) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& def) const;
  // relative paths resolve against the config file's directory
  std::string path(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = {value, 0}; }
  const std::string& source() const { return source_; }

 private:
  std::string where(const std::string& key) const;
  std::map<std::string, std::pair<std::string, int>> values_;  // value, line
  std::string source_, dir_;
};

// COVQEC_SEED, default 0
std::uint64_t seed_from_env();

// "dims <in> <out>" then Kraus blocks of `out` rows, each row `in` entries written re,im
Channel read_kraus_file(const std::string& path);

U1Code code_from_config(const Config& cfg);
NoiseModel noise_from_config(const Config& cfg, const U1Code& code);

using Cell = std::variant<long long, double, std::string, bool>;
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};
std::string format_double(double v);  // 17 significant digits
std::string to_csv(const Table& t);
Json to_json(const Table& t);

// runs f(0..count-1) on up to `jobs` threads; results come back in index order
template <class F>
auto parallel_map(int count, int jobs, F f) -> std::vector<decltype(f(0))> {
  using R = decltype(f(0));
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errs(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min(jobs, count));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

struct RunOptions {
  std::string format = "csv";
  int jobs = 1;
  std::uint64_t seed = 0;
};

struct CommandResult {
  int exit_code = EXIT_OK;
  std::string output;
  std::vector<std::pair<std::string, std::string>> sidecars;  // suffix, content
  std::vector<std::string> messages;                          // diagnostics for stderr
};

// full measurement report of one code/noise pair
Json measure_report(const U1Code& code, const NoiseModel& noise, const Config& cfg, const RunOptions& opt,
                    int* exit_code);

CommandResult cmd_measure(const Config& cfg, const RunOptions& opt);
CommandResult cmd_fig3(const Config& cfg, const RunOptions& opt);
CommandResult cmd_saturation(const Config& cfg, const RunOptions& opt);
CommandResult cmd_transversal(const Config& cfg, const RunOptions& opt);
CommandResult cmd_verify(const Config& cfg, const RunOptions& opt);

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct Fig3Row {
  int n = 0, m = 2;
  double q = 0, delta_group = 0, delta_point = 0, delta_charge = 0, epsilon_tilde = 0;
};
std::vector<Fig3Row> fig3_rows(int m, const std::vector<int>& ns, const std::vector<double>& qs);
struct Fig3Slopes {
  double q = 0, delta_group = 0, delta_point = 0, delta_charge = 0, epsilon_tilde = 0;
};
std::vector<Fig3Slopes> fig3_slopes(const std::vector<Fig3Row>& rows);

// inputs for evaluate_bounds from closed forms (frak quantities from the erasure structure bounds)
BoundInputs thermo_closed_form_inputs(const ThermoParams& p);
BoundInputs rm_closed_form_inputs(const RmParams& p);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};
std::vector<CriterionResult> run_acceptance(int jobs, std::uint64_t seed = 0);
std::string format_criterion(const CriterionResult& r);

}  // namespace covqec
