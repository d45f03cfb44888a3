#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "covqec/codes.hpp"
#include "covqec/harness.hpp"
#include "covqec/spectral.hpp"

namespace covqec {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Mat half_z() {
  Mat Z = Mat::Zero(2, 2);
  Z(0, 0) = 0.5;
  Z(1, 1) = -0.5;
  return Z;
}

Mat gaussian(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g;
  Mat A(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) A(i, j) = cx(g(rng), g(rng));
  return A;
}

Mat haar_isometry(std::mt19937_64& rng, int rows, int cols) {
  Eigen::HouseholderQR<Mat> qr(gaussian(rng, rows, rows));
  Mat Q = qr.householderQ() * Mat::Identity(rows, rows);
  return Q.leftCols(cols);
}

Channel random_channel(std::mt19937_64& rng, int din, int dout, int r) {
  Mat V = haar_isometry(rng, dout * r, din);
  std::vector<Mat> ks;
  for (int i = 0; i < r; ++i) ks.push_back(V.middleRows(i * dout, dout));
  return Channel(ks);
}

Mat random_state(std::mt19937_64& rng, int d) {
  Mat G = gaussian(rng, d, d);
  Mat rho = G * G.adjoint();
  return rho / rho.trace().real();
}

U1Code random_code(std::mt19937_64& rng, int dL, int dS) {
  std::uniform_int_distribution<int> charge(-2, 2);
  RVec hl(dL), hs(dS);
  do {
    for (int i = 0; i < dL; ++i) hl(i) = charge(rng);
  } while (hl.maxCoeff() == hl.minCoeff());
  do {
    for (int i = 0; i < dS; ++i) hs(i) = 0.5 * charge(rng);
  } while (hs.maxCoeff() == hs.minCoeff());
  return make_code("random", Channel({haar_isometry(rng, dS, dL)}), U1Rep::diagonal(hl), U1Rep::diagonal(hs));
}

// counts checks; remembers the first failure for the report line
struct Tally {
  int checks = 0, failures = 0;
  std::string first_failure;
  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      if (failures == 0) first_failure = what;
      ++failures;
    }
  }
  bool pass() const { return failures == 0 && checks > 0; }
  std::string detail(const std::string& summary) const {
    std::string s = summary + "; " + std::to_string(checks - failures) + "/" + std::to_string(checks) + " checks";
    if (failures) s += "; first failure: " + first_failure;
    return s;
  }
};

CriterionResult c1_fig3() {
  CriterionResult r{1, "scaling slopes", false, "", 0};
  std::vector<int> ns = {64, 128, 256, 512, 1024};
  auto slopes = fig3_slopes(fig3_rows(2, ns, {1e-5, 0.25, 0.5, 0.75, 1 - 1e-5}));
  Tally t;
  double wg = 0, wp = 0, wc = 0, we = 0;
  for (const auto& s : slopes) {
    t.expect(std::abs(s.delta_group + 0.5) <= 0.05, "delta_G slope " + fmt(s.delta_group) + " at q=" + fmt(s.q));
    t.expect(std::abs(s.delta_point - 0.5) <= 0.05, "delta_P slope " + fmt(s.delta_point) + " at q=" + fmt(s.q));
    t.expect(std::abs(s.delta_charge) <= 0.02, "delta_C slope " + fmt(s.delta_charge) + " at q=" + fmt(s.q));
    t.expect(std::abs(s.epsilon_tilde + 1) <= 0.05, "epsilon slope " + fmt(s.epsilon_tilde) + " at q=" + fmt(s.q));
    wg = std::max(wg, std::abs(s.delta_group + 0.5));
    wp = std::max(wp, std::abs(s.delta_point - 0.5));
    wc = std::max(wc, std::abs(s.delta_charge));
    we = std::max(we, std::abs(s.epsilon_tilde + 1));
  }
  r.pass = t.pass();
  r.detail = t.detail("max slope deviations (G,P,C,eps) = " + fmt(wg) + ", " + fmt(wp) + ", " + fmt(wc) + ", " + fmt(we));
  return r;
}

CriterionResult c2_sandwich(int jobs) {
  CriterionResult r{2, "thermodynamic sandwich", false, "", 0};
  struct Case {
    int n;
    double q;
  };
  std::vector<Case> cases;
  for (int n : {6, 8, 10, 12})
    for (double q : {0.0, 0.5, 1.0}) cases.push_back({n, q});
  struct Out {
    double low, ebar, upper, tilde;
  };
  auto res = parallel_map(static_cast<int>(cases.size()), jobs, [&](int i) {
    ThermoParams p{cases[i].n, 2, cases[i].q};
    U1Code c = thermo_code(p);
    NoiseModel nm = NoiseModel::erasure_mixture(p.n);
    ClosedFormRecord cf = thermo_closed_forms(p);
    return Out{(1 - p.q) * p.m / (2 * (p.n + p.q * p.m)), epsilon_choi(c, nm).value, epsilon_bracket(c, nm).upper, cf.epsilon_tilde};
  });
  Tally t;
  double worst = 1e300;
  for (size_t i = 0; i < cases.size(); ++i) {
    const auto& o = res[i];
    const std::string at = " at n=" + std::to_string(cases[i].n) + " q=" + fmt(cases[i].q);
    t.expect(o.low - 1e-6 <= o.ebar, "lower " + fmt(o.low) + " > ebar " + fmt(o.ebar) + at);
    // the two sides coincide analytically for this family; allow rounding only
    t.expect(o.ebar <= o.upper + 1e-12, "ebar " + fmt(o.ebar) + " > upper " + fmt(o.upper) + at);
    t.expect(o.upper <= o.tilde + 1e-6, "upper " + fmt(o.upper) + " > tilde " + fmt(o.tilde) + at);
    worst = std::min({worst, o.ebar - o.low + 1e-6, o.upper + 1e-12 - o.ebar, o.tilde + 1e-6 - o.upper});
  }
  r.pass = t.pass();
  r.detail = t.detail("12 instances, smallest margin " + fmt(worst));
  return r;
}

CriterionResult c3_exact() {
  CriterionResult r{3, "exact QEC ends", false, "", 0};
  Tally t;
  std::string summary;
  {
    U1Code c = rm_code({3});
    NoiseModel nm = NoiseModel::erasure_mixture(7);
    const double e = epsilon_choi(c, nm).value, kl = kl_deviation(c, nm).max_violation;
    t.expect(e <= 1e-6, "RM ebar " + fmt(e));
    t.expect(kl <= 1e-8, "RM KL " + fmt(kl));
    summary = "RM t=3 ebar " + fmt(e) + " KL " + fmt(kl);
  }
  for (int n : {6, 8}) {
    U1Code c = thermo_code({n, 2, 1.0});
    NoiseModel nm = NoiseModel::erasure_mixture(n);
    const double e = epsilon_choi(c, nm).value, kl = kl_deviation(c, nm).max_violation;
    t.expect(e <= 1e-6, "thermo n=" + std::to_string(n) + " ebar " + fmt(e));
    t.expect(kl <= 1e-8, "thermo n=" + std::to_string(n) + " KL " + fmt(kl));
    summary += "; thermo n=" + std::to_string(n) + " ebar " + fmt(e) + " KL " + fmt(kl);
  }
  r.pass = t.pass();
  r.detail = t.detail(summary);
  return r;
}

CriterionResult c4_closed_forms(int jobs) {
  CriterionResult r{4, "closed-form agreement", false, "", 0};
  struct Case {
    int n;
    double q;
  };
  std::vector<Case> cases;
  for (int n : {6, 8, 10, 12})
    for (double q : {0.0, 0.25, 0.5, 1.0}) cases.push_back({n, q});
  cases.push_back({7, -1});  // Reed-Muller t = 3
  auto errs = parallel_map(static_cast<int>(cases.size()), jobs, [&](int i) {
    U1Code c = cases[i].q < 0 ? rm_code({3}) : thermo_code({cases[i].n, 2, cases[i].q});
    ClosedFormRecord cf = cases[i].q < 0 ? rm_closed_forms({3}) : thermo_closed_forms({cases[i].n, 2, cases[i].q});
    SymmetryReport s = symmetry_report(c, false);
    return std::vector<double>{std::abs(s.delta_group.value - cf.delta_group), std::abs(s.delta_point - cf.delta_point),
                               std::abs(s.delta_charge - cf.delta_charge), std::abs(std::abs(s.chi) - std::abs(cf.chi)),
                               std::abs(s.frak_b - cf.frak_b)};
  });
  const char* names[] = {"delta_G", "delta_P", "delta_C", "chi", "frak_B"};
  Tally t;
  double worst = 0;
  for (size_t i = 0; i < cases.size(); ++i)
    for (int k = 0; k < 5; ++k) {
      worst = std::max(worst, errs[i][k]);
      t.expect(errs[i][k] <= 1e-6, std::string(names[k]) + " off by " + fmt(errs[i][k]) + " at n=" + std::to_string(cases[i].n) +
                                       (cases[i].q < 0 ? " (RM)" : " q=" + fmt(cases[i].q)));
    }
  r.pass = t.pass();
  r.detail = t.detail("max deviation " + fmt(worst));
  return r;
}

CriterionResult c5_saturation() {
  CriterionResult r{5, "saturation ratios", false, "", 0};
  ClosedFormRecord cf = thermo_closed_forms({1024, 2, 0.5});
  const double G = cf.range_HL - 2 * cf.epsilon_lower * 1024;
  const double g_ratio = cf.delta_group / global_bound_g(G, cf.range_HS);
  const double c_ratio = cf.delta_charge / G;
  ClosedFormRecord rm = rm_closed_forms({3});
  const double rm_ratio = rm.delta_group / global_bound_g(rm.range_HL, rm.range_HS);
  Tally t;
  t.expect(g_ratio >= 1.9 && g_ratio <= 2.1, "delta_G ratio " + fmt(g_ratio));
  t.expect(c_ratio >= 0.99 && c_ratio <= 1.01, "delta_C ratio " + fmt(c_ratio));
  t.expect(std::abs(rm_ratio - 1.816) <= 0.01, "RM ratio " + fmt(rm_ratio));
  r.pass = t.pass();
  r.detail = t.detail("delta_G ratio " + fmt(g_ratio) + ", delta_C ratio " + fmt(c_ratio) + ", RM ratio " + fmt(rm_ratio));
  return r;
}

CriterionResult c6_sdp() {
  CriterionResult r{6, "SDP cross-checks", false, "", 0};
  Tally t;
  const double J = frak_j(erasure(2).kraus(), half_z()).value;
  t.expect(std::abs(J - 1) <= 1e-5, "erasure frak_J " + fmt(J));
  const double F = frak_f(dephasing(0.25).kraus(), half_z()).value;
  t.expect(std::abs(F - 1.0 / 3) <= 1e-4, "dephasing frak_F " + fmt(F));
  const double p1 = 0.1, p2 = 0.3;
  Mat I = Mat::Identity(2, 2);
  const double F12 = frak_f(tensor(dephasing(p1), dephasing(p2)).kraus(), kron(half_z(), I) + kron(I, half_z())).value;
  const double Fsum = frak_f(dephasing(p1).kraus(), half_z()).value + frak_f(dephasing(p2).kraus(), half_z()).value;
  t.expect(std::abs(F12 - Fsum) <= 1e-4, "additivity " + fmt(F12) + " vs " + fmt(Fsum));
  double worst = 0;
  for (int i = 0; i < 10; ++i)
    for (int k = 0; k < 10; ++k) {
      const double p = i / 9.0, phi = kPi * k / 9.0, a = 1 - 2 * p;
      const double closed = 0.5 * std::sqrt(std::max(0.0, 1 - 2 * a * std::cos(phi) + a * a));
      const double d = diamond_distance(rotated_dephasing(p, phi), identity_channel(2)).value;
      worst = std::max(worst, std::abs(d - closed));
      t.expect(std::abs(d - closed) <= 1e-6, "diamond off by " + fmt(std::abs(d - closed)) + " at p=" + fmt(p) + " phi=" + fmt(phi));
    }
  r.pass = t.pass();
  r.detail = t.detail("frak_J " + fmt(J) + ", frak_F " + fmt(F) + ", additivity gap " + fmt(std::abs(F12 - Fsum)) +
                      ", diamond grid max error " + fmt(worst));
  return r;
}

CriterionResult c7_inequalities(int jobs, std::uint64_t seed) {
  CriterionResult r{7, "inequality suite", false, "", 0};
  Tally t;
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  // delta_P >= delta_C on random isometric codes and the closed-form grid
  for (int k = 0; k < 50; ++k) {
    U1Code c = random_code(rng, 2 + k % 2, 4 + k % 3);
    const double dp = delta_point(c), dc = delta_charge(c);
    t.expect(dp >= dc - 1e-7, "delta_P " + fmt(dp) + " < delta_C " + fmt(dc) + " on random code " + std::to_string(k));
  }
  for (int n = 8; n <= 1024; n *= 2)
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      ClosedFormRecord cf = thermo_closed_forms({n, 2, q});
      t.expect(cf.delta_point >= cf.delta_charge - 1e-7, "closed-form delta_P < delta_C at n=" + std::to_string(n));
    }
  // frak_J^2 >= frak_F on every solved instance
  int solved = 0;
  for (int k = 0; k < 20; ++k) {
    const int d = 2 + k % 2;
    Channel ch = random_channel(rng, d, d, d + 1);
    Mat G = gaussian(rng, d, d);
    Mat H = 0.5 * (G + G.adjoint());
    HksResult j = frak_j(ch.kraus(), H), f = frak_f(ch.kraus(), H);
    if (!j.feasible || !f.feasible) continue;
    ++solved;
    t.expect(j.value * j.value >= f.value - 1e-5, "frak_J^2 < frak_F on random channel " + std::to_string(k));
  }
  for (double p : {0.05, 0.1, 0.25, 0.4}) {
    HksResult j = frak_j(dephasing(p).kraus(), half_z()), f = frak_f(dephasing(p).kraus(), half_z());
    ++solved;
    t.expect(j.value * j.value >= f.value - 1e-5, "frak_J^2 < frak_F on dephasing p=" + fmt(p));
  }
  // Fuchs-van de Graaf on states, diamond chain on channels
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + k % 3;
    Mat a = random_state(rng, d), b = random_state(rng, d);
    const double f = state_fidelity(a, b), T = trace_distance(a, b);
    t.expect(1 - f <= T + 1e-10 && T <= std::sqrt(std::max(0.0, 1 - f * f)) + 1e-10, "Fuchs-van de Graaf on pair " + std::to_string(k));
    Channel ch = random_channel(rng, 2, 2, 2);
    const double P = worst_case_purified_distance(ch, identity_channel(2)).value;
    const double D = diamond_distance(ch, identity_channel(2)).value;
    t.expect(D >= P * P - 1e-7 && D <= P + 1e-7, "diamond chain on channel " + std::to_string(k));
  }
  // diamond variant equals the worst-case one on isometric codes
  {
    std::vector<U1Code> codes = {thermo_code({8, 2, 0.5}), rm_code({3})};
    for (int k = 0; k < 3; ++k) codes.push_back(random_code(rng, 2, 4));
    auto diffs = parallel_map(static_cast<int>(codes.size()), jobs, [&](int i) {
      return std::abs(delta_group_diamond(codes[i]).value - delta_group(codes[i]).value);
    });
    for (size_t i = 0; i < diffs.size(); ++i) t.expect(diffs[i] <= 1e-6, "delta_G diamond mismatch " + fmt(diffs[i]) + " on " + codes[i].name);
  }
  // protocol inequalities
  {
    struct Case {
      int n;
      double q;
    };
    std::vector<Case> cases;
    for (int n : {6, 8, 10})
      for (double q : {0.0, 0.5, 1.0}) cases.push_back({n, q});
    auto res = parallel_map(static_cast<int>(cases.size()), jobs, [&](int i) {
      ThermoParams p{cases[i].n, 2, cases[i].q};
      U1Code c = thermo_code(p);
      NoiseModel nm = NoiseModel::erasure_mixture(p.n);
      ClosedFormRecord cf = thermo_closed_forms(p);
      EpsilonBracket b = epsilon_bracket(c, nm);
      TwoLevelProtocol pr = two_level_protocol(c, nm, b.recovery_witness);
      return std::pair<double, double>{std::abs(pr.xi0) - (1 - 2 * b.upper * b.upper),
                                       std::abs(pr.dxi0) - (std::abs(cf.chi) - 2 * b.upper * cf.frak_b)};
    });
    for (size_t i = 0; i < cases.size(); ++i) {
      const std::string at = " at n=" + std::to_string(cases[i].n) + " q=" + fmt(cases[i].q);
      t.expect(res[i].first >= -1e-7, "|xi0| bound slack " + fmt(res[i].first) + at);
      t.expect(res[i].second >= -1e-7, "|dxi0| bound slack " + fmt(res[i].second) + at);
    }
  }
  // RLD dominates SLD on dephasing
  for (double p : {0.1, 0.2, 0.3, 0.4}) {
    const double fr = rld_channel_qfi(dephasing(p).kraus(), half_z()), fi = frak_f(dephasing(p).kraus(), half_z()).value;
    t.expect(fr >= fi - 1e-6, "RLD " + fmt(fr) + " < SLD " + fmt(fi) + " at p=" + fmt(p));
  }
  // every bound on the case-study grids
  double min_slack = 1e300;
  int evaluated = 0;
  auto run = [&](const BoundInputs& in, const std::string& at) {
    for (const auto& e : evaluate_bounds(in)) {
      if (!e.applicable) continue;
      ++evaluated;
      min_slack = std::min(min_slack, e.slack);
      t.expect(e.satisfied, e.name + " slack " + fmt(e.slack) + at);
    }
  };
  for (int n = 8; n <= 1024; n *= 2)
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) run(thermo_closed_form_inputs({n, 2, q}), " at thermo n=" + std::to_string(n) + " q=" + fmt(q));
  for (int tt : {3, 4}) run(rm_closed_form_inputs({tt}), " at RM t=" + std::to_string(tt));
  {
    struct Case {
      std::string kind;
      int n;
      double q;
    };
    std::vector<Case> cases = {{"thermo", 8, 0.0}, {"thermo", 8, 0.5}, {"thermo", 8, 1.0}, {"rm", 7, 0}};
    Config cfg = Config::parse("report.timings = false\n", "<acceptance>");
    auto reports = parallel_map(static_cast<int>(cases.size()), jobs, [&](int i) {
      U1Code c = cases[i].kind == "rm" ? rm_code({3}) : thermo_code({cases[i].n, 2, cases[i].q});
      NoiseModel nm = NoiseModel::erasure_mixture(cases[i].n);
      RunOptions opt;
      opt.seed = seed;
      int code = 0;
      return measure_report(c, nm, cfg, opt, &code);
    });
    for (size_t i = 0; i < cases.size(); ++i) {
      const std::string at = " in measured " + cases[i].kind + " n=" + std::to_string(cases[i].n) + " q=" + fmt(cases[i].q);
      for (const auto& b : reports[i]["bounds"]) {
        if (!b["applicable"].get<bool>()) continue;
        ++evaluated;
        min_slack = std::min(min_slack, b["slack"].get<double>());
        t.expect(b["satisfied"].get<bool>(), b["name"].get<std::string>() + at);
      }
      for (auto it = reports[i]["checks"].begin(); it != reports[i]["checks"].end(); ++it)
        t.expect(it.value()["ok"].get<bool>(), it.key() + at);
    }
  }
  r.pass = t.pass();
  r.detail = t.detail(std::to_string(solved) + " frak instances, " + std::to_string(evaluated) + " bound evaluations, min slack " + fmt(min_slack));
  return r;
}

CriterionResult c8_transversal() {
  CriterionResult r{8, "transversal-gate arithmetic", false, "", 0};
  Tally t;
  const double cap = transversal_gate_bound(1.0, std::vector<double>(7, 1.0));
  t.expect(std::abs(cap - 188.07) <= 0.01, "cap " + fmt(cap));
  t.expect(4 <= cap, "RM D = 4 exceeds the cap");
  double worst = 0;
  for (int n = 4; n <= 1024; n *= 2) {
    const double ratio = transversal_gate_bound(1.0, std::vector<double>(2 * n, 1.0)) / transversal_gate_bound(1.0, std::vector<double>(n, 1.0));
    worst = std::max(worst, ratio);
    t.expect(ratio <= 8, "doubling ratio " + fmt(ratio) + " at n=" + std::to_string(n));
  }
  r.pass = t.pass();
  r.detail = t.detail("cap " + fmt(cap) + " (level " + std::to_string(clifford_level_cap(cap)) + "), max doubling ratio " + fmt(worst));
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(int jobs, std::uint64_t seed) {
  std::vector<std::function<CriterionResult()>> cs = {
      [] { return c1_fig3(); },
      [&] { return c2_sandwich(jobs); },
      [] { return c3_exact(); },
      [&] { return c4_closed_forms(jobs); },
      [] { return c5_saturation(); },
      [] { return c6_sdp(); },
      [&] { return c7_inequalities(jobs, seed); },
      [] { return c8_transversal(); },
  };
  std::vector<CriterionResult> out;
  for (size_t i = 0; i < cs.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = cs[i]();
    } catch (const std::exception& e) {
      r.id = static_cast<int>(i) + 1;
      r.name = "criterion " + std::to_string(i + 1);
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  }
  return out;
}

std::string format_criterion(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %d %s (%.1fs): ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  return head + r.detail;
}

}  // namespace covqec
