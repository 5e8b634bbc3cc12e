// Acceptance suite: one PASS/FAIL line per criterion.
//
// The {5,7,11} elimination system with s = 4 has no root at m = 0.90, so
// every check that needs exact angles there fails. Those sub-checks are
// reported as FAIL and tagged "no-root"; the process exit status ignores a
// failure only when every failing sub-check is such a point. Pass --strict
// to make any FAIL fatal.

#include "sheforge/angle_table.hpp"
#include "sheforge/ann.hpp"
#include "sheforge/cli.hpp"
#include "sheforge/csv.hpp"
#include "sheforge/error.hpp"
#include "sheforge/manifest.hpp"
#include "sheforge/simulator.hpp"
#include "sheforge/spectrum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace sheforge;

namespace {

const HarmonicSet kSet = HarmonicSet::default_set();
constexpr double kNoRootM = 0.90;

struct Outcome {
  std::vector<std::string> detail;
  int failures = 0;
  int no_root_failures = 0; // failures caused only by the missing root at m = 0.90

  void check(bool ok, const std::string &what, bool at_no_root = false) {
    if (ok)
      return;
    ++failures;
    if (at_no_root)
      ++no_root_failures;
    detail.push_back(what + (at_no_root ? " [no-root]" : ""));
  }
};

std::string f(const char *spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

Outcome solver_correctness() {
  Outcome o;
  for (int i = 0; i <= 7; ++i) {
    const double m = 0.55 + 0.05 * i;
    const AngleSolution s = newton_solve(m, kSet);
    const bool ok = s.converged && s.residual_norm < 1e-9 && SwitchingAngleSet::satisfies_strict(s.angles);
    o.check(ok, "m=" + f("%.2f", m) + " residual=" + f("%.3g", s.residual_norm), near(m, kNoRootM));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const AngleTable t = sweep_solutions(0.55, 0.90, 0.01, kSet);
  const double dt = seconds_since(t0);
  o.check(dt < 1.0 && t.rows.size() == 36, "sweep took " + f("%.3f", dt) + " s");
  o.detail.push_back("sweep 0.55..0.90 step 0.01: " + f("%.3f", dt) + " s");
  return o;
}

Outcome table_audit() {
  Outcome o;
  const AngleTable t = ingest_angle_table(std::string(SHEFORGE_DATA_DIR) + "/table1.csv");
  const AuditReport rep = audit_table(t, kSet);
  o.check(t.rows.size() == 12, "row count " + std::to_string(t.rows.size()));
  bool flagged_881 = false;
  for (const auto &r : rep.rows)
    if (r.m == 8.81)
      flagged_881 = std::find(r.flags.begin(), r.flags.end(), flag::kMOutOfRange) != r.flags.end();
  o.check(flagged_881, "row 8.81 not flagged");
  double r5 = 0.0;
  for (const auto &r : rep.rows)
    if (r.m == 0.9 && r.residuals.size() == 4)
      r5 = r.residuals[1];
  o.check(std::abs(r5) > 0.1, "|sum cos 5theta| at m=0.9 is " + f("%.3g", std::abs(r5)));
  o.detail.push_back("row 8.81 flagged m_out_of_range; m=0.9 sum cos(5 theta) = " + f("%.3g", r5));
  return o;
}

Outcome cross_method_thd() {
  Outcome o;
  for (double m : {0.6, 0.7, 0.8, 0.9}) {
    const AngleSolution s = newton_solve(m, kSet);
    if (!s.converged) {
      o.check(false, "m=" + f("%.1f", m) + " has no solved angles", near(m, kNoRootM));
      continue;
    }
    const auto a = SwitchingAngleSet::strict(s.angles);
    const auto w = synthesize_staircase(a, 10.0, 50.0, 2e5, 10);
    const double analytic = 100.0 * analytic_thd(a, 49);
    const double numeric = 100.0 * thd(harmonic_spectrum(w, 49), 49);
    o.check(std::abs(analytic - numeric) < 0.2, "m=" + f("%.1f", m) + " differs by " + f("%.4f", analytic - numeric));
    o.detail.push_back("m=" + f("%.1f", m) + " analytic " + f("%.4f", analytic) + "% spectrum " + f("%.4f", numeric) + "%");
  }
  return o;
}

Outcome eliminated_harmonics() {
  Outcome o;
  const AngleSolution s = newton_solve(0.8, kSet);
  o.check(s.converged, "no solution at m=0.8");
  const SimulationTrace tr = simulate_she(InverterConfig{}, SwitchingAngleSet::strict(s.angles), 0.2);
  const auto sp = harmonic_spectrum(tr.voltage, tr.sample_rate, tr.f0, 49);
  for (int n : {5, 7, 11}) {
    const double ratio = sp.magnitude(n) / sp.magnitude(1);
    o.check(ratio < 0.005, "h" + std::to_string(n) + "/h1 = " + f("%.3g", ratio));
    o.detail.push_back("m=0.8 h" + std::to_string(n) + "/h1 = " + f("%.2e", ratio));
  }
  return o;
}

Outcome ann_quality() {
  Outcome o;
  TrainSetup setup;
  setup.holdout_every = 5;
  const TrainOutcome t = train_from_setup(setup);
  double worst_deg = 0.0, worst_pp = -1e9;
  for (const auto &r : t.held_out.rows) {
    const SwitchingAngleSet p = predict_angles(t.result.model, r.m);
    for (int k = 0; k < p.size(); ++k)
      worst_deg = std::max(worst_deg, std::abs(rad_to_deg(p[k] - r.angles[static_cast<std::size_t>(k)])));
    const double pen = 100.0 * (analytic_thd(p, 49) - analytic_thd(SwitchingAngleSet::relaxed(r.angles), 49));
    worst_pp = std::max(worst_pp, pen);
  }
  o.check(!t.held_out.rows.empty(), "no held-out rows");
  o.check(worst_deg < 0.5, "worst held-out angle error " + f("%.4f", worst_deg) + " deg");
  o.check(worst_pp < 0.3, "worst THD penalty " + f("%.4f", worst_pp) + " pp");

  const MlpModel fresh = init_mlp(std::vector<int>{1, kDefaultHidden, 4}, 42);
  const double gc = gradient_check(fresh, std::vector<double>{0.3}, std::vector<double>{0.1, -0.2, 0.4, 0.7}, 1e-5);
  o.check(gc < 1e-4, "gradient check " + f("%.3g", gc));
  o.detail.push_back(std::to_string(t.held_out.rows.size()) + " held-out rows in [" + f("%.3f", t.result.model.train_lo) +
                     ", " + f("%.3f", t.result.model.train_hi) + "]: worst " + f("%.4f", worst_deg) + " deg, THD +" +
                     f("%.4f", worst_pp) + " pp; gradient check " + f("%.2e", gc));
  return o;
}

Outcome strategy_ranking() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  TrainSetup setup;
  const MlpModel model = train_from_setup(setup).result.model;
  CompareOptions opt;
  opt.m = kNoRootM;
  try {
    const auto rows = compare_strategies(opt, model);
    const double she49 = rows[2].thd49, spwm200 = rows[0].thd200;
    o.check(she49 < spwm200, "she thd49 " + f("%.3f", 100 * she49) + "% vs spwm thd200 " + f("%.3f", 100 * spwm200) + "%");
  } catch (const Error &e) {
    o.check(false, std::string("m=0.90: ") + e.kind() + ": " + e.what(), true);
  }
  const double dt = seconds_since(t0);
  o.check(dt < 10.0, "compare took " + f("%.2f", dt) + " s");

  // Same ranking at the highest grid point with a root, for information only.
  opt.m = 0.85;
  const auto rows = compare_strategies(opt, model);
  o.detail.push_back("info m=0.85: she_ann thd49 " + f("%.3f", 100 * rows[2].thd49) + "% < open_loop_spwm thd200 " +
                     f("%.3f", 100 * rows[0].thd200) + "% : " + (rows[2].thd49 < rows[0].thd200 ? "yes" : "no") +
                     "; compare runtime " + f("%.2f", dt) + " s");
  return o;
}

Outcome spwm_linearity() {
  Outcome o;
  const InverterConfig c;
  for (double m : {0.4, 0.6, 0.8, 1.0}) {
    const SimulationTrace tr = simulate_open_loop_spwm(c, m, 0.2);
    const double h1 = harmonic_spectrum(tr.voltage, tr.sample_rate, c.f0, 1).magnitude(1);
    const double err = (h1 - m * c.bridges * c.vdc[0]) / (m * c.bridges * c.vdc[0]);
    o.check(std::abs(err) < 0.02, "m=" + f("%.1f", m) + " error " + f("%.4f", err));
    o.detail.push_back("m=" + f("%.1f", m) + " h1=" + f("%.4f", h1) + " V (" + f("%+.3f", 100 * err) + "%)");
  }
  return o;
}

Outcome pi_loop() {
  Outcome o;
  const InverterConfig c;
  const SimulationTrace tr = simulate_closed_loop_pi(c, 25.0, PiGains{}, 1.0);
  const std::size_t per = static_cast<std::size_t>(tr.sample_rate / c.f0);
  int settled_cycle = -1;
  const int cycles = static_cast<int>(tr.size() / per);
  for (int k = cycles - 1; k >= 0; --k) {
    const double v = rms(std::span<const double>(tr.voltage.data() + static_cast<std::size_t>(k) * per, per));
    if (std::abs(v - 25.0) >= 0.5)
      break;
    settled_cycle = k;
  }
  const double settle_s = settled_cycle < 0 ? 1e9 : settled_cycle / c.f0;
  o.check(settled_cycle >= 0 && settle_s <= 0.5, "settles at " + f("%.3f", settle_s) + " s");

  PiGains zero;
  zero.kp = zero.ki = 0.0;
  const SimulationTrace pz = simulate_closed_loop_pi(c, 25.0, zero, 0.2);
  const SimulationTrace ol = simulate_open_loop_spwm(c, zero.m_initial, 0.2);
  o.check(pz.voltage == ol.voltage && pz.level == ol.level, "zero-gain loop differs from open loop");
  o.detail.push_back("within 2% of 25 V from " + f("%.3f", settle_s) + " s on; final m=" + f("%.5f", tr.m.back()) +
                     "; zero gains identical to open loop");
  return o;
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sheforge_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) {
    const int code = run_cli(args, sink, sink);
    o.check(code == 0, "command failed: " + args.front());
  };
  run({"solve", "--m", "0.8", "--out", d + "/sol.json"});
  run({"sweep", "--from", "0.55", "--to", "0.9", "--step", "0.01", "--out", d + "/table.csv"});
  run({"audit", "--in", std::string(SHEFORGE_DATA_DIR) + "/table1.csv", "--out", d + "/table1.audit.json"});
  run({"train", "--seed", "7", "--out", d + "/model.json"});
  run({"predict", "--model", d + "/model.json", "--m", "0.8", "--out", d + "/pred.json"});
  run({"simulate", "--mode", "pi", "--v-ref", "25", "--duration", "0.2", "--out", d + "/pi.csv"});
  run({"spectrum", "--in", d + "/pi.csv", "--out", d + "/pi_spec.csv"});
  run({"compare", "--m", "0.85", "--model", d + "/model.json", "--out-dir", d, "--svg", "--pi-duration", "0.4"});
  run({"plot", "--kind", "thd", "--in", d + "/table.csv", "--out", d + "/thd.svg"});

  std::vector<fs::path> manifests;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.path().string().ends_with(".manifest.json"))
      manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());

  // Artifacts of one command share a manifest; replay each command once.
  std::vector<std::string> seen;
  std::size_t compared = 0, commands = 0;
  for (const auto &mp : manifests) {
    const std::string text = csv::read_text(mp.string());
    if (std::find(seen.begin(), seen.end(), text) != seen.end())
      continue;
    seen.push_back(text);
    ++commands;
    const RunManifest m = manifest_from_json(text);
    std::vector<std::pair<std::string, std::string>> before;
    for (const auto &out : m.outputs)
      before.emplace_back(out, csv::read_text(out));
    for (const auto &out : m.outputs)
      fs::remove(out);
    run({"replay", mp.string()});
    for (const auto &[path, bytes] : before) {
      o.check(fs::exists(path) && csv::read_text(path) == bytes, "replay changed " + fs::path(path).filename().string());
      ++compared;
    }
  }
  o.check(manifests.size() >= 10, "only " + std::to_string(manifests.size()) + " manifests written");
  o.detail.push_back(std::to_string(commands) + " commands replayed from " + std::to_string(manifests.size()) +
                     " manifests, " + std::to_string(compared) + " artifacts byte-identical");
  fs::remove_all(dir);
  return o;
}

} // namespace

int main(int argc, char **argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
      {"solver correctness", solver_correctness},
      {"published table audit", table_audit},
      {"cross-method THD", cross_method_thd},
      {"eliminated harmonics in simulation", eliminated_harmonics},
      {"ANN surrogate quality", ann_quality},
      {"strategy ranking", strategy_ranking},
      {"SPWM linearity", spwm_linearity},
      {"PI loop", pi_loop},
      {"determinism", determinism},
  };

  int passed = 0, failed = 0, unexplained = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const bool ok = o.failures == 0;
    std::printf("%s %zu %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first);
    for (const auto &line : o.detail)
      std::printf("    %s\n", line.c_str());
    ok ? ++passed : ++failed;
    if (o.failures > o.no_root_failures)
      ++unexplained;
  }
  std::printf("%d passed, %d failed (%d with failures beyond the no-root point m=0.90)\n", passed, failed,
              unexplained);
  std::fflush(stdout);
  return (strict ? failed : unexplained) == 0 ? 0 : 1;
}
