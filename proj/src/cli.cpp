#include "sheforge/cli.hpp"

#include "sheforge/csv.hpp"
#include "sheforge/error.hpp"
#include "sheforge/manifest.hpp"
#include "sheforge/spectrum.hpp"
#include "sheforge/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

namespace sheforge {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(const char *spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<double> parse_list(const std::string &text) {
  std::vector<double> out;
  for (const auto &cell : csv::split_line(text)) {
    double v = 0.0;
    if (!csv::parse_double(cell, v))
      throw DomainError("bad number '" + cell + "' in list");
    out.push_back(v);
  }
  return out;
}

// First s - 1 odd orders that are not multiples of three: 5, 7, 11, 13, ...
HarmonicSet default_harmonics(int bridges) {
  std::vector<int> orders;
  for (int n = 5; static_cast<int>(orders.size()) < bridges - 1; n += 2)
    if (n % 3 != 0)
      orders.push_back(n);
  return HarmonicSet(orders);
}

HarmonicSet harmonics_for(const std::string &text, int bridges) {
  HarmonicSet h = text.empty() ? default_harmonics(bridges) : HarmonicSet::parse(text);
  if (h.bridges() != bridges)
    throw DomainError("harmonic set " + h.to_string() + " needs s = " + std::to_string(h.bridges()) +
                      ", got s = " + std::to_string(bridges));
  return h;
}

std::string sidecar_audit_path(const std::string &table_path) {
  const std::string ext = ".csv";
  if (table_path.size() > ext.size() && table_path.compare(table_path.size() - ext.size(), ext.size(), ext) == 0)
    return table_path.substr(0, table_path.size() - ext.size()) + ".audit.json";
  return table_path + ".audit.json";
}

std::string quote_message(const std::string &msg) {
  std::string q;
  for (char c : msg) {
    if (c == '"' || c == '\\')
      q += '\\';
    q += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return q;
}

void print_error(std::ostream &err, const std::string &kind, const std::string &msg) {
  err << "error kind=" << kind << " message=\"" << quote_message(msg) << "\"\n";
}

// One command invocation: collects artifacts and writes them with manifests.
struct Run {
  std::ostream &out;
  std::vector<std::string> argv;
  std::uint64_t seed = kDefaultSeed;
  std::string command;
  ojson inputs = ojson::object();
  std::vector<std::pair<std::string, std::string>> artifacts;

  void add(const std::string &path, std::string contents) { artifacts.emplace_back(path, std::move(contents)); }

  void commit() {
    if (artifacts.empty())
      return;
    RunManifest m;
    m.command = command;
    m.argv = argv;
    m.inputs_json = inputs.dump();
    m.seed = seed;
    for (const auto &a : artifacts)
      m.outputs.push_back(a.first);
    const std::string manifest = manifest_to_json(m);
    for (const auto &a : artifacts) {
      csv::write_file(a.first, a.second);
      csv::write_file(manifest_path_for(a.first), manifest);
    }
  }
};

// Records every long option of a subcommand, given or defaulted, as strings.
ojson collect_inputs(const CLI::App &sub) {
  ojson j = ojson::object();
  for (const CLI::Option *opt : sub.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help")
      continue;
    const std::string name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto &r = opt->results();
      j[name] = r.size() == 1 ? ojson(r.front()) : ojson(r);
    } else if (!opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

InverterConfig load_config(const std::string &path) {
  if (path.empty()) {
    InverterConfig c;
    c.validate();
    return c;
  }
  return config_from_json(csv::read_text(path));
}

std::string solution_json(const AngleSolution &sol, const HarmonicSet &hset) {
  ojson j;
  j["m"] = sol.m;
  j["bridges"] = hset.bridges();
  j["harmonics"] = std::vector<int>(hset.orders().begin(), hset.orders().end());
  std::vector<double> deg;
  for (double a : sol.angles)
    deg.push_back(rad_to_deg(a));
  j["angles_deg"] = deg;
  j["angles_rad"] = sol.angles;
  j["residual_norm"] = sol.residual_norm;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["thd49_pct"] = 100.0 * analytic_thd(sol.angle_set(), 49);
  return j.dump(2) + "\n";
}

std::vector<double> series_of(const csv::Document &doc, const std::string &column) {
  const auto it = std::find(doc.header.begin(), doc.header.end(), column);
  if (it == doc.header.end())
    throw FormatError("CSV has no column '" + column + "'");
  const auto c = static_cast<std::size_t>(it - doc.header.begin());
  std::vector<double> v;
  v.reserve(doc.rows.size());
  for (const auto &row : doc.rows) {
    double x = 0.0;
    if (c >= row.size() || !csv::parse_double(row[c], x))
      throw FormatError("bad numeric cell in column '" + column + "'");
    v.push_back(x);
  }
  return v;
}

double sample_rate_of(const std::vector<double> &t) {
  if (t.size() < 2 || !(t[1] > t[0]))
    throw FormatError("time column needs two increasing samples");
  return std::round(1e6 / (t[1] - t[0])) / 1e6;
}

StrategyResult analyze(std::string name, SimulationTrace trace, int cycles) {
  StrategyResult r;
  r.strategy = std::move(name);
  r.m = trace.m.back();
  r.analyzed = trace.tail_cycles(cycles);
  const HarmonicSpectrum sp = harmonic_spectrum(r.analyzed, trace.sample_rate, trace.f0, 200);
  r.thd13 = thd(sp, 13);
  r.thd49 = thd(sp, 49);
  r.thd200 = thd(sp, 200);
  r.v1_peak = sp.magnitude(1);
  r.v_rms = rms(r.analyzed);
  r.trace = std::move(trace);
  return r;
}

svg::Chart waveform_chart(const std::string &title, const std::vector<double> &t, const std::vector<double> &v,
                          std::size_t max_points) {
  svg::Series s{"v_out", {}, {}};
  const std::size_t n = std::min(t.size(), max_points);
  s.x.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(n));
  s.y.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
  for (double &x : s.x)
    x *= 1e3;
  return {title, "time (ms)", "voltage (V)", {std::move(s)}};
}

svg::Chart spectrum_chart(const std::string &title, const HarmonicSpectrum &sp) {
  svg::Series s{"magnitude", {}, {}};
  for (int n = 1; n <= sp.max_order(); ++n) {
    s.x.push_back(n);
    s.y.push_back(sp.magnitude(n));
  }
  svg::Chart c{title, "harmonic order", "magnitude (V)", {std::move(s)}};
  c.bars = true;
  return c;
}

} // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed) {
  if (explicit_seed)
    return *explicit_seed;
  if (const char *env = std::getenv("SHEFORGE_SEED"); env && *env) {
    char *end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0')
      return v;
    throw DomainError("SHEFORGE_SEED is not an unsigned integer");
  }
  return kDefaultSeed;
}

TrainOutcome train_from_setup(const TrainSetup &setup, const AngleTable *table) {
  TrainOutcome o;
  if (table) {
    o.sweep = *table;
  } else {
    SweepOptions so;
    so.newton.seed = setup.seed;
    o.sweep = sweep_solutions(setup.m_from, setup.m_to, setup.m_step, setup.hset, so);
  }
  const TrainingDataset branch = dataset_from_table(o.sweep, setup.branch);
  for (std::size_t i = 0; i < branch.rows.size(); ++i) {
    const bool hold = setup.holdout_every > 0 && (i + 1) % static_cast<std::size_t>(setup.holdout_every) == 0;
    (hold ? o.held_out : o.train_rows).rows.push_back(branch.rows[i]);
  }
  validate_dataset(o.train_rows);
  if (setup.hidden < 1)
    throw DomainError("hidden layer needs at least one unit");
  const std::vector<int> sizes{1, setup.hidden, o.train_rows.outputs()};
  MlpModel model = prepare_model(sizes, o.train_rows, setup.seed);
  o.result = train(std::move(model), o.train_rows, setup.epochs, setup.learning_rate);
  return o;
}

std::vector<StrategyResult> compare_strategies(const CompareOptions &opt, const MlpModel &model) {
  opt.config.validate();
  if (opt.cycles < 1)
    throw DomainError("compare needs at least one analyzed cycle");
  const double window = opt.cycles / opt.config.f0;
  std::vector<StrategyResult> rows;

  rows.push_back(analyze("open_loop_spwm", simulate_open_loop_spwm(opt.config, opt.m, window, opt.sample_rate),
                         opt.cycles));

  const double v_ref = opt.v_ref_rms.value_or(rows.front().v_rms);
  rows.push_back(analyze("pi_closed_loop",
                         simulate_closed_loop_pi(opt.config, v_ref, opt.gains, opt.pi_duration, opt.sample_rate),
                         opt.cycles));

  if (model.outputs() != opt.config.bridges)
    throw DomainError("model predicts " + std::to_string(model.outputs()) + " angles for " +
                      std::to_string(opt.config.bridges) + " bridges");
  const SwitchingAngleSet angles = predict_angles(model, opt.m);
  rows.push_back(analyze("she_ann", simulate_she(opt.config, angles, window, opt.sample_rate), opt.cycles));
  return rows;
}

std::string compare_csv(const std::vector<StrategyResult> &rows, std::uint64_t seed) {
  std::ostringstream out;
  out << "strategy,m,thd13_pct,thd49_pct,thd200_pct,v1_peak_V,v_rms_V,seed,tool_version\n";
  for (const auto &r : rows)
    out << r.strategy << ',' << csv::format_double(r.m) << ',' << csv::format_double(100.0 * r.thd13) << ','
        << csv::format_double(100.0 * r.thd49) << ',' << csv::format_double(100.0 * r.thd200) << ','
        << csv::format_double(r.v1_peak) << ',' << csv::format_double(r.v_rms) << ',' << seed << ','
        << kToolVersion << '\n';
  return out.str();
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Selective harmonic elimination toolkit for cascaded H-bridge inverters", "sheforge"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_opt;
  app.add_option("--seed", seed_opt, "RNG seed (default: $SHEFORGE_SEED, else 42)");
  app.set_version_flag("--version", kToolVersion);

  std::function<void(Run &)> action;
  CLI::App *active = nullptr;
  auto sub = [&](const std::string &name, const std::string &desc) {
    CLI::App *s = app.add_subcommand(name, desc);
    s->fallthrough();
    return s;
  };

  // solve
  double solve_m = 0.0;
  int solve_s = 4;
  std::string solve_h, solve_guess, solve_out;
  double solve_tol = 1e-10;
  {
    auto *s = sub("solve", "Solve the SHE equations at one modulation index");
    s->add_option("--m", solve_m, "per-unit modulation index")->required();
    s->add_option("--s", solve_s, "bridge count")->capture_default_str();
    s->add_option("--harmonics", solve_h, "orders to eliminate, e.g. 5,7,11");
    s->add_option("--guess", solve_guess, "initial angles in degrees");
    s->add_option("--tol", solve_tol, "residual infinity-norm tolerance")->capture_default_str();
    s->add_option("--out", solve_out, "solution JSON path (stdout if omitted)");
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        const HarmonicSet h = harmonics_for(solve_h, solve_s);
        NewtonOptions no;
        no.tol = solve_tol;
        no.seed = run.seed;
        std::optional<std::vector<double>> guess;
        if (!solve_guess.empty()) {
          guess.emplace();
          for (double d : parse_list(solve_guess))
            guess->push_back(deg_to_rad(d));
        }
        const AngleSolution sol = newton_solve(solve_m, h, guess, no);
        if (!sol.converged)
          throw NumericalError("no solution found at m=" + fmt("%.17g", solve_m) +
                               "; best residual " + fmt("%.3g", sol.residual_norm));
        const std::string json = solution_json(sol, h);
        if (solve_out.empty())
          run.out << json;
        else
          run.add(solve_out, json);
      };
    });
  }

  // sweep
  double sw_from = 0.55, sw_to = 0.9, sw_step = 0.01;
  int sw_s = 4;
  std::string sw_h, sw_out;
  {
    auto *s = sub("sweep", "Continuation sweep of the SHE solution over m");
    s->add_option("--from", sw_from)->capture_default_str();
    s->add_option("--to", sw_to)->capture_default_str();
    s->add_option("--step", sw_step)->capture_default_str();
    s->add_option("--s", sw_s)->capture_default_str();
    s->add_option("--harmonics", sw_h);
    s->add_option("--out", sw_out, "angle table CSV")->required();
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        const HarmonicSet h = harmonics_for(sw_h, sw_s);
        SweepOptions so;
        so.newton.seed = run.seed;
        const AngleTable table = sweep_solutions(sw_from, sw_to, sw_step, h, so);
        const AuditReport rep = audit_table(table, h);
        run.add(sw_out, angle_table_csv(table));
        run.add(sidecar_audit_path(sw_out), audit_json(rep));
        std::size_t failed = 0;
        for (const auto &r : table.rows)
          failed += r.flagged();
        run.out << "rows=" << table.rows.size() << " not_converged=" << failed << '\n';
      };
    });
  }

  // audit
  std::string au_in, au_h, au_out;
  double au_tol = 1e-9;
  {
    auto *s = sub("audit", "Validate an angle table against the elimination equations");
    s->add_option("--in", au_in, "angle table CSV")->required();
    s->add_option("--harmonics", au_h);
    s->add_option("--tol", au_tol)->capture_default_str();
    s->add_option("--out", au_out, "report JSON (default: <table>.audit.json)");
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        const AngleTable table = ingest_angle_table(au_in);
        const HarmonicSet h = harmonics_for(au_h, table.bridges);
        const AuditReport rep = audit_table(table, h, au_tol);
        run.add(au_out.empty() ? sidecar_audit_path(au_in) : au_out, audit_json(rep));
        run.out << "rows=" << rep.rows.size() << " flagged=" << rep.flagged_rows() << '\n';
        for (const auto &r : rep.rows) {
          if (r.flags.empty())
            continue;
          run.out << "row=" << r.row << " m=" << fmt("%.6g", r.m);
          for (std::size_t k = 0; k < r.residuals.size(); ++k)
            run.out << ' ' << (k == 0 ? std::string("r1") : "r" + std::to_string(h.orders()[k - 1])) << '='
                    << fmt("%.3g", r.residuals[k]);
          run.out << " flags=";
          for (std::size_t k = 0; k < r.flags.size(); ++k)
            run.out << (k ? "," : "") << r.flags[k];
          run.out << '\n';
        }
      };
    });
  }

  // train
  TrainSetup ts;
  std::string tr_table, tr_h, tr_branch = "upper", tr_out, tr_loss;
  {
    auto *s = sub("train", "Train the m -> angle network on a solver sweep or a table");
    s->add_option("--table", tr_table, "angle table CSV (default: run a sweep)");
    s->add_option("--from", ts.m_from)->capture_default_str();
    s->add_option("--to", ts.m_to)->capture_default_str();
    s->add_option("--step", ts.m_step)->capture_default_str();
    s->add_option("--harmonics", tr_h);
    s->add_option("--branch", tr_branch, "upper, longest or all")->capture_default_str();
    s->add_option("--hidden", ts.hidden)->capture_default_str();
    s->add_option("--epochs", ts.epochs)->capture_default_str();
    s->add_option("--lr", ts.learning_rate)->capture_default_str();
    s->add_option("--holdout-every", ts.holdout_every, "withhold every k-th row")->capture_default_str();
    s->add_option("--out", tr_out, "model JSON")->required();
    s->add_option("--loss-out", tr_loss, "loss history CSV");
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        ts.seed = run.seed;
        ts.branch = parse_branch(tr_branch);
        std::optional<AngleTable> table;
        if (!tr_table.empty()) {
          table = ingest_angle_table(tr_table);
          ts.hset = harmonics_for(tr_h, table->bridges);
        } else {
          ts.hset = tr_h.empty() ? HarmonicSet::default_set() : HarmonicSet::parse(tr_h);
        }
        const TrainOutcome o = train_from_setup(ts, table ? &*table : nullptr);
        const MlpModel &model = o.result.model;
        run.add(tr_out, model_to_json(model));
        if (!tr_loss.empty()) {
          std::string loss = "epoch,loss\n";
          for (std::size_t e = 0; e < o.result.loss_history.size(); ++e)
            loss += std::to_string(e) + ',' + csv::format_double(o.result.loss_history[e]) + '\n';
          run.add(tr_loss, loss);
        }
        run.out << "rows=" << o.train_rows.rows.size() << " range=[" << fmt("%.6g", model.train_lo) << ','
                << fmt("%.6g", model.train_hi) << "] loss=" << fmt("%.6g", o.result.loss_history.front())
                << "->" << fmt("%.6g", o.result.loss_history.back()) << '\n';
        if (!o.held_out.rows.empty()) {
          double worst = 0.0, worst_thd = 0.0;
          for (const auto &r : o.held_out.rows) {
            const SwitchingAngleSet p = predict_angles(model, r.m);
            for (int k = 0; k < p.size(); ++k)
              worst = std::max(worst, std::abs(rad_to_deg(p[k] - r.angles[static_cast<std::size_t>(k)])));
            worst_thd = std::max(worst_thd, 100.0 * (analytic_thd(p, 49) -
                                                     analytic_thd(SwitchingAngleSet::relaxed(r.angles), 49)));
          }
          run.out << "held_out=" << o.held_out.rows.size() << " worst_angle_err_deg=" << fmt("%.4f", worst)
                  << " worst_thd49_penalty_pp=" << fmt("%.4f", worst_thd) << '\n';
        }
      };
    });
  }

  // predict
  std::string pr_model, pr_out;
  double pr_m = 0.0;
  {
    auto *s = sub("predict", "Predict switching angles with a trained network");
    s->add_option("--model", pr_model)->required();
    s->add_option("--m", pr_m)->required();
    s->add_option("--out", pr_out, "prediction JSON (stdout if omitted)");
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        const MlpModel model = model_from_json(csv::read_text(pr_model));
        const SwitchingAngleSet a = predict_angles(model, pr_m);
        ojson j;
        j["m"] = pr_m;
        j["angles_deg"] = a.degrees();
        j["angles_rad"] = std::vector<double>(a.radians().begin(), a.radians().end());
        j["thd49_pct"] = 100.0 * analytic_thd(a, 49);
        if (pr_out.empty())
          run.out << j.dump(2) << '\n';
        else
          run.add(pr_out, j.dump(2) + "\n");
      };
    });
  }

  // simulate
  std::string si_mode = "spwm", si_config, si_angles, si_model, si_h, si_out;
  double si_m = 0.8, si_duration = 0.2, si_rate = 2e5;
  std::optional<double> si_vref;
  PiGains si_gains;
  {
    auto *s = sub("simulate", "Time-domain inverter simulation");
    s->add_option("--mode", si_mode, "spwm, she or pi")->capture_default_str()->check(
        CLI::IsMember({"spwm", "she", "pi"}));
    s->add_option("--config", si_config, "inverter config JSON");
    s->add_option("--m", si_m)->capture_default_str();
    s->add_option("--duration", si_duration, "seconds")->capture_default_str();
    s->add_option("--sample-rate", si_rate)->capture_default_str();
    s->add_option("--angles", si_angles, "she: angles in degrees");
    s->add_option("--model", si_model, "she: network model JSON");
    s->add_option("--harmonics", si_h, "she: orders to eliminate when solving");
    s->add_option("--v-ref", si_vref, "pi: reference RMS voltage");
    s->add_option("--kp", si_gains.kp)->capture_default_str();
    s->add_option("--ki", si_gains.ki)->capture_default_str();
    s->add_option("--m-initial", si_gains.m_initial)->capture_default_str();
    s->add_option("--m-min", si_gains.m_min)->capture_default_str();
    s->add_option("--m-max", si_gains.m_max)->capture_default_str();
    s->add_option("--out", si_out, "trace CSV")->required();
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        const InverterConfig cfg = load_config(si_config);
        SimulationTrace tr;
        if (si_mode == "spwm") {
          tr = simulate_open_loop_spwm(cfg, si_m, si_duration, si_rate);
        } else if (si_mode == "pi") {
          if (!si_vref)
            throw DomainError("pi mode needs --v-ref");
          tr = simulate_closed_loop_pi(cfg, *si_vref, si_gains, si_duration, si_rate);
        } else {
          std::optional<SwitchingAngleSet> angles;
          if (!si_angles.empty()) {
            angles = SwitchingAngleSet::from_degrees(parse_list(si_angles));
          } else if (!si_model.empty()) {
            angles = predict_angles(model_from_json(csv::read_text(si_model)), si_m);
          } else {
            NewtonOptions no;
            no.seed = run.seed;
            const AngleSolution sol = newton_solve(si_m, harmonics_for(si_h, cfg.bridges), std::nullopt, no);
            if (!sol.converged)
              throw NumericalError("no SHE solution at m=" + fmt("%.17g", si_m));
            angles = SwitchingAngleSet::strict(sol.angles);
          }
          tr = simulate_she(cfg, *angles, si_duration, si_rate);
        }
        run.add(si_out, trace_csv(tr));
        run.out << "samples=" << tr.size() << " v_rms=" << fmt("%.6g", rms(tr.voltage))
                << " m_final=" << fmt("%.6g", tr.m.back()) << '\n';
      };
    });
  }

  // spectrum
  std::string sp_in, sp_column = "v_out_V", sp_out;
  double sp_f0 = 50.0;
  int sp_max = 200, sp_thd = 0;
  {
    auto *s = sub("spectrum", "Harmonic spectrum and THD of a trace or waveform CSV");
    s->add_option("--in", sp_in, "trace or waveform CSV")->required();
    s->add_option("--column", sp_column)->capture_default_str();
    s->add_option("--f0", sp_f0)->capture_default_str();
    s->add_option("--max-order", sp_max)->capture_default_str();
    s->add_option("--thd-order", sp_thd, "THD bandwidth (default: max-order)");
    s->add_option("--out", sp_out, "spectrum CSV")->required();
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        const csv::Document doc = csv::read_file(sp_in);
        const std::vector<double> t = series_of(doc, "t_s");
        const std::vector<double> v = series_of(doc, sp_column);
        const HarmonicSpectrum sp = harmonic_spectrum(v, sample_rate_of(t), sp_f0, sp_max);
        const int order = sp_thd > 0 ? sp_thd : sp_max;
        run.add(sp_out, spectrum_csv(sp, order));
        run.out << "h1=" << fmt("%.6g", sp.magnitude(1)) << " thd_pct=" << fmt("%.6g", 100.0 * thd(sp, order))
                << " max_order=" << order << '\n';
      };
    });
  }

  // compare
  CompareOptions co;
  std::string co_config, co_model, co_dir = ".";
  bool co_svg = false;
  {
    auto *s = sub("compare", "Open-loop SPWM vs PI closed loop vs network-angle SHE");
    s->add_option("--config", co_config, "inverter config JSON");
    s->add_option("--m", co.m)->capture_default_str();
    s->add_option("--model", co_model, "network model JSON (default: train one)");
    s->add_option("--v-ref", co.v_ref_rms, "PI reference RMS (default: open-loop RMS at m)");
    s->add_option("--kp", co.gains.kp)->capture_default_str();
    s->add_option("--ki", co.gains.ki)->capture_default_str();
    s->add_option("--cycles", co.cycles, "analyzed cycles")->capture_default_str();
    s->add_option("--pi-duration", co.pi_duration, "seconds")->capture_default_str();
    s->add_option("--out-dir", co_dir)->capture_default_str();
    s->add_flag("--svg", co_svg, "also write waveform and spectrum plots");
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        co.config = load_config(co_config);
        MlpModel model;
        if (!co_model.empty()) {
          model = model_from_json(csv::read_text(co_model));
        } else {
          TrainSetup setup;
          setup.seed = run.seed;
          model = train_from_setup(setup).result.model;
        }
        const std::vector<StrategyResult> rows = compare_strategies(co, model);
        const std::string dir = co_dir.empty() ? "." : co_dir;
        std::filesystem::create_directories(dir);
        run.add(dir + "/compare.csv", compare_csv(rows, run.seed));
        for (const auto &r : rows) {
          const HarmonicSpectrum sp = harmonic_spectrum(r.analyzed, r.trace.sample_rate, r.trace.f0, 200);
          run.add(dir + "/spectrum_" + r.strategy + ".csv", spectrum_csv(sp, 200));
          if (co_svg) {
            const std::size_t tail = r.analyzed.size();
            const auto first = static_cast<std::ptrdiff_t>(r.trace.size() - tail);
            std::vector<double> t(r.trace.time.begin() + first, r.trace.time.end());
            const auto two_cycles = static_cast<std::size_t>(2.0 * r.trace.sample_rate / r.trace.f0);
            run.add(dir + "/waveform_" + r.strategy + ".svg",
                    svg::render(waveform_chart(r.strategy + " output voltage", t, r.analyzed, two_cycles)));
            run.add(dir + "/spectrum_" + r.strategy + ".svg",
                    svg::render(spectrum_chart(r.strategy + " voltage spectrum", sp)));
          }
          run.out << r.strategy << " m=" << fmt("%.6g", r.m) << " thd13=" << fmt("%.4f", 100.0 * r.thd13)
                  << "% thd49=" << fmt("%.4f", 100.0 * r.thd49) << "% thd200=" << fmt("%.4f", 100.0 * r.thd200)
                  << "%\n";
        }
      };
    });
  }

  // plot
  std::string pl_kind = "waveform", pl_in, pl_out;
  double pl_f0 = 50.0;
  double pl_cycles = 2.0;
  {
    auto *s = sub("plot", "Render a CSV artifact as an SVG chart");
    s->add_option("--kind", pl_kind, "waveform, spectrum, angles or thd")
        ->capture_default_str()
        ->check(CLI::IsMember({"waveform", "spectrum", "angles", "thd"}));
    s->add_option("--in", pl_in)->required();
    s->add_option("--f0", pl_f0)->capture_default_str();
    s->add_option("--cycles", pl_cycles, "waveform: cycles shown")->capture_default_str();
    s->add_option("--out", pl_out, "SVG path")->required();
    s->parse_complete_callback([&] {
      action = [&](Run &run) {
        svg::Chart chart;
        if (pl_kind == "waveform") {
          const csv::Document doc = csv::read_file(pl_in);
          const std::vector<double> t = series_of(doc, "t_s");
          const auto n = static_cast<std::size_t>(std::llround(pl_cycles * sample_rate_of(t) / pl_f0));
          chart = waveform_chart("Output voltage", t, series_of(doc, "v_out_V"), n);
        } else if (pl_kind == "spectrum") {
          const csv::Document doc = csv::read_file(pl_in);
          svg::Series sr{"magnitude", series_of(doc, "order"), series_of(doc, "magnitude")};
          chart = {"Voltage spectrum", "harmonic order", "magnitude (V)", {std::move(sr)}};
          chart.bars = true;
        } else {
          const AngleTable table = ingest_angle_table(pl_in);
          std::vector<svg::Series> series(pl_kind == "angles" ? static_cast<std::size_t>(table.bridges) : 1);
          for (std::size_t k = 0; k < series.size(); ++k)
            series[k].label = pl_kind == "angles" ? "theta" + std::to_string(k + 1) : "THD (order 49)";
          for (const auto &row : table.rows) {
            if (row.flagged())
              continue;
            for (std::size_t k = 0; k < series.size(); ++k) {
              series[k].x.push_back(row.m);
              series[k].y.push_back(pl_kind == "angles" ? row.angles_deg[k] : row.thd_pct);
            }
          }
          chart = pl_kind == "angles"
                      ? svg::Chart{"Switching angles", "modulation index", "angle (deg)", std::move(series)}
                      : svg::Chart{"THD", "modulation index", "THD (%)", std::move(series)};
        }
        run.add(pl_out, svg::render(chart));
      };
    });
  }

  // replay
  std::string rp_manifest;
  {
    auto *s = sub("replay", "Re-run the command recorded in a manifest");
    s->add_option("manifest", rp_manifest, "manifest JSON")->required();
    s->parse_complete_callback([&] { action = nullptr; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::Success &e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError &e) {
    print_error(err, "usage", e.what());
    return 2;
  }
  active = app.get_subcommands().front();

  try {
    if (active->get_name() == "replay") {
      const RunManifest m = manifest_from_json(csv::read_text(rp_manifest));
      std::vector<std::string> again = m.argv;
      const bool has_seed = std::any_of(again.begin(), again.end(), [](const std::string &a) {
        return a == "--seed" || a.rfind("--seed=", 0) == 0;
      });
      if (!has_seed) {
        again.push_back("--seed");
        again.push_back(std::to_string(m.seed));
      }
      if (!again.empty() && again.front() == "replay")
        throw DomainError("a manifest cannot replay a replay");
      return run_cli(again, out, err);
    }
    Run run{out, args, resolve_seed(seed_opt), active->get_name(), collect_inputs(*active), {}};
    if (!action)
      throw DomainError("no subcommand action");
    action(run);
    run.commit();
  } catch (const Error &e) {
    print_error(err, e.kind(), e.what());
    return 1;
  } catch (const nlohmann::json::exception &e) {
    print_error(err, "format", e.what());
    return 1;
  } catch (const std::exception &e) {
    print_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

} // namespace sheforge
