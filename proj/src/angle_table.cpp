#include "sheforge/angle_table.hpp"

#include "sheforge/csv.hpp"
#include "sheforge/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sheforge {

namespace {

void add_flag(std::vector<std::string> &flags, const char *f) {
  if (std::find(flags.begin(), flags.end(), f) == flags.end())
    flags.emplace_back(f);
}

double thd_pct_or_nan(const std::vector<double> &radians, int order) {
  try {
    return 100.0 * analytic_thd(SwitchingAngleSet::relaxed(radians), order);
  } catch (const Error &) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<double> to_radians(const std::vector<double> &deg) {
  std::vector<double> r;
  r.reserve(deg.size());
  for (double d : deg)
    r.push_back(deg_to_rad(d));
  return r;
}

} // namespace

int sweep_point_count(double m_start, double m_end, double step) {
  if (!(step > 0.0))
    throw DomainError("sweep step must be positive");
  if (m_end < m_start)
    return 0;
  return static_cast<int>(std::floor((m_end - m_start) / step + 1e-9)) + 1;
}

AngleTable sweep_solutions(double m_start, double m_end, double step, const HarmonicSet &hset,
                           const SweepOptions &opt) {
  const int count = sweep_point_count(m_start, m_end, step);
  if (count > 0 && (!(m_start > 0.0) || !(m_end < 1.0)))
    throw InfeasibleError("sweep range must lie inside (0, 1)");

  AngleTable table;
  table.bridges = hset.bridges();
  std::optional<std::vector<double>> seed;
  for (int i = 0; i < count; ++i) {
    const double m = std::round((m_start + i * step) * 1e12) / 1e12;
    AngleSolution sol = newton_solve(m, hset, seed, opt.newton);
    AngleRow row;
    row.m = m;
    for (double a : sol.angles)
      row.angles_deg.push_back(rad_to_deg(a));
    row.thd_pct = thd_pct_or_nan(sol.angles, opt.thd_order);
    if (sol.converged)
      seed = sol.angles;
    else
      row.flags.emplace_back(flag::kNotConverged);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::size_t AuditReport::flagged_rows() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const RowAudit &r) { return !r.flags.empty(); }));
}

AuditReport audit_table(const AngleTable &table, const HarmonicSet &hset, double tol, int thd_order) {
  AuditReport rep;
  rep.harmonics = hset.to_string();
  rep.tolerance = tol;
  double last_m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const AngleRow &row = table.rows[i];
    RowAudit a;
    a.row = i + 1;
    a.m = row.m;
    a.thd_pct_stored = row.thd_pct;
    a.thd_pct_recomputed = std::numeric_limits<double>::quiet_NaN();
    a.flags = row.flags;

    const bool m_ok = std::isfinite(row.m) && row.m > 0.0 && row.m <= 1.0;
    if (!m_ok) {
      add_flag(a.flags, flag::kMOutOfRange);
    } else {
      if (!(row.m > last_m))
        add_flag(a.flags, flag::kMNotIncreasing);
      last_m = row.m;
    }

    const std::vector<double> rad = to_radians(row.angles_deg);
    if (static_cast<int>(rad.size()) != hset.bridges()) {
      add_flag(a.flags, flag::kColumnCount);
    } else if (std::all_of(rad.begin(), rad.end(), [](double v) { return std::isfinite(v); })) {
      if (!SwitchingAngleSet::satisfies_strict(rad))
        add_flag(a.flags, flag::kAngleOrder);
      a.residuals = residual_vector(rad, std::isfinite(row.m) ? row.m : 0.0, hset);
      if (m_ok && std::abs(a.residuals[0]) >= tol)
        add_flag(a.flags, flag::kFundamental);
      for (std::size_t k = 1; k < a.residuals.size(); ++k)
        if (std::abs(a.residuals[k]) >= tol)
          add_flag(a.flags, flag::kElimination);
      a.thd_pct_recomputed = thd_pct_or_nan(rad, thd_order);
      if (!(std::abs(a.thd_pct_recomputed - row.thd_pct) <= 1e-6))
        add_flag(a.flags, flag::kThdMismatch);
    } else {
      add_flag(a.flags, flag::kBadCell);
    }
    rep.rows.push_back(std::move(a));
  }
  return rep;
}

std::string angle_table_csv(const AngleTable &table) {
  std::ostringstream out;
  out << "m";
  for (int k = 1; k <= table.bridges; ++k)
    out << ",theta" << k << "_deg";
  out << ",thd_pct\n";
  for (const auto &row : table.rows) {
    out << csv::format_double(row.m);
    for (double d : row.angles_deg)
      out << ',' << csv::format_double(d);
    out << ',' << csv::format_double(row.thd_pct) << '\n';
  }
  return out.str();
}

AngleTable parse_angle_table(const std::string &text) {
  std::istringstream in(text);
  const csv::Document doc = csv::read(in);
  const auto &h = doc.header;
  const int s = static_cast<int>(h.size()) - 2;
  bool ok = s >= 1 && h.front() == "m" && h.back() == "thd_pct";
  for (int k = 1; ok && k <= s; ++k)
    ok = h[static_cast<std::size_t>(k)] == "theta" + std::to_string(k) + "_deg";
  if (!ok)
    throw FormatError("angle table header must be m,theta1_deg,...,thetaS_deg,thd_pct");

  AngleTable table;
  table.bridges = s;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double last_m = -std::numeric_limits<double>::infinity();
  for (const auto &cells : doc.rows) {
    AngleRow row;
    if (static_cast<int>(cells.size()) != s + 2)
      add_flag(row.flags, flag::kColumnCount);
    auto cell = [&](std::size_t i) {
      double v = nan;
      if (i >= cells.size() || !csv::parse_double(cells[i], v)) {
        add_flag(row.flags, flag::kBadCell);
        return nan;
      }
      return v;
    };
    row.m = cell(0);
    for (int k = 1; k <= s; ++k)
      row.angles_deg.push_back(cell(static_cast<std::size_t>(k)));
    row.thd_pct = cell(static_cast<std::size_t>(s + 1));

    if (std::isfinite(row.m)) {
      if (!(row.m > 0.0 && row.m <= 1.0)) {
        add_flag(row.flags, flag::kMOutOfRange);
      } else {
        if (!(row.m > last_m))
          add_flag(row.flags, flag::kMNotIncreasing);
        last_m = row.m;
      }
    }
    const std::vector<double> rad = to_radians(row.angles_deg);
    if (std::all_of(rad.begin(), rad.end(), [](double v) { return std::isfinite(v); }) &&
        !SwitchingAngleSet::satisfies_strict(rad))
      add_flag(row.flags, flag::kAngleOrder);
    table.rows.push_back(std::move(row));
  }
  return table;
}

AngleTable ingest_angle_table(const std::string &path) {
  return parse_angle_table(csv::read_text(path));
}

std::string audit_json(const AuditReport &report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["harmonics"] = report.harmonics;
  j["tolerance"] = report.tolerance;
  j["flagged_rows"] = report.flagged_rows();
  ordered_json rows = ordered_json::array();
  for (const auto &r : report.rows) {
    ordered_json o;
    o["row"] = r.row;
    o["m"] = std::isfinite(r.m) ? ordered_json(r.m) : ordered_json(nullptr);
    o["residuals"] = r.residuals;
    o["thd_pct_stored"] = std::isfinite(r.thd_pct_stored) ? ordered_json(r.thd_pct_stored) : ordered_json(nullptr);
    o["thd_pct_recomputed"] =
        std::isfinite(r.thd_pct_recomputed) ? ordered_json(r.thd_pct_recomputed) : ordered_json(nullptr);
    o["flags"] = r.flags;
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

} // namespace sheforge
