#pragma once

#include "sheforge/she_solver.hpp"

#include <string>
#include <vector>

namespace sheforge {

struct AngleRow {
  double m = 0.0;
  std::vector<double> angles_deg;
  double thd_pct = 0.0;
  std::vector<std::string> flags; // empty for a clean row

  bool flagged() const { return !flags.empty(); }
  friend bool operator==(const AngleRow &, const AngleRow &) = default;
};

/// Rows of (m, angles in degrees, THD %). The layout of the published
/// MI/angle/THD table and of sweep output alike.
struct AngleTable {
  int bridges = 0;
  std::vector<AngleRow> rows;

  friend bool operator==(const AngleTable &, const AngleTable &) = default;
};

// Row flag tags.
namespace flag {
inline constexpr const char *kNotConverged = "not_converged";
inline constexpr const char *kBadCell = "bad_numeric_cell";
inline constexpr const char *kColumnCount = "column_count";
inline constexpr const char *kMOutOfRange = "m_out_of_range";
inline constexpr const char *kMNotIncreasing = "m_not_increasing";
inline constexpr const char *kAngleOrder = "angle_invariant";
inline constexpr const char *kElimination = "elimination_not_satisfied";
inline constexpr const char *kFundamental = "fundamental_mismatch";
inline constexpr const char *kThdMismatch = "thd_mismatch";
} // namespace flag

struct SweepOptions {
  NewtonOptions newton;
  int thd_order = 49;
};

/// Continuation sweep over m_start, m_start + step, ..., m_end. Each solve is
/// seeded with the previous converged angles; points that fail every restart
/// keep their best iterate and carry the not_converged flag.
AngleTable sweep_solutions(double m_start, double m_end, double step, const HarmonicSet &hset,
                           const SweepOptions &opt = {});

// Number of grid points a sweep over [m_start, m_end] produces.
int sweep_point_count(double m_start, double m_end, double step);

struct RowAudit {
  std::size_t row = 0;
  double m = 0.0;
  std::vector<double> residuals; // empty if the row could not be evaluated
  double thd_pct_recomputed = 0.0;
  double thd_pct_stored = 0.0;
  std::vector<std::string> flags;
};

struct AuditReport {
  std::string harmonics;
  double tolerance = 0.0;
  std::vector<RowAudit> rows;

  std::size_t flagged_rows() const;
};

/// Recomputes residuals and order-49 THD for every row. Problems become row
/// flags; nothing here throws for bad data.
AuditReport audit_table(const AngleTable &table, const HarmonicSet &hset, double tol = 1e-9,
                        int thd_order = 49);

// Angle-table CSV: m,theta1_deg,...,thetaS_deg,thd_pct
std::string angle_table_csv(const AngleTable &table);
AngleTable parse_angle_table(const std::string &text);
AngleTable ingest_angle_table(const std::string &path);

std::string audit_json(const AuditReport &report);

} // namespace sheforge
