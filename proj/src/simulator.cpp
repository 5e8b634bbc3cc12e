#include "sheforge/simulator.hpp"

#include "sheforge/csv.hpp"
#include "sheforge/error.hpp"
#include "sheforge/kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sheforge {

namespace {

struct Grid {
  std::int64_t per_cycle = 0;
  std::int64_t cycles = 0;
  std::int64_t samples() const { return per_cycle * cycles; }
};

bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

Grid make_grid(const InverterConfig &c, double duration, double sample_rate) {
  if (!(duration > 0.0))
    throw DomainError("duration must be positive");
  const double cycles = duration * c.f0;
  if (!near_integer(cycles) || std::round(cycles) < 1.0)
    throw DomainError("duration must span an integer number of fundamental cycles");
  const double per_cycle = sample_rate / c.f0;
  if (!near_integer(per_cycle))
    throw DomainError("sample_rate must be an integer multiple of f0");
  return {std::llround(per_cycle), std::llround(cycles)};
}

// Output voltage for a signed level: the first |level| bridges conduct.
double level_voltage(const InverterConfig &c, int level) {
  if (c.equal_sources())
    return level * c.vdc.front();
  const int n = std::abs(level);
  double v = 0.0;
  for (int k = 0; k < n; ++k)
    v += c.vdc[static_cast<std::size_t>(k)];
  return level < 0 ? -v : v;
}

SimulationTrace make_trace(const InverterConfig &c, double sample_rate, std::size_t n) {
  SimulationTrace tr;
  tr.sample_rate = sample_rate;
  tr.f0 = c.f0;
  tr.load_resistance = c.load_resistance;
  tr.time.resize(n);
  tr.voltage.resize(n);
  tr.current.resize(n);
  tr.level.resize(n);
  tr.m.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    tr.time[i] = static_cast<double>(i) / sample_rate;
  return tr;
}

void fill_from_levels(const InverterConfig &c, SimulationTrace &tr, std::size_t first, std::size_t count,
                      double m) {
  for (std::size_t i = first; i < first + count; ++i) {
    tr.voltage[i] = level_voltage(c, tr.level[i]);
    tr.current[i] = tr.voltage[i] / c.load_resistance;
    tr.m[i] = m;
  }
}

void check_spwm_rate(const InverterConfig &c, double sample_rate) {
  if (sample_rate < 20.0 * c.carrier_freq)
    throw DomainError("sample_rate must be at least 20 * carrier_freq");
}

kernels::PdCarrierParams carrier_params(const InverterConfig &c, double m, double sample_rate) {
  return {m, c.bridges, c.f0, c.carrier_freq, sample_rate};
}

} // namespace

void InverterConfig::validate() const {
  if (bridges < 1)
    throw DomainError("bridges must be >= 1");
  if (static_cast<int>(vdc.size()) != bridges)
    throw DomainError("vdc must list one voltage per bridge");
  for (double v : vdc)
    if (!(v > 0.0))
      throw DomainError("every vdc must be positive");
  if (!(f0 > 0.0))
    throw DomainError("f0 must be positive");
  if (!(carrier_freq > 2.0 * f0))
    throw DomainError("carrier_freq must exceed 2 * f0");
  if (!(load_resistance > 0.0))
    throw DomainError("load_resistance must be positive");
}

double InverterConfig::total_vdc() const { return std::accumulate(vdc.begin(), vdc.end(), 0.0); }

bool InverterConfig::equal_sources() const {
  return std::all_of(vdc.begin(), vdc.end(), [&](double v) { return v == vdc.front(); });
}

InverterConfig config_from_json(const std::string &text) {
  InverterConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("s"))
      c.bridges = j.at("s").get<int>();
    if (j.contains("bridges"))
      c.bridges = j.at("bridges").get<int>();
    if (j.contains("vdc")) {
      const auto &v = j.at("vdc");
      if (v.is_array())
        c.vdc = v.get<std::vector<double>>();
      else
        c.vdc.assign(static_cast<std::size_t>(std::max(c.bridges, 0)), v.get<double>());
    } else {
      c.vdc.assign(static_cast<std::size_t>(std::max(c.bridges, 0)), 10.0);
    }
    if (j.contains("f0"))
      c.f0 = j.at("f0").get<double>();
    if (j.contains("carrier_freq"))
      c.carrier_freq = j.at("carrier_freq").get<double>();
    if (j.contains("load_resistance"))
      c.load_resistance = j.at("load_resistance").get<double>();
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("bad inverter config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const InverterConfig &c) {
  nlohmann::ordered_json j;
  j["s"] = c.bridges;
  j["vdc"] = c.vdc;
  j["f0"] = c.f0;
  j["carrier_freq"] = c.carrier_freq;
  j["load_resistance"] = c.load_resistance;
  return j.dump(2) + "\n";
}

void PiGains::validate() const {
  if (!(m_min < m_max) || m_min < 0.0 || m_max > 1.0)
    throw DomainError("PI limits need 0 <= m_min < m_max <= 1");
  if (!std::isfinite(kp) || !std::isfinite(ki))
    throw DomainError("PI gains must be finite");
}

std::vector<double> SimulationTrace::tail_cycles(int n_cycles) const {
  const auto per_cycle = static_cast<std::size_t>(std::llround(sample_rate / f0));
  const std::size_t n = per_cycle * static_cast<std::size_t>(n_cycles);
  if (n_cycles < 1 || n > voltage.size())
    throw DomainError("trace is shorter than the requested number of cycles");
  return {voltage.end() - static_cast<std::ptrdiff_t>(n), voltage.end()};
}

double rms(std::span<const double> x) {
  if (x.empty())
    return 0.0;
  double sq = 0.0;
  for (double v : x)
    sq += v * v;
  return std::sqrt(sq / static_cast<double>(x.size()));
}

std::string trace_csv(const SimulationTrace &tr) {
  std::ostringstream out;
  out << "t_s,v_out_V,i_out_A,level,m\n";
  for (std::size_t i = 0; i < tr.size(); ++i)
    out << csv::format_double(tr.time[i]) << ',' << csv::format_double(tr.voltage[i]) << ','
        << csv::format_double(tr.current[i]) << ',' << tr.level[i] << ',' << csv::format_double(tr.m[i]) << '\n';
  return out.str();
}

SimulationTrace parse_trace_csv(const std::string &text, double f0) {
  std::istringstream in(text);
  const csv::Document doc = csv::read(in);
  auto col = [&](const std::string &name) -> int {
    const auto it = std::find(doc.header.begin(), doc.header.end(), name);
    return it == doc.header.end() ? -1 : static_cast<int>(it - doc.header.begin());
  };
  const int ct = col("t_s"), cv = col("v_out_V");
  if (ct < 0 || cv < 0)
    throw FormatError("trace CSV needs t_s and v_out_V columns");
  const int ci = col("i_out_A"), cl = col("level"), cm = col("m");

  SimulationTrace tr;
  tr.f0 = f0;
  for (const auto &row : doc.rows) {
    auto get = [&](int c) {
      double v = 0.0;
      if (c < 0)
        return 0.0;
      if (static_cast<std::size_t>(c) >= row.size() || !csv::parse_double(row[static_cast<std::size_t>(c)], v))
        throw FormatError("bad numeric cell in trace CSV");
      return v;
    };
    tr.time.push_back(get(ct));
    tr.voltage.push_back(get(cv));
    tr.current.push_back(get(ci));
    tr.level.push_back(static_cast<int>(get(cl)));
    tr.m.push_back(get(cm));
  }
  if (tr.time.size() < 2)
    throw FormatError("trace CSV needs at least two samples");
  tr.sample_rate = 1.0 / (tr.time[1] - tr.time[0]);
  // Snap to the nearest integer rate; timestamps carry 17 digits.
  tr.sample_rate = std::round(tr.sample_rate * 1e6) / 1e6;
  return tr;
}

int spwm_level(double m, double t, const InverterConfig &config) {
  if (!(m >= 0.0 && m <= 1.0))
    throw DomainError("modulation index must lie in [0, 1]");
  const double rp = config.f0 * t - std::floor(config.f0 * t);
  const double cp = config.carrier_freq * t - std::floor(config.carrier_freq * t);
  return kernels::pd_spwm_level(m, config.bridges, rp, cp);
}

SimulationTrace simulate_open_loop_spwm(const InverterConfig &config, double m, double duration,
                                        double sample_rate) {
  config.validate();
  if (!(m >= 0.0 && m <= 1.0))
    throw DomainError("modulation index must lie in [0, 1]");
  check_spwm_rate(config, sample_rate);
  const Grid g = make_grid(config, duration, sample_rate);
  SimulationTrace tr = make_trace(config, sample_rate, static_cast<std::size_t>(g.samples()));
  kernels::pd_spwm_levels(carrier_params(config, m, sample_rate), 0, tr.level);
  fill_from_levels(config, tr, 0, tr.size(), m);
  return tr;
}

SimulationTrace simulate_she(const InverterConfig &config, const SwitchingAngleSet &angles, double duration,
                             double sample_rate) {
  config.validate();
  if (!angles.is_strict())
    throw DomainError("SHE gating requires strictly ordered interior angles");
  if (angles.size() != config.bridges)
    throw DomainError("one switching angle per bridge is required");
  if (sample_rate < 200.0 * config.f0)
    throw DomainError("sample_rate must be at least 200 * f0");
  const Grid g = make_grid(config, duration, sample_rate);
  SimulationTrace tr = make_trace(config, sample_rate, static_cast<std::size_t>(g.samples()));
  kernels::staircase_levels(angles.radians(), static_cast<double>(g.per_cycle), 0, tr.level);
  double cos_sum = 0.0;
  for (double a : angles.radians())
    cos_sum += std::cos(a);
  fill_from_levels(config, tr, 0, tr.size(), cos_sum / config.bridges);
  return tr;
}

SimulationTrace simulate_closed_loop_pi(const InverterConfig &config, double v_ref_rms, const PiGains &gains,
                                        double duration, double sample_rate) {
  config.validate();
  gains.validate();
  if (!(v_ref_rms >= 0.0))
    throw DomainError("v_ref_rms must be >= 0");
  check_spwm_rate(config, sample_rate);
  const Grid g = make_grid(config, duration, sample_rate);
  SimulationTrace tr = make_trace(config, sample_rate, static_cast<std::size_t>(g.samples()));

  const double period = 1.0 / config.f0;
  const auto per = static_cast<std::size_t>(g.per_cycle);
  double m = std::clamp(gains.m_initial, gains.m_min, gains.m_max);
  double e_prev = 0.0;
  for (std::int64_t c = 0; c < g.cycles; ++c) {
    const std::size_t first = static_cast<std::size_t>(c) * per;
    std::span<int> lv(tr.level.data() + first, per);
    kernels::pd_spwm_levels(carrier_params(config, m, sample_rate), static_cast<std::int64_t>(first), lv);
    fill_from_levels(config, tr, first, per, m);

    const double v_rms = rms(std::span<const double>(tr.voltage.data() + first, per));
    const double e = v_ref_rms - v_rms;
    m = std::clamp(m + gains.kp * (e - e_prev) + gains.ki * period * e, gains.m_min, gains.m_max);
    e_prev = e;
  }
  return tr;
}

} // namespace sheforge
