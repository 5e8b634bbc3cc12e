#pragma once

#include "sheforge/ann.hpp"
#include "sheforge/angle_table.hpp"
#include "sheforge/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sheforge {

/// Runs one subcommand. Exit codes: 0 success, 1 domain or numerical error
/// (one "error kind=... message=..." line on err), 2 usage error.
/// args excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Seed resolution: explicit value, else SHEFORGE_SEED, else kDefaultSeed.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed);

struct TrainSetup {
  HarmonicSet hset = HarmonicSet::default_set();
  double m_from = 0.55;
  double m_to = 0.92;
  double m_step = 0.005;
  Branch branch = Branch::upper;
  int hidden = kDefaultHidden;
  int epochs = kDefaultEpochs;
  double learning_rate = kDefaultLearningRate;
  int holdout_every = 0; // withhold every k-th branch row when > 0
  std::uint64_t seed = 42;
};

struct TrainOutcome {
  AngleTable sweep;
  TrainingDataset train_rows;
  TrainingDataset held_out;
  TrainResult result;
};

/// Sweep, branch selection, hold-out split and training in one call.
TrainOutcome train_from_setup(const TrainSetup &setup, const AngleTable *table = nullptr);

struct StrategyResult {
  std::string strategy;
  double m = 0.0; // modulation index in force at the end of the run
  double thd13 = 0.0, thd49 = 0.0, thd200 = 0.0; // fractions
  double v1_peak = 0.0;
  double v_rms = 0.0;
  SimulationTrace trace;
  std::vector<double> analyzed; // cycle-exact samples the THD was taken from
};

struct CompareOptions {
  InverterConfig config;
  double m = 0.9;
  PiGains gains;
  std::optional<double> v_ref_rms; // defaults to the open-loop RMS at m
  int cycles = 10;                 // analyzed cycles per strategy
  double pi_duration = 1.0;        // seconds
  double sample_rate = 2e5;
};

/// Open-loop SPWM, PI closed loop and SHE with network angles at the same
/// operating point.
std::vector<StrategyResult> compare_strategies(const CompareOptions &opt, const MlpModel &model);

std::string compare_csv(const std::vector<StrategyResult> &rows, std::uint64_t seed);

} // namespace sheforge
