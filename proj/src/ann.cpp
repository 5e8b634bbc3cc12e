#include "sheforge/ann.hpp"

#include "sheforge/angle_table.hpp"
#include "sheforge/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace sheforge {

namespace {

constexpr double kEdge = 1e-6;

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

void check_model(const MlpModel &model) {
  const auto &ls = model.layer_sizes;
  if (ls.size() < 2)
    throw DomainError("network needs at least two layers");
  if (model.weights.size() != ls.size() - 1 || model.biases.size() != ls.size() - 1)
    throw DomainError("weight/bias layer count does not match layer_sizes");
  for (std::size_t l = 0; l + 1 < ls.size(); ++l) {
    if (model.weights[l].size() != idx(ls[l]) * idx(ls[l + 1]) || model.biases[l].size() != idx(ls[l + 1]))
      throw DomainError("layer " + std::to_string(l) + " dimensions do not chain");
  }
}

void check_input(const MlpModel &model, std::span<const double> input) {
  if (static_cast<int>(input.size()) != model.inputs())
    throw DomainError("input length " + std::to_string(input.size()) + " does not match first layer " +
                      std::to_string(model.inputs()));
}

// Preallocated activations, deltas and gradient buffers for one model shape.
struct Workspace {
  std::vector<std::vector<double>> a;     // a[0] input, a[l+1] output of layer l
  std::vector<std::vector<double>> delta; // delta[l] dLoss/dz for layer l
  std::vector<std::vector<double>> gw, gb;

  explicit Workspace(const MlpModel &model) {
    a.emplace_back(idx(model.inputs()));
    for (int l = 0; l < model.layers(); ++l) {
      a.emplace_back(idx(model.layer_sizes[idx(l + 1)]));
      delta.emplace_back(idx(model.layer_sizes[idx(l + 1)]));
      gw.emplace_back(model.weights[idx(l)].size());
      gb.emplace_back(model.biases[idx(l)].size());
    }
  }

  const std::vector<double> &run(const MlpModel &model, std::span<const double> input) {
    check_input(model, input);
    std::copy(input.begin(), input.end(), a[0].begin());
    const int L = model.layers();
    for (int l = 0; l < L; ++l) {
      const int in = model.layer_sizes[idx(l)];
      const int out = model.layer_sizes[idx(l + 1)];
      const auto &w = model.weights[idx(l)];
      const auto &prev = a[idx(l)];
      auto &z = a[idx(l + 1)];
      for (int j = 0; j < out; ++j) {
        double acc = model.biases[idx(l)][idx(j)];
        const double *row = w.data() + j * in;
        for (int i = 0; i < in; ++i)
          acc += row[i] * prev[idx(i)];
        z[idx(j)] = l + 1 < L ? std::tanh(acc) : acc;
      }
    }
    return a.back();
  }

  double loss(const MlpModel &model, std::span<const double> input, std::span<const double> target) {
    const auto &y = run(model, input);
    double sq = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k)
      sq += (y[k] - target[k]) * (y[k] - target[k]);
    return sq / static_cast<double>(y.size());
  }

  void zero_gradients() {
    for (auto &g : gw)
      std::fill(g.begin(), g.end(), 0.0);
    for (auto &g : gb)
      std::fill(g.begin(), g.end(), 0.0);
  }

  // Adds scale * dLoss/dparam for one sample, loss = mean_k (y_k - t_k)^2,
  // and returns that sample's loss.
  double accumulate(const MlpModel &model, std::span<const double> input, std::span<const double> target,
                    double scale) {
    const auto &y = run(model, input);
    const int L = model.layers();
    const int out = model.outputs();
    double sq = 0.0;
    for (int k = 0; k < out; ++k) {
      const double e = y[idx(k)] - target[idx(k)];
      sq += e * e;
      delta[idx(L - 1)][idx(k)] = 2.0 * e / out;
    }

    for (int l = L - 1; l >= 0; --l) {
      const int in = model.layer_sizes[idx(l)];
      const int o = model.layer_sizes[idx(l + 1)];
      const auto &prev = a[idx(l)];
      const auto &d = delta[idx(l)];
      for (int j = 0; j < o; ++j) {
        const double dj = scale * d[idx(j)];
        gb[idx(l)][idx(j)] += dj;
        double *row = gw[idx(l)].data() + j * in;
        for (int i = 0; i < in; ++i)
          row[i] += dj * prev[idx(i)];
      }
      if (l == 0)
        break;
      const auto &w = model.weights[idx(l)];
      auto &next = delta[idx(l - 1)];
      for (int i = 0; i < in; ++i) {
        double acc = 0.0;
        for (int j = 0; j < o; ++j)
          acc += w[idx(j * in + i)] * d[idx(j)];
        // prev holds the tanh outputs of layer l-1.
        next[idx(i)] = acc * (1.0 - prev[idx(i)] * prev[idx(i)]);
      }
    }
    return sq / out;
  }
};

double sample_loss(const MlpModel &model, std::span<const double> input, std::span<const double> target) {
  Workspace ws(model);
  return ws.loss(model, input, target);
}

std::vector<double> normalized_input(const MlpModel &model, double m) {
  return {(m - model.input_offset) / model.input_scale};
}

std::vector<double> normalized_target(const MlpModel &model, std::span<const double> angles) {
  std::vector<double> t(angles.size());
  for (std::size_t k = 0; k < angles.size(); ++k)
    t[k] = (angles[k] - model.output_offset[k]) / model.output_scale[k];
  return t;
}

void check_normalization(const MlpModel &model) {
  if (!(model.input_scale != 0.0) || static_cast<int>(model.output_scale.size()) != model.outputs() ||
      model.output_offset.size() != model.output_scale.size())
    throw DomainError("model normalization is incomplete");
  for (double s : model.output_scale)
    if (!(s != 0.0))
      throw DomainError("output normalization scale is zero");
}

} // namespace

Branch parse_branch(const std::string &text) {
  if (text == "upper")
    return Branch::upper;
  if (text == "longest")
    return Branch::longest;
  if (text == "all")
    return Branch::all;
  throw DomainError("unknown branch '" + text + "' (upper, longest, all)");
}

TrainingDataset dataset_from_table(const AngleTable &table, Branch branch) {
  // Runs of consecutive clean rows.
  std::vector<std::vector<std::size_t>> runs;
  bool open = false;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].flagged()) {
      open = false;
      continue;
    }
    if (!open)
      runs.emplace_back();
    runs.back().push_back(i);
    open = true;
  }

  std::vector<std::size_t> chosen;
  if (branch == Branch::all) {
    for (const auto &r : runs)
      chosen.insert(chosen.end(), r.begin(), r.end());
  } else if (!runs.empty()) {
    auto pick = runs.begin();
    for (auto it = runs.begin(); it != runs.end(); ++it) {
      if (branch == Branch::longest ? it->size() > pick->size()
                                    : table.rows[it->back()].m > table.rows[pick->back()].m)
        pick = it;
    }
    chosen = *pick;
  }

  TrainingDataset d;
  for (std::size_t i : chosen) {
    TrainingSample s{table.rows[i].m, {}};
    for (double deg : table.rows[i].angles_deg)
      s.angles.push_back(deg_to_rad(deg));
    d.rows.push_back(std::move(s));
  }
  return d;
}

void validate_dataset(const TrainingDataset &data) {
  if (data.rows.empty())
    throw DomainError("training dataset is empty");
  const auto s = data.rows.front().angles.size();
  std::vector<double> ms;
  for (const auto &r : data.rows) {
    if (r.angles.size() != s || s == 0)
      throw DomainError("training rows disagree on the number of angles");
    ms.push_back(r.m);
  }
  std::sort(ms.begin(), ms.end());
  if (std::adjacent_find(ms.begin(), ms.end()) != ms.end())
    throw DomainError("training dataset has duplicate m values");
}

MlpModel init_mlp(std::span<const int> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw DomainError("network needs at least two layers");
  for (int n : layer_sizes)
    if (n < 1)
      throw DomainError("layer sizes must be >= 1");
  MlpModel m;
  m.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  m.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double lim = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-lim, lim);
    std::vector<double> w(idx(in) * idx(out));
    for (double &v : w)
      v = dist(rng);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(idx(out), 0.0);
  }
  m.output_offset.assign(idx(m.outputs()), 0.0);
  m.output_scale.assign(idx(m.outputs()), 1.0);
  return m;
}

MlpModel prepare_model(std::span<const int> layer_sizes, const TrainingDataset &data, std::uint64_t seed) {
  validate_dataset(data);
  if (layer_sizes.empty() || layer_sizes.front() != 1 || layer_sizes.back() != data.outputs())
    throw DomainError("layer sizes must start at 1 and end at the number of angles");
  MlpModel m = init_mlp(layer_sizes, seed);
  auto [lo, hi] = std::minmax_element(data.rows.begin(), data.rows.end(),
                                      [](const auto &a, const auto &b) { return a.m < b.m; });
  m.train_lo = lo->m;
  m.train_hi = hi->m;
  m.input_offset = 0.5 * (m.train_lo + m.train_hi);
  m.input_scale = m.train_hi > m.train_lo ? 0.5 * (m.train_hi - m.train_lo) : 1.0;
  for (int k = 0; k < m.outputs(); ++k) {
    double a_lo = data.rows.front().angles[idx(k)];
    double a_hi = a_lo;
    for (const auto &r : data.rows) {
      a_lo = std::min(a_lo, r.angles[idx(k)]);
      a_hi = std::max(a_hi, r.angles[idx(k)]);
    }
    m.output_offset[idx(k)] = 0.5 * (a_lo + a_hi);
    m.output_scale[idx(k)] = a_hi > a_lo ? 0.5 * (a_hi - a_lo) : kHalfPi;
  }
  return m;
}

std::vector<double> forward(const MlpModel &model, std::span<const double> input) {
  check_model(model);
  Workspace ws(model);
  return ws.run(model, input);
}

double normalized_mse(const MlpModel &model, const TrainingDataset &data) {
  double sum = 0.0;
  for (const auto &r : data.rows)
    sum += sample_loss(model, normalized_input(model, r.m), normalized_target(model, r.angles));
  return sum / static_cast<double>(data.rows.size());
}

double angle_mse(const MlpModel &model, const TrainingDataset &data) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto &r : data.rows) {
    const auto y = forward(model, normalized_input(model, r.m));
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double angle = model.output_offset[k] + model.output_scale[k] * y[k];
      const double e = (angle - r.angles[k]) / kHalfPi;
      sum += e * e;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

TrainResult train(MlpModel model, const TrainingDataset &data, int epochs, double learning_rate) {
  if (!(learning_rate > 0.0))
    throw DomainError("learning rate must be positive");
  if (epochs < 0)
    throw DomainError("epochs must be >= 0");
  validate_dataset(data);
  check_model(model);
  check_normalization(model);
  if (data.outputs() != model.outputs())
    throw DomainError("dataset angle count does not match the output layer");

  std::vector<std::vector<double>> inputs, targets;
  for (const auto &r : data.rows) {
    inputs.push_back(normalized_input(model, r.m));
    targets.push_back(normalized_target(model, r.angles));
  }
  const double inv_n = 1.0 / static_cast<double>(data.rows.size());

  Workspace ws(model);
  auto loss = [&] {
    double sum = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      sum += ws.loss(model, inputs[i], targets[i]);
    return sum * inv_n;
  };

  TrainResult res;
  res.loss_history.reserve(idx(epochs) + 1);
  // Each epoch's forward pass yields the loss before its update; the final
  // entry needs one extra pass.
  for (int e = 0; e < epochs; ++e) {
    ws.zero_gradients();
    double sum = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      sum += ws.accumulate(model, inputs[i], targets[i], inv_n);
    res.loss_history.push_back(sum * inv_n);
    for (int l = 0; l < model.layers(); ++l) {
      auto &w = model.weights[idx(l)];
      auto &b = model.biases[idx(l)];
      for (std::size_t k = 0; k < w.size(); ++k)
        w[k] -= learning_rate * ws.gw[idx(l)][k];
      for (std::size_t k = 0; k < b.size(); ++k)
        b[k] -= learning_rate * ws.gb[idx(l)][k];
    }
  }
  res.loss_history.push_back(loss());
  res.model = std::move(model);
  return res;
}

std::vector<double> backprop_gradient(const MlpModel &model, std::span<const double> input,
                                      std::span<const double> target) {
  check_model(model);
  if (static_cast<int>(target.size()) != model.outputs())
    throw DomainError("target length does not match output layer");
  Workspace ws(model);
  ws.accumulate(model, input, target, 1.0);
  std::vector<double> flat;
  for (int l = 0; l < model.layers(); ++l) {
    flat.insert(flat.end(), ws.gw[idx(l)].begin(), ws.gw[idx(l)].end());
    flat.insert(flat.end(), ws.gb[idx(l)].begin(), ws.gb[idx(l)].end());
  }
  return flat;
}

double gradient_check(const MlpModel &model, std::span<const double> input, std::span<const double> target,
                      double epsilon) {
  if (!(epsilon > 0.0))
    throw DomainError("epsilon must be positive");
  const std::vector<double> analytic = backprop_gradient(model, input, target);
  MlpModel probe = model;
  std::vector<double *> params;
  for (int l = 0; l < probe.layers(); ++l) {
    for (double &w : probe.weights[idx(l)])
      params.push_back(&w);
    for (double &b : probe.biases[idx(l)])
      params.push_back(&b);
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = *params[p];
    *params[p] = saved + epsilon;
    const double up = sample_loss(probe, input, target);
    *params[p] = saved - epsilon;
    const double down = sample_loss(probe, input, target);
    *params[p] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
  }
  return worst;
}

SwitchingAngleSet predict_angles(const MlpModel &model, double m) {
  check_model(model);
  check_normalization(model);
  const double slack = 1e-9 * std::max(1.0, std::abs(model.train_hi));
  if (!(m >= model.train_lo - slack && m <= model.train_hi + slack))
    throw ExtrapolationError("m = " + std::to_string(m) + " outside training range [" +
                             std::to_string(model.train_lo) + ", " + std::to_string(model.train_hi) + "]");
  const auto y = forward(model, normalized_input(model, m));
  std::vector<double> a(y.size());
  for (std::size_t k = 0; k < y.size(); ++k)
    a[k] = model.output_offset[k] + model.output_scale[k] * y[k];
  for (double &v : a)
    if (!std::isfinite(v))
      throw NumericalError("network produced a non-finite angle");
  std::sort(a.begin(), a.end());

  // Clamp into the interior and separate ties so the set is strictly ordered.
  constexpr double gap = 1e-9;
  const double lo = kEdge;
  const double hi = kHalfPi - kEdge;
  for (std::size_t k = 0; k < a.size(); ++k)
    a[k] = std::clamp(a[k], lo + gap * static_cast<double>(k), hi - gap * static_cast<double>(a.size() - 1 - k));
  for (std::size_t k = 1; k < a.size(); ++k)
    a[k] = std::max(a[k], a[k - 1] + gap);
  return SwitchingAngleSet::strict(std::move(a));
}

std::string model_to_json(const MlpModel &model) {
  check_model(model);
  using nlohmann::ordered_json;
  ordered_json j;
  j["layer_sizes"] = model.layer_sizes;
  j["activation"] = model.activation;
  ordered_json weights = ordered_json::array();
  for (int l = 0; l < model.layers(); ++l) {
    const int in = model.layer_sizes[idx(l)];
    const int out = model.layer_sizes[idx(l + 1)];
    ordered_json mat = ordered_json::array();
    for (int r = 0; r < out; ++r) {
      const auto begin = model.weights[idx(l)].begin() + r * in;
      mat.push_back(std::vector<double>(begin, begin + in));
    }
    weights.push_back(std::move(mat));
  }
  j["weights"] = std::move(weights);
  j["biases"] = model.biases;
  j["input_norm"] = {{"offset", model.input_offset}, {"scale", model.input_scale}};
  j["output_norm"] = {{"offset", model.output_offset}, {"scale", model.output_scale}};
  j["train_range"] = {model.train_lo, model.train_hi};
  j["seed"] = model.seed;
  return j.dump(2) + "\n";
}

MlpModel model_from_json(const std::string &text) {
  MlpModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    m.activation = j.at("activation").get<std::string>();
    for (const auto &mat : j.at("weights")) {
      std::vector<double> flat;
      for (const auto &row : mat)
        for (const auto &v : row)
          flat.push_back(v.get<double>());
      m.weights.push_back(std::move(flat));
    }
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    m.input_offset = j.at("input_norm").at("offset").get<double>();
    m.input_scale = j.at("input_norm").at("scale").get<double>();
    m.output_offset = j.at("output_norm").at("offset").get<std::vector<double>>();
    m.output_scale = j.at("output_norm").at("scale").get<std::vector<double>>();
    const auto range = j.at("train_range").get<std::vector<double>>();
    if (range.size() != 2)
      throw FormatError("train_range must have two entries");
    m.train_lo = range[0];
    m.train_hi = range[1];
    m.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("bad model file: ") + e.what());
  }
  if (m.activation != "tanh")
    throw FormatError("unsupported activation '" + m.activation + "'");
  check_model(m);
  check_normalization(m);
  return m;
}

} // namespace sheforge
