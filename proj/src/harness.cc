// Copyright 2026 The pepr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pepr/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace pepr {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

void mark_partial(const fs::path& dir, const std::string& reason) {
  std::ofstream out(dir / "PARTIAL");
  out << reason << '\n';
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal line plot. Nonpositive x values are dropped when log_x is set.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series, bool log_x) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 36, kBottom = 50;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((log_x && s.x[i] <= 0.0) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return kLeft + (tx(x) - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight << "\" height=\""
      << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << x_label << "</text>\n"
      << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kH / 2
      << ")\">" << y_label << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double x_val = log_x ? std::pow(10.0, fx) : fx;
    svg << "<text x=\"" << px(x_val) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">"
        << short_num(x_val) << "</text>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">" << short_num(fy)
        << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if ((log_x && series[s].x[i] <= 0.0) || !std::isfinite(series[s].y[i])) continue;
      svg << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    svg << "\"/>\n";
    if (!series[s].name.empty()) {
      svg << "<text x=\"" << kW - kRight - 6 << "\" y=\"" << kTop + 16 + 14 * s << "\" text-anchor=\"end\" fill=\""
          << color << "\">" << series[s].name << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

template <typename T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

std::uint64_t get_count(const json& value, const std::string& key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError("config field '" + key + "' must be a nonnegative integer");
  }
  return value.get<std::uint64_t>();
}

template <typename T>
std::optional<T> get_optional(const json& value, const std::string& key) {
  if (value.is_null()) return std::nullopt;
  return get_as<T>(value, key);
}

}  // namespace

std::string to_string(Method method) { return method == Method::kPepr ? "pepr" : "grape"; }

Method method_from_string(const std::string& name) {
  if (name == "pepr") return Method::kPepr;
  if (name == "grape") return Method::kGrape;
  throw ConfigError("method must be 'pepr' or 'grape', got '" + name + "'");
}

std::size_t ExperimentConfig::modes() const {
  if (n_modes) return *n_modes;
  return model == "hadamard" ? 2 : 8;
}

double ExperimentConfig::learning_rate() const {
  if (alpha) return *alpha;
  if (method == Method::kGrape) return 1.2;
  return model == "hadamard" ? 2.5 : 0.5;
}

std::optional<ConstraintSpec> ExperimentConfig::constraints() const {
  if (!omega_max && !j_max) return std::nullopt;
  ConstraintSpec spec;
  spec.omega_max = omega_max;
  spec.j_max = j_max;
  return spec;
}

Model ExperimentConfig::make_model() const {
  try {
    return Model::from_name(model, gamma_z);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void ExperimentConfig::validate() const {
  make_model();
  if (modes() < 1) throw ConfigError("n_modes must be >= 1");
  if (!(learning_rate() > 0.0) || !std::isfinite(learning_rate())) throw ConfigError("alpha must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (n_fid < 1) throw ConfigError("n_fid must be >= 1");
  if (max_runs < 1) throw ConfigError("max_runs must be >= 1");
  if (!(gamma_z >= 0.0)) throw ConfigError("gamma_z must be >= 0");
  if (omega_max && !(*omega_max > 0.0)) throw ConfigError("omega_max must be positive");
  if (j_max && !(*j_max > 0.0)) throw ConfigError("j_max must be positive");
  if (max_reject < 1) throw ConfigError("max_reject must be >= 1");
  if (!std::isfinite(checkpoint_ratio)) throw ConfigError("checkpoint_ratio must be finite");
  try {
    IntegratorConfig{steps_pow2, 1.0}.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void ExperimentConfig::apply_full_scale() {
  n_traj = 100;
  steps_pow2 = 14;
}

void to_json(json& out, const ExperimentConfig& cfg) {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  out = json{{"model", cfg.model},
             {"method", to_string(cfg.method)},
             {"n_modes", opt(cfg.n_modes)},
             {"alpha", opt(cfg.alpha)},
             {"epsilon", cfg.epsilon},
             {"n_traj", cfg.n_traj},
             {"n_fid", cfg.n_fid},
             {"max_runs", cfg.max_runs},
             {"steps_pow2", cfg.steps_pow2},
             {"gamma_z", cfg.gamma_z},
             {"omega_max", opt(cfg.omega_max)},
             {"j_max", opt(cfg.j_max)},
             {"seed", cfg.seed},
             {"checkpoint_ratio", cfg.checkpoint_ratio},
             {"max_reject", cfg.max_reject},
             {"count_rejected", cfg.count_rejected},
             {"normalize_states", cfg.normalize_states},
             {"output_dir", cfg.output_dir},
             {"threads", cfg.threads}};
}

void from_json(const json& in, ExperimentConfig& cfg) {
  if (!in.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : in.items()) {
    if (key == "model") cfg.model = get_as<std::string>(value, key);
    else if (key == "method") cfg.method = method_from_string(get_as<std::string>(value, key));
    else if (key == "n_modes") cfg.n_modes = value.is_null() ? std::nullopt : std::optional(get_count(value, key));
    else if (key == "alpha") cfg.alpha = get_optional<double>(value, key);
    else if (key == "epsilon") cfg.epsilon = get_as<double>(value, key);
    else if (key == "n_traj") cfg.n_traj = get_count(value, key);
    else if (key == "n_fid") cfg.n_fid = get_count(value, key);
    else if (key == "max_runs") cfg.max_runs = get_count(value, key);
    else if (key == "steps_pow2") cfg.steps_pow2 = static_cast<int>(get_count(value, key));
    else if (key == "gamma_z") cfg.gamma_z = get_as<double>(value, key);
    else if (key == "omega_max") cfg.omega_max = get_optional<double>(value, key);
    else if (key == "j_max") cfg.j_max = get_optional<double>(value, key);
    else if (key == "seed") cfg.seed = get_count(value, key);
    else if (key == "checkpoint_ratio") cfg.checkpoint_ratio = get_as<double>(value, key);
    else if (key == "max_reject") cfg.max_reject = get_count(value, key);
    else if (key == "count_rejected") cfg.count_rejected = get_as<bool>(value, key);
    else if (key == "normalize_states") cfg.normalize_states = get_as<bool>(value, key);
    else if (key == "output_dir") cfg.output_dir = get_as<std::string>(value, key);
    else if (key == "threads") cfg.threads = get_count(value, key);
    else throw ConfigError("unknown config field '" + key + "'");
  }
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  ExperimentConfig cfg;
  from_json(j, cfg);
  return cfg;
}

double evaluate_infidelity(const Model& model, const Propagator& propagator, const ControlParams& params,
                           std::size_t n_fid, Rng& rng, bool normalize_states) {
  if (n_fid < 1) throw std::invalid_argument("n_fid must be >= 1");
  const ControlTrack track = propagator.sample(params);
  double sum = 0.0;
  for (std::size_t i = 0; i < n_fid; ++i) {
    const StateVector initial = sample_initial_state(model, rng, normalize_states);
    sum += propagated_fidelity(model, propagator, track, initial);
  }
  return 1.0 - sum / static_cast<double>(n_fid);
}

LogMean log_mean_infidelity(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("log-mean of an empty ensemble");
  LogMean out;
  double sum = 0.0;
  for (double x : samples) {
    if (!(x >= kInfidelityFloor)) {
      x = kInfidelityFloor;
      ++out.n_clamped;
    }
    sum += std::log10(x);
  }
  out.value = sum / static_cast<double>(samples.size());
  return out;
}

double ensemble_variance(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("variance needs at least two samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return ss / (n - 1.0);
}

double median(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("median of an empty ensemble");
  const std::size_t mid = samples.size() / 2;
  std::nth_element(samples.begin(), samples.begin() + mid, samples.end());
  const double upper = samples[mid];
  if (samples.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(samples.begin(), samples.begin() + mid));
}

std::vector<std::uint64_t> checkpoint_schedule(std::uint64_t max_runs, double ratio) {
  std::vector<std::uint64_t> out{0};
  std::uint64_t next = 1;
  while (next < max_runs) {
    out.push_back(next);
    const double scaled = std::ceil(static_cast<double>(next) * ratio);
    next = std::max<std::uint64_t>(next + 1, static_cast<std::uint64_t>(scaled));
  }
  out.push_back(max_runs);
  return out;
}

TrajectoryRecord run_trajectory(const ExperimentConfig& cfg, std::size_t id, const Propagator& propagator) {
  const Model model = cfg.make_model();
  const std::size_t n_modes = cfg.modes();
  const double t_f = propagator.config().t_final;

  TrajectoryRecord record;
  record.id = id;
  record.seed = stream_seed(cfg.seed, id, 0);
  Rng rng(record.seed);
  Rng eval_rng(make_stream(cfg.seed, id, 1));

  ControlParams params = sample_initial_params(model, n_modes, rng, cfg.constraints(), t_f);
  RunLedger ledger;
  auto checkpoint = [&] {
    const double infidelity =
        evaluate_infidelity(model, propagator, params, cfg.n_fid, eval_rng, cfg.normalize_states);
    record.checkpoints.push_back({ledger.count(), infidelity});
  };
  checkpoint();

  const bool every_step = cfg.checkpoint_ratio <= 1.0;
  const std::vector<std::uint64_t> schedule = checkpoint_schedule(cfg.max_runs, cfg.checkpoint_ratio);
  std::size_t next = 1;

  std::optional<PeprOptimizer> pepr;
  std::optional<GrapeOptimizer> grape;
  if (cfg.method == Method::kPepr) {
    PeprConfig pc;
    pc.alpha = cfg.learning_rate();
    pc.constraints = cfg.constraints();
    pc.max_reject = cfg.max_reject;
    pc.count_rejected = cfg.count_rejected;
    pc.normalize_states = cfg.normalize_states;
    pepr.emplace(model, propagator, pc, n_modes);
  } else {
    GrapeConfig gc;
    gc.alpha = cfg.learning_rate();
    gc.epsilon = cfg.epsilon;
    gc.constraints = cfg.constraints();
    gc.normalize_states = cfg.normalize_states;
    grape.emplace(model, propagator, gc, n_modes);
  }

  // Without rejection accounting a fully blocked optimizer would never use up
  // the budget; bound the total number of draws instead.
  const std::uint64_t attempt_limit = cfg.max_runs * static_cast<std::uint64_t>(cfg.max_reject);
  std::uint64_t attempts = 0;
  while (ledger.count() < cfg.max_runs && attempts < attempt_limit) {
    const std::uint64_t before = ledger.count();
    if (pepr) {
      const std::size_t cap =
          cfg.count_rejected ? static_cast<std::size_t>(cfg.max_runs - ledger.count()) : cfg.max_reject;
      const PeprOutcome outcome = pepr->step(params, rng, ledger, cap);
      attempts += outcome.attempts;
      record.rejections += outcome.attempts - (outcome.accepted ? 1 : 0);
      if (outcome.accepted) {
        params = outcome.params;
      } else if (outcome.attempts == cfg.max_reject) {
        ++record.failed_steps;
      }
    } else {
      params = grape->step(params, rng, ledger);
      ++attempts;
    }
    if (ledger.count() == before) continue;
    if (every_step || ledger.count() >= schedule[next]) {
      checkpoint();
      while (next + 1 < schedule.size() && schedule[next] <= ledger.count()) ++next;
    }
  }
  if (record.checkpoints.back().n_run != ledger.count()) checkpoint();
  record.final_params = params;
  return record;
}

std::vector<SummaryRow> summarize(std::span<const TrajectoryRecord> trajectories,
                                  std::span<const std::uint64_t> schedule) {
  std::vector<SummaryRow> rows;
  std::vector<double> values(trajectories.size());
  for (std::uint64_t point : schedule) {
    bool complete = true;
    for (std::size_t i = 0; i < trajectories.size() && complete; ++i) {
      const auto& cps = trajectories[i].checkpoints;
      auto it = std::lower_bound(cps.begin(), cps.end(), point,
                                 [](const Checkpoint& c, std::uint64_t n) { return c.n_run < n; });
      if (it == cps.end()) complete = false;
      else values[i] = it->infidelity;
    }
    if (!complete) continue;
    SummaryRow row;
    row.n_run = point;
    const LogMean lm = log_mean_infidelity(values);
    row.log_mean_infidelity = lm.value;
    row.n_clamped = lm.n_clamped;
    row.variance = values.size() >= 2 ? ensemble_variance(values) : 0.0;
    row.min_infidelity = *std::min_element(values.begin(), values.end());
    row.max_infidelity = *std::max_element(values.begin(), values.end());
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.trajectories.resize(cfg.n_traj);

  const Propagator propagator(IntegratorConfig{cfg.steps_pow2, 1.0}, cfg.modes());
  std::size_t n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, cfg.n_traj);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t id = next++; id < cfg.n_traj; id = next++) {
      try {
        result.trajectories[id] = run_trajectory(cfg, id, propagator);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.n_traj;
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint64_t> points;
  if (cfg.checkpoint_ratio <= 1.0) {
    std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
    for (const auto& t : result.trajectories) {
      last = std::min(last, t.checkpoints.back().n_run);
      for (const auto& c : t.checkpoints) points.push_back(c.n_run);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    points.erase(std::upper_bound(points.begin(), points.end(), last), points.end());
  } else {
    points = checkpoint_schedule(cfg.max_runs, cfg.checkpoint_ratio);
  }
  result.summary = summarize(result.trajectories, points);
  return result;
}

void write_experiment(const ExperimentResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  fs::remove(dir / "PARTIAL", ec);
  try {
    std::string traj = "trajectory_id,n_run,infidelity\n";
    for (const auto& t : result.trajectories) {
      for (const auto& c : t.checkpoints) {
        traj += std::to_string(t.id) + ',' + std::to_string(c.n_run) + ',' + num(c.infidelity) + '\n';
      }
    }
    write_file(dir / "trajectories.csv", traj);

    std::string summary = "n_run,log_mean_infidelity,variance,min_infidelity,max_infidelity,n_clamped\n";
    for (const auto& r : result.summary) {
      summary += std::to_string(r.n_run) + ',' + num(r.log_mean_infidelity) + ',' + num(r.variance) + ',' +
                 num(r.min_infidelity) + ',' + num(r.max_infidelity) + ',' + std::to_string(r.n_clamped) + '\n';
    }
    write_file(dir / "summary.csv", summary);

    json params = json::object();
    params["config"] = result.config;
    params["config"].erase("threads");  // does not affect results
    params["trajectories"] = json::array();
    for (const auto& t : result.trajectories) {
      params["trajectories"].push_back({{"trajectory_id", t.id},
                                        {"seed", t.seed},
                                        {"rejections", t.rejections},
                                        {"failed_steps", t.failed_steps},
                                        {"final_n_run", t.checkpoints.back().n_run},
                                        {"final_infidelity", t.final_infidelity()},
                                        {"params", t.final_params}});
    }
    write_file(dir / "params.json", params.dump(2) + '\n');

    Series s{to_string(result.config.method), {}, {}};
    for (const auto& r : result.summary) {
      s.x.push_back(static_cast<double>(r.n_run));
      s.y.push_back(r.log_mean_infidelity);
    }
    write_file(dir / "summary.svg",
               line_plot_svg(result.config.model + " " + to_string(result.config.method), "N_run",
                             "mean log10(1 - F)", {s}, true));
  } catch (const std::exception& e) {
    mark_partial(dir, e.what());
    throw;
  }
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepParameter parameter,
                                  std::span<const double> values, bool write_outputs) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const char* name = parameter == SweepParameter::kConstraint    ? "omega_max_tf"
                     : parameter == SweepParameter::kDissipation ? "gamma_z"
                                                                 : "n_modes";
  const char* prefix = parameter == SweepParameter::kConstraint    ? "omega"
                       : parameter == SweepParameter::kDissipation ? "gamma"
                                                                   : "modes";
  std::vector<ExperimentConfig> configs;
  for (double v : values) {
    ExperimentConfig cfg = base;
    switch (parameter) {
      case SweepParameter::kConstraint:
        cfg.omega_max = v;
        cfg.j_max = v;
        break;
      case SweepParameter::kDissipation:
        cfg.gamma_z = v;
        break;
      case SweepParameter::kModes:
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("n_modes values must be positive integers");
        cfg.n_modes = static_cast<std::size_t>(v);
        break;
    }
    cfg.output_dir = (fs::path(base.output_dir) / (std::string(prefix) + "_" + short_num(v))).string();
    cfg.validate();
    configs.push_back(cfg);
  }

  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    points.push_back({values[i], run_experiment(configs[i])});
    if (write_outputs) write_experiment(points.back().result, configs[i].output_dir);
  }
  if (!write_outputs) return points;

  const fs::path dir(base.output_dir);
  const Model model = base.make_model();
  const ChannelLayout layout = model.layout();
  std::string table = std::string(name) + ",log_mean_final,variance_final,median_final,min_final,max_final,n_clamped";
  for (std::size_t p = 0; p < layout.rabi_pairs.size(); ++p) table += ",best_pulse_area_" + std::to_string(p + 1);
  table += '\n';
  std::string scatter = std::string(name) + ",trajectory_id,final_infidelity\n";
  Series log_mean{"log-mean", {}, {}}, best{"best", {}, {}};
  for (const SweepPoint& point : points) {
    std::vector<double> finals;
    for (const auto& t : point.result.trajectories) {
      finals.push_back(t.final_infidelity());
      scatter += num(point.value) + ',' + std::to_string(t.id) + ',' + num(t.final_infidelity()) + '\n';
    }
    const auto best_it = std::min_element(point.result.trajectories.begin(), point.result.trajectories.end(),
                                          [](const auto& a, const auto& b) {
                                            return a.final_infidelity() < b.final_infidelity();
                                          });
    const LogMean lm = log_mean_infidelity(finals);
    const double lo = *std::min_element(finals.begin(), finals.end());
    table += num(point.value) + ',' + num(lm.value) + ',' +
             (finals.size() >= 2 ? num(ensemble_variance(finals)) : std::string("0")) + ',' + num(median(finals)) +
             ',' + num(lo) + ',' + num(*std::max_element(finals.begin(), finals.end())) + ',' +
             std::to_string(lm.n_clamped);
    for (const auto& [x, y] : layout.rabi_pairs) table += ',' + num(pulse_area(best_it->final_params, x, y));
    table += '\n';
    log_mean.x.push_back(point.value);
    log_mean.y.push_back(lm.value);
    best.x.push_back(point.value);
    best.y.push_back(std::log10(std::max(lo, kInfidelityFloor)));
  }
  try {
    write_file(dir / "sweep.csv", table);
    write_file(dir / "sweep_scatter.csv", scatter);
    write_file(dir / "sweep.svg", line_plot_svg(std::string("sweep over ") + name, name, "log10(1 - F) at budget",
                                                {log_mean, best}, parameter == SweepParameter::kDissipation));
  } catch (const std::exception& e) {
    mark_partial(dir, e.what());
    throw;
  }
  return points;
}

StateVector basis_state(const Model& model, const std::string& bits) {
  if (bits.size() != model.n_qubits()) throw std::invalid_argument("basis label needs one bit per qubit");
  std::vector<std::array<double, 3>> bloch;
  for (char b : bits) {
    if (b != '0' && b != '1') throw std::invalid_argument("basis label must consist of 0 and 1");
    bloch.push_back({0.0, 0.0, b == '0' ? 1.0 : -1.0});
  }
  return product_state(model, bloch);
}

ProtocolTrace emit_protocol_trace(const Model& model, const ControlParams& params,
                                  std::span<const StateVector> initial_states, const IntegratorConfig& integrator,
                                  std::size_t stride) {
  if (params.n_channels() != model.n_channels()) throw std::invalid_argument("params do not match the model");
  const Propagator propagator(integrator, params.n_modes());
  const std::size_t n_steps = propagator.steps();
  if (stride == 0) stride = std::max<std::size_t>(1, n_steps / 1024);
  if (n_steps % stride != 0) throw std::invalid_argument("stride must divide the number of steps");

  const ChannelLayout layout = model.layout();
  const std::size_t target = model.n_qubits() - 1;
  ProtocolTrace trace;
  trace.columns.push_back("t");
  for (const std::string& c : model.channel_names()) trace.columns.push_back(c);
  for (std::size_t p = 0; p < layout.rabi_pairs.size(); ++p) {
    trace.columns.push_back("abs_omega_" + std::to_string(p + 1));
    trace.columns.push_back("phi_" + std::to_string(p + 1));
  }
  for (std::size_t c = 0; c < layout.coupling_channels.size(); ++c) trace.columns.push_back("J");
  for (std::size_t s = 0; s < initial_states.size(); ++s) {
    for (const char* axis : {"sx", "sy", "sz"}) trace.columns.push_back("s" + std::to_string(s) + "_" + axis);
  }

  const ControlTrack track = propagator.sample(params);
  std::vector<StateVector> states(initial_states.begin(), initial_states.end());
  for (std::size_t n = 0;; n += stride) {
    const double t = propagator.time_at(n);
    std::vector<double> row{t};
    std::vector<double> c(model.n_channels());
    for (std::size_t j = 0; j < c.size(); ++j) row.push_back(c[j] = evaluate_control(params, j, t));
    for (const auto& [x, y] : layout.rabi_pairs) {
      row.push_back(std::hypot(c[x], c[y]));
      row.push_back(std::atan2(-c[y], c[x]));
    }
    for (std::size_t j : layout.coupling_channels) row.push_back(c[j]);
    for (const StateVector& s : states) {
      const auto b = bloch_vector(model, s, target);
      row.insert(row.end(), b.begin(), b.end());
    }
    trace.rows.push_back(std::move(row));
    if (n == n_steps) break;
    for (StateVector& s : states) s = propagator.propagate(model, track, s, n, n + stride);
  }
  for (const auto& [x, y] : layout.rabi_pairs) trace.pulse_areas.push_back(pulse_area(params, x, y));
  return trace;
}

void write_protocol_trace(const ProtocolTrace& trace, const fs::path& path) {
  std::string text;
  for (std::size_t i = 0; i < trace.columns.size(); ++i) text += (i ? "," : "") + trace.columns[i];
  text += '\n';
  for (const auto& row : trace.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + num(row[i]);
    text += '\n';
  }
  text += "# pulse_area";
  for (double a : trace.pulse_areas) text += ',' + num(a);
  text += '\n';
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, text);
}

}  // namespace pepr
