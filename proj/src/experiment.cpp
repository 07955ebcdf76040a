#include "rde/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "rde/encounter.hpp"
#include "rde/errors.hpp"
#include "rde/linalg.hpp"
#include "rde/parallel.hpp"
#include "rde/path_events.hpp"
#include "rde/regeneration.hpp"
#include "rde/renewal_stats.hpp"
#include "rde/rng.hpp"
#include "rde/stats.hpp"
#include "rde/svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rde {

namespace {

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json env_to_json(const EnvironmentSpec& s) {
  return json{{"dimension", s.dimension},
              {"mode", to_string(s.mode)},
              {"dependence_range", s.dependence_range},
              {"ellipticity", s.ellipticity},
              {"coefficient_bound", s.coefficient_bound},
              {"drift_mean", s.drift_mean},
              {"drift_amplitude", s.drift_amplitude},
              {"diffusion_amplitude", s.diffusion_amplitude},
              {"lattice_spacing", s.lattice_spacing},
              {"kernel_radius", s.kernel_radius},
              {"master_seed", s.master_seed}};
}

EnvironmentSpec env_from_json(const json& j) {
  EnvironmentSpec s;
  s.dimension = j.value("dimension", s.dimension);
  s.mode = env_mode_from_string(j.value("mode", to_string(s.mode)));
  s.dependence_range = j.value("dependence_range", s.dependence_range);
  s.ellipticity = j.value("ellipticity", s.ellipticity);
  s.coefficient_bound = j.value("coefficient_bound", s.coefficient_bound);
  s.drift_mean = j.value("drift_mean", Vec(static_cast<std::size_t>(s.dimension), 0.0));
  s.drift_amplitude = j.value("drift_amplitude", s.drift_amplitude);
  s.diffusion_amplitude = j.value("diffusion_amplitude", s.diffusion_amplitude);
  s.lattice_spacing = j.value("lattice_spacing", s.lattice_spacing);
  s.kernel_radius = j.value("kernel_radius", s.kernel_radius);
  s.master_seed = j.value("master_seed", s.master_seed);
  return s;
}

json sim_to_json(const SimConfig& s) {
  return json{{"dt", s.dt}, {"horizon", s.horizon}, {"x0", s.x0}};
}

SimConfig sim_from_json(const json& j, int dimension) {
  SimConfig s;
  s.dt = j.value("dt", s.dt);
  s.horizon = j.value("horizon", s.horizon);
  s.x0 = j.value("x0", Vec(static_cast<std::size_t>(dimension), 0.0));
  return s;
}

std::string status_string(const DStatus& s) {
  if (s.finite()) return "finite:" + std::to_string(s.value);
  return s.infinite() ? "infinite" : "censored";
}

json velocity_json(const VelocityEstimate& v) {
  return json{{"value", v.value}, {"se", v.se}, {"n", v.n_effective}, {"method", v.method}};
}

json mean_se_json(const MeanSe& m) {
  return json{{"mean", m.mean}, {"se", m.se}, {"n", m.n}};
}

json wilson_json(const WilsonInterval& w) {
  return json{{"p_hat", w.p_hat}, {"lo", w.lo}, {"hi", w.hi},
              {"successes", w.successes}, {"n", w.n}};
}

// Downsampled l.X_t / t curve, at most 64 points, skipping t = 0.
json trace_json(const Trajectory& traj, std::span<const double> l) {
  const ProjectedPath q(traj, l);
  json pts = json::array();
  const int samples = 64;
  for (int k = 1; k <= samples; ++k) {
    const double t = traj.horizon * static_cast<double>(k) / samples;
    pts.push_back(json::array({t, (q.value_at(t) - q.value_at(0.0)) / t}));
  }
  return pts;
}

struct KindContext {
  const ExperimentConfig& cfg;
  double threshold;
  const Vec& l0;
};

Environment replicate_env(const ExperimentConfig& cfg, std::int64_t i) {
  EnvironmentSpec s = cfg.env;
  if (cfg.fresh_environment)
    s.master_seed = derive_key(cfg.master_seed, stream::environment,
                               static_cast<std::uint64_t>(i));
  return make_environment(s);
}

std::uint64_t replicate_seed(const ExperimentConfig& cfg, std::int64_t i) {
  return derive_key(cfg.master_seed, stream::replicate, static_cast<std::uint64_t>(i));
}

std::vector<Trajectory> plain_ensemble(const ExperimentConfig& cfg) {
  std::vector<Trajectory> trajs(static_cast<std::size_t>(cfg.ensemble));
  parallel_for(cfg.ensemble, cfg.threads, [&](std::int64_t i) {
    trajs[static_cast<std::size_t>(i)] =
        simulate_path(replicate_env(cfg, i), cfg.sim, replicate_seed(cfg, i));
  });
  return trajs;
}

struct CoupledEnsemble {
  std::vector<CoupledTrajectory> coupled;
  std::vector<RegenerationRecord> records;
};

CoupledEnsemble coupled_ensemble(const ExperimentConfig& cfg, const Vec& l0) {
  CoupledEnsemble out;
  out.coupled.resize(static_cast<std::size_t>(cfg.ensemble));
  out.records.resize(static_cast<std::size_t>(cfg.ensemble));
  parallel_for(cfg.ensemble, cfg.threads, [&](std::int64_t i) {
    const auto iu = static_cast<std::size_t>(i);
    try {
      out.coupled[iu] = attach_bernoulli(replicate_env(cfg, i), cfg.sim, l0,
                                         cfg.coupling.success_prob, cfg.coupling.mode,
                                         replicate_seed(cfg, i));
    } catch (const CouplingError& e) {
      throw CouplingError(e.interval(),
                          "replicate " + std::to_string(i) + ": " + e.what());
    }
    out.records[iu] = find_regenerations(out.coupled[iu], l0, cfg.env.dependence_range,
                                         cfg.coupling.guard_gap);
  });
  return out;
}

void add_traces(json& summary, std::span<const Trajectory> trajs, const Vec& l0) {
  json traces = json::array();
  const std::size_t keep = std::min<std::size_t>(trajs.size(), 8);
  for (std::size_t i = 0; i < keep; ++i) traces.push_back(trace_json(trajs[i], l0));
  summary["traces"] = std::move(traces);
}

void run_simulate(const KindContext& ctx, json& summary, std::vector<json>& rows) {
  const auto trajs = plain_ensemble(ctx.cfg);
  json velocities = json::array();
  for (const auto& l : ctx.cfg.directions) {
    const auto v = velocity_direct(trajs, l);
    json entry = velocity_json(v);
    entry["direction"] = l;
    velocities.push_back(std::move(entry));
  }
  summary["velocity"] = std::move(velocities);
  add_traces(summary, trajs, ctx.l0);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& t = trajs[i];
    const auto last = t.point(t.steps());
    rows.push_back(json{{"replicate", i},
                        {"terminal", Vec(last.begin(), last.end())},
                        {"level", dot(last, ctx.l0)}});
  }
}

void run_velocity(const KindContext& ctx, json& summary, std::vector<json>& rows) {
  const auto ens = coupled_ensemble(ctx.cfg, ctx.l0);
  std::vector<Trajectory> trajs;
  trajs.reserve(ens.coupled.size());
  for (const auto& c : ens.coupled) trajs.push_back(c.traj);

  const auto direct = velocity_direct(trajs, ctx.l0);
  summary["direct"] = velocity_json(direct);
  std::int64_t pooled = 0;
  for (const auto& r : ens.records)
    pooled += std::max<std::int64_t>(0, static_cast<std::int64_t>(r.blocks.size()) - 1);
  summary["pooled_increments"] = pooled;
  try {
    const auto renewal = velocity_renewal(ens.records, ctx.l0);
    summary["renewal"] = velocity_json(renewal);
    summary["gap"] = std::abs(renewal.value - direct.value);
    summary["combined_se"] = std::hypot(renewal.se, direct.se);
  } catch (const InsufficientData& e) {
    summary["renewal_note"] = e.what();
  }
  add_traces(summary, trajs, ctx.l0);
  for (std::size_t i = 0; i < ens.records.size(); ++i) {
    const auto& r = ens.records[i];
    rows.push_back(json{{"replicate", i},
                        {"regenerations", r.regen_times.size()},
                        {"first_block", status_string(r.first_block_status)},
                        {"censored", r.last_block_censored}});
  }
}

void run_regen(const KindContext& ctx, json& summary, std::vector<json>& rows) {
  const auto ens = coupled_ensemble(ctx.cfg, ctx.l0);

  std::vector<double> durations, displacements;
  std::int64_t censored = 0, conclusive_first = 0;
  for (const auto& r : ens.records) {
    if (r.last_block_censored) ++censored;
    if (r.first_block_status.infinite() && !r.blocks.empty()) ++conclusive_first;
    for (std::size_t k = 1; k < r.blocks.size(); ++k) {
      durations.push_back(static_cast<double>(r.blocks[k].duration));
      displacements.push_back(dot(r.blocks[k].displacement, ctx.l0));
    }
  }
  summary["pooled_durations"] = durations;
  summary["pooled_displacements"] = displacements;
  summary["censored_count"] = censored;
  summary["conclusive_first_blocks"] = conclusive_first;

  try {
    summary["renewal"] = velocity_json(velocity_renewal(ens.records, ctx.l0));
  } catch (const InsufficientData& e) {
    summary["renewal_note"] = e.what();
  }

  const auto tau1 = tau1_moment_report(ens.records, ctx.l0);
  json tau1_json{{"n", tau1.n}, {"low_n", tau1.low_n}, {"stable", tau1.stable},
                 {"running_mean_level", tau1.running_mean_level}};
  if (tau1.n > 0) {
    tau1_json["level"] = mean_se_json(tau1.level);
    tau1_json["duration"] = mean_se_json(tau1.duration);
  }
  summary["tau1"] = std::move(tau1_json);

  if (durations.size() >= 50) {
    json tests = json::array();
    for (const auto& t : iid_tests(ens.records, ctx.l0)) {
      json entry{{"name", t.name}, {"method", t.method}, {"statistic", t.statistic},
                 {"alpha", t.alpha}, {"reject", t.reject}, {"degenerate", t.degenerate},
                 {"n1", t.n1}, {"n2", t.n2}};
      if (t.p_value) entry["p_value"] = *t.p_value;
      tests.push_back(std::move(entry));
    }
    summary["iid_tests"] = std::move(tests);
  } else {
    summary["iid_note"] = "fewer than 50 pooled stationary blocks";
  }

  for (std::size_t i = 0; i < ens.records.size(); ++i) {
    const auto& r = ens.records[i];
    json blocks = json::array();
    for (const auto& b : r.blocks)
      blocks.push_back(json{{"start", b.start}, {"duration", b.duration},
                            {"dx", dot(b.displacement, ctx.l0)}});
    rows.push_back(json{{"replicate", i},
                        {"regen_times", r.regen_times},
                        {"first_block", status_string(r.first_block_status)},
                        {"censored", r.last_block_censored},
                        {"blocks", std::move(blocks)}});
  }
}

void run_zeroone(const KindContext& ctx, json& summary, std::vector<json>& rows) {
  const auto trajs = plain_ensemble(ctx.cfg);
  summary["escape_threshold"] = ctx.threshold;

  std::vector<std::vector<EscapeClass>> classes(ctx.cfg.directions.size());
  for (std::size_t k = 0; k < ctx.cfg.directions.size(); ++k) {
    classes[k].reserve(trajs.size());
    for (const auto& t : trajs)
      classes[k].push_back(classify_escape(t, ctx.cfg.directions[k], ctx.threshold));
  }

  json reports = json::array();
  for (std::size_t k = 0; k < ctx.cfg.directions.size(); ++k) {
    json entry{{"direction", ctx.cfg.directions[k]}};
    try {
      const auto rep = zero_one_report(classes[k]);
      entry["plus"] = wilson_json(rep.plus);
      entry["minus"] = wilson_json(rep.minus);
      entry["either"] = wilson_json(rep.either);
      entry["verdict_plus"] = rep.verdict_plus;
      entry["verdict_minus"] = rep.verdict_minus;
      entry["verdict_either"] = rep.verdict_either;
      entry["counts"] = json{{"plus", rep.n_plus}, {"minus", rep.n_minus},
                             {"oscillating", rep.n_oscillating},
                             {"undecided", rep.n_undecided}};
    } catch (const InsufficientData& e) {
      entry["note"] = e.what();
    }
    reports.push_back(std::move(entry));
  }
  summary["reports"] = std::move(reports);

  const auto lim = limit_velocity_summary(trajs, ctx.threshold);
  json lim_json{{"l_star", lim.l_star}, {"zero_velocity", lim.zero_velocity},
                {"collinearity", lim.collinearity},
                {"counts", json{{"plus", lim.n_plus}, {"minus", lim.n_minus},
                                {"oscillating", lim.n_oscillating},
                                {"undecided", lim.n_undecided}}}};
  if (lim.v_plus) lim_json["v_plus"] = velocity_json(*lim.v_plus);
  if (lim.v_minus) lim_json["v_minus"] = velocity_json(*lim.v_minus);
  summary["limit_velocity"] = std::move(lim_json);
  add_traces(summary, trajs, ctx.l0);

  for (std::size_t i = 0; i < trajs.size(); ++i) {
    json labels = json::array(), levels = json::array();
    for (std::size_t k = 0; k < ctx.cfg.directions.size(); ++k) {
      labels.push_back(to_string(classes[k][i].label));
      levels.push_back(classes[k][i].terminal_level);
    }
    rows.push_back(json{{"replicate", i}, {"labels", std::move(labels)},
                        {"levels", std::move(levels)}});
  }
}

void run_encounter(const KindContext& ctx, json& summary, std::vector<json>& rows) {
  const auto& ec = ctx.cfg.encounter;
  const double ball = ec.ball_radius > 0.0 ? ec.ball_radius : ctx.cfg.env.dependence_range;
  json levels = json::array();
  for (std::size_t idx = 0; idx < ec.levels.size(); ++idx) {
    const double L = ec.levels[idx];
    EncounterConfig enc;
    enc.level = L;
    enc.replicates = ec.pairs;
    enc.y_start.resize(ctx.l0.size());
    for (std::size_t j = 0; j < ctx.l0.size(); ++j) enc.y_start[j] = 3.0 * L * ctx.l0[j];
    const auto est =
        encounter_probability(ctx.cfg.env, enc, ctx.cfg.sim, ctx.l0, ball,
                              derive_key(ctx.cfg.master_seed, static_cast<std::uint64_t>(idx)));
    json entry{{"level", L}, {"y_level", 3.0 * L}, {"pairs", ec.pairs},
               {"encounters", est.encounters}, {"traversals", est.traversals},
               {"rate", wilson_json(est.rate)}};
    levels.push_back(entry);
    rows.push_back(std::move(entry));
  }
  summary["ball_radius"] = ball;
  summary["levels"] = std::move(levels);
}

void run_oscillation(const KindContext& ctx, json& summary, std::vector<json>& rows) {
  const auto trajs = plain_ensemble(ctx.cfg);
  const auto& oc = ctx.cfg.oscillation;
  const double L = oc.level_scale > 0.0 ? oc.level_scale : 6.0 * ctx.cfg.env.dependence_range;

  json sweeps = json::array();
  for (const int alpha : oc.alphas) {
    json points = json::array();
    for (int h = 1; h <= oc.settle_bound_max; ++h)
      points.push_back(json::array(
          {h, oscillation_fraction(trajs, ctx.l0, L, static_cast<double>(h), alpha,
                                   oc.max_index)}));
    sweeps.push_back(json{{"alpha", alpha}, {"points", std::move(points)}});
  }
  summary["level_scale"] = L;
  summary["max_index"] = oc.max_index;
  summary["sweeps"] = std::move(sweeps);

  for (std::size_t i = 0; i < trajs.size(); ++i) {
    json fractions = json::object();
    for (const int alpha : oc.alphas)
      fractions[std::to_string(alpha)] = oscillation_fraction(
          trajs[i], ctx.l0, L, static_cast<double>(oc.settle_bound_max), alpha,
          oc.max_index);
    rows.push_back(json{{"replicate", i}, {"fractions", std::move(fractions)}});
  }
}

void write_text(const fs::path& path, const std::string& body,
                std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out_dir", "cannot write " + path.string());
  out << body;
  files.push_back(path.string());
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::regen: return "regen";
    case ExperimentKind::velocity: return "velocity";
    case ExperimentKind::zeroone: return "zeroone";
    case ExperimentKind::encounter: return "encounter";
    case ExperimentKind::oscillation: return "oscillation";
  }
  return "simulate";
}

ExperimentKind experiment_kind_from(const std::string& name) {
  if (name == "simulate") return ExperimentKind::simulate;
  if (name == "regen") return ExperimentKind::regen;
  if (name == "velocity") return ExperimentKind::velocity;
  if (name == "zeroone") return ExperimentKind::zeroone;
  if (name == "encounter") return ExperimentKind::encounter;
  if (name == "oscillation") return ExperimentKind::oscillation;
  throw ConfigError("kind", "unknown experiment kind: " + name);
}

void validate_experiment_config(const ExperimentConfig& cfg) {
  if (cfg.ensemble < 1) throw ConfigError("ensemble", "need at least one replicate");
  if (cfg.threads < 1) throw ConfigError("threads", "must be positive");
  if (cfg.directions.empty()) throw ConfigError("directions", "need at least one");
  for (const auto& l : cfg.directions) {
    if (l.size() != static_cast<std::size_t>(cfg.env.dimension))
      throw ConfigError("directions", "dimension mismatch with the environment");
    if (std::abs(norm2(l) - 1.0) > 1e-9)
      throw ConfigError("directions", "directions must be unit vectors");
  }
  validate_sim_config(cfg.sim, cfg.env.dimension);
  if (cfg.coupling.success_prob < 0.0 || cfg.coupling.success_prob > 1.0)
    throw ConfigError("coupling.success_prob", "must lie in [0, 1]");
  if (cfg.kind == ExperimentKind::encounter) {
    if (cfg.encounter.levels.empty())
      throw ConfigError("encounter.levels", "need at least one window floor");
    if (cfg.encounter.pairs < 1)
      throw ConfigError("encounter.pairs", "need at least one pair");
  }
  if (cfg.kind == ExperimentKind::oscillation) {
    const double L = cfg.oscillation.level_scale > 0.0
                         ? cfg.oscillation.level_scale
                         : 6.0 * cfg.env.dependence_range;
    if (!(L > 3.0 * cfg.env.dependence_range))
      throw ConfigError("oscillation.level_scale",
                        "level scale must exceed three dependence ranges");
    if (cfg.oscillation.settle_bound_max < 1 || cfg.oscillation.max_index < 0 ||
        cfg.oscillation.alphas.empty())
      throw ConfigError("oscillation", "degenerate sweep");
  }
}

json to_json(const ExperimentConfig& cfg) {
  return json{{"kind", to_string(cfg.kind)},
              {"environment", env_to_json(cfg.env)},
              {"sim", sim_to_json(cfg.sim)},
              {"coupling", json{{"success_prob", cfg.coupling.success_prob},
                                {"mode", to_string(cfg.coupling.mode)},
                                {"guard_gap", cfg.coupling.guard_gap}}},
              {"encounter", json{{"levels", cfg.encounter.levels},
                                 {"pairs", cfg.encounter.pairs},
                                 {"ball_radius", cfg.encounter.ball_radius}}},
              {"oscillation", json{{"level_scale", cfg.oscillation.level_scale},
                                   {"max_index", cfg.oscillation.max_index},
                                   {"settle_bound_max", cfg.oscillation.settle_bound_max},
                                   {"alphas", cfg.oscillation.alphas}}},
              {"directions", cfg.directions},
              {"ensemble", cfg.ensemble},
              {"escape_threshold", cfg.escape_threshold},
              {"fresh_environment", cfg.fresh_environment},
              {"out_dir", cfg.out_dir},
              {"master_seed", cfg.master_seed},
              {"threads", cfg.threads}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    ExperimentConfig cfg;
    cfg.kind = experiment_kind_from(j.at("kind").get<std::string>());
    cfg.env = env_from_json(j.value("environment", json::object()));
    cfg.sim = sim_from_json(j.value("sim", json::object()), cfg.env.dimension);
    if (j.contains("coupling")) {
      const auto& c = j.at("coupling");
      cfg.coupling.success_prob = c.value("success_prob", cfg.coupling.success_prob);
      cfg.coupling.mode =
          coupling_mode_from_string(c.value("mode", to_string(cfg.coupling.mode)));
      cfg.coupling.guard_gap = c.value("guard_gap", cfg.coupling.guard_gap);
    }
    if (j.contains("encounter")) {
      const auto& e = j.at("encounter");
      cfg.encounter.levels = e.value("levels", cfg.encounter.levels);
      cfg.encounter.pairs = e.value("pairs", cfg.encounter.pairs);
      cfg.encounter.ball_radius = e.value("ball_radius", cfg.encounter.ball_radius);
    }
    if (j.contains("oscillation")) {
      const auto& o = j.at("oscillation");
      cfg.oscillation.level_scale = o.value("level_scale", cfg.oscillation.level_scale);
      cfg.oscillation.max_index = o.value("max_index", cfg.oscillation.max_index);
      cfg.oscillation.settle_bound_max =
          o.value("settle_bound_max", cfg.oscillation.settle_bound_max);
      cfg.oscillation.alphas = o.value("alphas", cfg.oscillation.alphas);
    }
    if (j.contains("directions")) {
      cfg.directions = j.at("directions").get<std::vector<Vec>>();
    } else if (j.contains("direction")) {
      cfg.directions = {j.at("direction").get<Vec>()};
    } else {
      Vec e1(static_cast<std::size_t>(cfg.env.dimension), 0.0);
      e1[0] = 1.0;
      cfg.directions = {e1};
    }
    cfg.ensemble = j.value("ensemble", cfg.ensemble);
    cfg.escape_threshold = j.value("escape_threshold", cfg.escape_threshold);
    cfg.fresh_environment = j.value("fresh_environment", cfg.fresh_environment);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config", e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("parse failure: ") + e.what());
  }
  return experiment_config_from_json(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("out_dir");
  j.erase("threads");
  const std::string bytes = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ResultEnvelope run_experiment(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);

  ResultEnvelope env_out;
  env_out.config_hash = config_hash(cfg);
  env_out.tool_version = kToolVersion;
  env_out.out_dir = cfg.out_dir;
  env_out.started_at = now_iso();

  const double threshold =
      cfg.escape_threshold > 0.0 ? cfg.escape_threshold : cfg.sim.horizon / 8.0;
  const KindContext ctx{cfg, threshold, cfg.directions[0]};

  json summary{{"kind", to_string(cfg.kind)},
               {"config_hash", env_out.config_hash},
               {"tool_version", env_out.tool_version},
               {"n", cfg.ensemble},
               {"horizon", cfg.sim.horizon},
               {"dt", cfg.sim.dt}};
  std::vector<json> rows;

  switch (cfg.kind) {
    case ExperimentKind::simulate: run_simulate(ctx, summary, rows); break;
    case ExperimentKind::regen: run_regen(ctx, summary, rows); break;
    case ExperimentKind::velocity: run_velocity(ctx, summary, rows); break;
    case ExperimentKind::zeroone: run_zeroone(ctx, summary, rows); break;
    case ExperimentKind::encounter: run_encounter(ctx, summary, rows); break;
    case ExperimentKind::oscillation: run_oscillation(ctx, summary, rows); break;
  }

  fs::create_directories(cfg.out_dir);
  std::string jsonl;
  for (const auto& r : rows) {
    jsonl += r.dump();
    jsonl += '\n';
  }
  write_text(fs::path(cfg.out_dir) / "replicates.jsonl", jsonl, env_out.files);
  write_text(fs::path(cfg.out_dir) / "summary.json", summary.dump(2) + "\n",
             env_out.files);

  if (cfg.kind == ExperimentKind::encounter) {
    std::string csv = "L,y_level,n,encounters,rate,ci_low,ci_high\n";
    for (const auto& row : summary.at("levels")) {
      char line[160];
      std::snprintf(line, sizeof(line), "%g,%g,%lld,%lld,%.6f,%.6f,%.6f\n",
                    row.at("level").get<double>(), row.at("y_level").get<double>(),
                    static_cast<long long>(row.at("pairs").get<std::int64_t>()),
                    static_cast<long long>(row.at("encounters").get<std::int64_t>()),
                    row.at("rate").at("p_hat").get<double>(),
                    row.at("rate").at("lo").get<double>(),
                    row.at("rate").at("hi").get<double>());
      csv += line;
    }
    write_text(fs::path(cfg.out_dir) / "encounter.csv", csv, env_out.files);
  }

  env_out.finished_at = now_iso();
  const json run_info{{"config_hash", env_out.config_hash},
                      {"tool_version", env_out.tool_version},
                      {"started_at", env_out.started_at},
                      {"finished_at", env_out.finished_at}};
  write_text(fs::path(cfg.out_dir) / "run_info.json", run_info.dump(2) + "\n",
             env_out.files);
  env_out.summary = std::move(summary);
  return env_out;
}

PlotOutcome emit_plots(const ResultEnvelope& envelope, std::span<const std::string> kinds) {
  PlotOutcome out;
  const auto& s = envelope.summary;
  for (const auto& kind : kinds) {
    std::string body, name;
    if (kind == "trace" && s.contains("traces") && !s.at("traces").empty()) {
      std::vector<PlotSeries> series;
      std::size_t idx = 0;
      for (const auto& tr : s.at("traces")) {
        PlotSeries ps;
        ps.name = "replicate " + std::to_string(idx++);
        for (const auto& pt : tr)
          ps.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
        series.push_back(std::move(ps));
      }
      body = svg_line_chart(series, "projected velocity traces", "t", "level / t");
      name = "trace.svg";
    } else if (kind == "tau_hist" && s.contains("pooled_durations") &&
               !s.at("pooled_durations").empty()) {
      const auto vals = s.at("pooled_durations").get<std::vector<double>>();
      const int bins = std::max(4, std::min<int>(20, static_cast<int>(vals.size()) / 10));
      body = svg_histogram_chart(make_histogram(vals, bins),
                                 "renewal increment durations", "duration");
      name = "tau_hist.svg";
    } else if (kind == "encounter_curve" && s.contains("levels") &&
               !s.at("levels").empty()) {
      std::vector<double> x, y, lo, hi;
      for (const auto& row : s.at("levels")) {
        x.push_back(row.at("level").get<double>());
        y.push_back(row.at("rate").at("p_hat").get<double>());
        lo.push_back(row.at("rate").at("lo").get<double>());
        hi.push_back(row.at("rate").at("hi").get<double>());
      }
      body = svg_error_curve(x, y, lo, hi, "encounter rate by window floor", "L", "rate");
      name = "encounter_curve.svg";
    } else if (kind == "running_mean" && s.contains("tau1") &&
               s.at("tau1").contains("running_mean_level") &&
               !s.at("tau1").at("running_mean_level").empty()) {
      PlotSeries ps;
      ps.name = "running mean";
      std::size_t i = 0;
      for (const auto& v : s.at("tau1").at("running_mean_level"))
        ps.points.emplace_back(static_cast<double>(++i), v.get<double>());
      const std::vector<PlotSeries> series{ps};
      body = svg_line_chart(series, "first-block level running mean", "replicate",
                            "mean level");
      name = "running_mean.svg";
    } else {
      out.skipped.push_back(kind);
      continue;
    }
    const fs::path path = fs::path(envelope.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out_dir", "cannot write " + path.string());
    f << body;
    out.files.push_back(path.string());
  }
  return out;
}

}  // namespace rde
