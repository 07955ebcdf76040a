#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rde/coupling.hpp"
#include "rde/env_field.hpp"
#include "rde/sde_sim.hpp"

namespace rde {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind { simulate, regen, velocity, zeroone, encounter, oscillation };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from(const std::string& name);

struct CouplingParams {
  double success_prob = 0.1;
  CouplingMode mode = CouplingMode::forced_bridge;
  double guard_gap = -1.0;  // negative -> ten dependence ranges
};

struct EncounterParams {
  std::vector<double> levels;   // window floors L, one estimate per entry
  std::int64_t pairs = 0;
  double ball_radius = 0.0;     // zero -> the environment dependence range
};

struct OscillationParams {
  double level_scale = 0.0;  // L = 3 L'; zero -> six dependence ranges
  int max_index = 20;
  int settle_bound_max = 10;
  std::vector<int> alphas{2, 3, 4};
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::simulate;
  EnvironmentSpec env;
  SimConfig sim;
  CouplingParams coupling;
  EncounterParams encounter;
  OscillationParams oscillation;
  std::vector<Vec> directions{{1.0, 0.0}};
  std::int64_t ensemble = 1;
  double escape_threshold = 0.0;  // zero -> horizon / 8
  bool fresh_environment = true;  // fresh omega per replicate; false pins one
  std::string out_dir = "out";
  std::uint64_t master_seed = 0;
  int threads = 1;
};

void validate_experiment_config(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Hash of the canonical serialization with out_dir and threads removed: the
// two knobs that may not change any numeric output.
std::string config_hash(const ExperimentConfig& cfg);

struct ResultEnvelope {
  std::string config_hash;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;
  std::string out_dir;
  nlohmann::json summary;          // timestamp-free, byte-stable for a config
  std::vector<std::string> files;  // paths written under out_dir
};

// Dispatches on cfg.kind, runs the replicate ensemble (slot-indexed parallel
// map; aggregation is sequential so results do not depend on cfg.threads),
// and writes replicates.jsonl, summary.json, run_info.json (timestamps live
// only there), and kind-specific tables under cfg.out_dir.
ResultEnvelope run_experiment(const ExperimentConfig& cfg);

struct PlotOutcome {
  std::vector<std::string> files;
  std::vector<std::string> skipped;  // requested kinds whose series are absent
};

// kinds from {"trace", "tau_hist", "encounter_curve", "running_mean"};
// missing series are listed and skipped, never an error.
PlotOutcome emit_plots(const ResultEnvelope& envelope, std::span<const std::string> kinds);

}  // namespace rde
