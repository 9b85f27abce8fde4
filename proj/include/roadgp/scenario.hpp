#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roadgp/consensus.hpp"
#include "roadgp/data.hpp"
#include "roadgp/dynamics.hpp"
#include "roadgp/ensemble.hpp"
#include "roadgp/random.hpp"
#include "roadgp/robust.hpp"

namespace roadgp {

enum class StreamKind { synthetic, grid_file, synth_weather };

struct StreamSource {
  StreamKind kind = StreamKind::synthetic;
  SynthParams synthetic;           // kind == synthetic (num_agents taken from topology)
  std::filesystem::path path;      // kind == grid_file
  int weather_nx = 20;             // kind == synth_weather
  int weather_ny = 20;
  int weather_epochs = 48;
  std::uint64_t weather_seed = 0;
};

enum class ExchangeMode {
  gossip,  // consensus_sum over the topology
  local,   // raw local increments, no exchange and no K scaling
  exact,   // exact network sums, as a fusion center would compute
};

enum class EvalMode { global, stitched, both };

struct EvalConfig {
  std::optional<std::vector<int>> epochs;  // all epochs when absent
  EvalMode mode = EvalMode::global;
  std::optional<Box> region;               // restricts the test inputs
  bool centralized = false;                // also score the fusion-center oracle
  bool w2 = false;
  bool oracle_robust_weights = true;       // false: oracle uses unit weights
  std::vector<int> snapshots;
};

struct EnsembleConfig {
  std::vector<double> lengthscales{0.1};
  std::vector<double> prior_variances{1.0};
  double obs_variance = 0.05;
  std::optional<double> temporal_lengthscale;
  Eigen::Index num_features = 200;
  std::uint64_t seed = 0;
  bool shared_evidence = true;
};

struct Scenario {
  std::uint64_t seed = 0;
  TopologyKind topology = TopologyKind::ring;
  int num_agents = 4;
  std::vector<std::pair<int, int>> custom_edges;
  ConsensusConfig consensus;
  ExchangeMode exchange = ExchangeMode::gossip;
  EnsembleConfig ensemble;
  DynamicsConfig dynamics;
  RobustConfig robust;
  StreamSource stream;
  std::optional<OutlierSpec> outliers;
  EvalConfig eval;

  /// Ensemble spec for `spatial_dim` inputs; adds the temporal lengthscale
  /// only in spatiotemporal mode.
  EnsembleSpec ensemble_spec(Eigen::Index spatial_dim) const;
  void validate() const;
};

/// Parses the INI-style scenario format (see docs/config.md). `overrides`
/// are `section.key=value` strings applied on top of the file.
Scenario parse_scenario(std::istream& in, const std::vector<std::string>& overrides = {});
Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {});
/// Writes every field, so parsing the output reproduces the scenario.
void write_scenario(std::ostream& out, const Scenario& scn);

struct MetricsRecord {
  int t = 0;
  std::string agent;  // agent index, "stitched" or "central"
  double rmse = 0.0;
  double npll = 0.0;
  std::optional<double> w2_to_centralized;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

/// Read-only view handed to an observer after each epoch's update.
struct EpochView {
  int t = 0;
  std::size_t epoch_index = 0;
  const std::vector<EnsembleState>& agents;
  const EnsembleState& central;
  const std::vector<FeatureMap>& feature_maps;
};

struct RunOptions {
  std::optional<std::filesystem::path> snapshot_dir;
  std::function<void(const EpochView&)> observer;
};

struct RunResult {
  std::vector<MetricsRecord> metrics;
  std::vector<EnsembleState> agents;  // final per-agent states
  EnsembleState central;              // final fusion-center oracle
  std::size_t outliers_injected = 0;
};

/// Materializes the configured stream (with outliers injected).
StreamData prepare_stream(const Scenario& scn, std::size_t* outliers_injected = nullptr);

/// Per epoch, agent and member: forget, weigh residuals, build the local
/// increment, exchange, apply, accumulate evidence; then evaluate.
RunResult run_scenario(const Scenario& scn, const RunOptions& options = {});
RunResult run_scenario(const Scenario& scn, const StreamData& data, const RunOptions& options = {});

// Snapshot file: "RGPSNAP\0" | u32 version (1) | u32 members |
// f64[members] log_evidence | members x InfoState record (see write_state).
void write_snapshot(std::ostream& out, const EnsembleState& state);
EnsembleState read_snapshot(std::istream& in);

}  // namespace roadgp
