#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roadgp/features.hpp"

namespace roadgp {

/// Observations received by one agent at one epoch.
struct StreamBatch {
  int agent = 0;
  int t = 0;
  Eigen::MatrixXd X;  // N x d, normalized inputs
  Eigen::VectorXd y;  // N
};

/// Axis-aligned box in normalized input coordinates.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Splits [0,1]^d into K contiguous rectangular blocks: the first input
/// dimension into `rows` bands and (for d >= 2) the second into `cols`.
class BlockPartition {
 public:
  BlockPartition(int num_agents, Eigen::Index dim);

  int num_agents() const { return rows_ * cols_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int owner(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Box block(int agent) const;

 private:
  int rows_;
  int cols_;
  Eigen::Index dim_;
};

/// Everything the epoch loop consumes: per-epoch per-agent batches plus the
/// noise-free evaluation targets for each epoch.
struct StreamData {
  Eigen::Index spatial_dim = 0;
  std::vector<int> epochs;
  std::vector<std::vector<StreamBatch>> batches;  // [epoch index][agent]
  Eigen::MatrixXd test_inputs;                    // M x d
  std::vector<int> test_owner;                    // agent owning each test input
  std::vector<Eigen::VectorXd> test_truth;        // [epoch index], NaN where unknown
  double output_sd = 1.0;                         // of the normalized outputs
};

/// Min-max coordinate scaling and output standardization of a gridded file.
struct Normalization {
  Eigen::Vector2d coord_min = Eigen::Vector2d::Zero();
  Eigen::Vector2d coord_max = Eigen::Vector2d::Ones();
  double value_mean = 0.0;
  double value_sd = 1.0;

  Eigen::Vector2d normalize_coords(double lat, double lon) const;
  double normalize_value(double v) const { return (v - value_mean) / value_sd; }
  double denormalize_value(double z) const { return z * value_sd + value_mean; }
  double denormalize_sd(double sd) const { return sd * value_sd; }
};

struct GridRow {
  double lat;
  double lon;
  int t;
  double value;
};

/// Reads `lat,lon,t,value` rows (header required; extra columns rejected).
std::vector<GridRow> read_grid_rows(std::istream& in);
std::vector<GridRow> read_grid_rows(const std::filesystem::path& path);
void write_grid_rows(std::ostream& out, const std::vector<GridRow>& rows);

struct GridDataset {
  StreamData stream;
  Normalization normalization;
  Eigen::MatrixXd raw_locations;  // L x 2 (lat, lon)
};

enum class Partition { spatial_blocks };

/// Normalizes space to [0,1]^2 and values to zero mean, unit variance,
/// keeps time as the integer epoch, and assigns every location to the
/// agent owning its spatial block. Every location observed at an epoch is
/// in that epoch's batch and in its evaluation targets.
GridDataset build_grid_dataset(const std::vector<GridRow>& rows, int num_agents,
                               Partition partition = Partition::spatial_blocks);
GridDataset load_grid_dataset(const std::filesystem::path& path, int num_agents,
                              Partition partition = Partition::spatial_blocks);

/// Smooth seasonal temperature-like field on an nx x ny lat/lon grid over
/// epochs 1..T, with small measurement noise. Stands in for gridded
/// climate data.
std::vector<GridRow> synth_weather_rows(int nx, int ny, int epochs, std::uint64_t seed);

enum class SynthKind { static_gp, drifting_gp };

struct SynthParams {
  SynthKind kind = SynthKind::static_gp;
  Eigen::Index dim = 1;
  int num_agents = 1;
  int epochs = 10;
  int points_per_agent = 20;
  KernelSpec truth_kernel;          // obs_variance doubles as the noise variance
  Eigen::Index truth_features = 50;
  double drift_scale = 0.0;         // std of each theta random-walk step
  int test_grid = 20;               // evaluation points per dimension
  std::uint64_t seed = 0;
};

/// Streams whose ground truth is phi(x)' theta_t in a known basis.
struct SyntheticStream {
  StreamData data;
  FeatureMap basis;
  std::vector<Eigen::VectorXd> theta;  // per epoch

  double truth(std::size_t epoch_index, const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Epochs are numbered 1..T. Theta starts from N(0, prior_var I) and the
/// drifting kind adds N(0, drift^2 I) each epoch; the draw sequence is the
/// same for both kinds so zero drift reproduces the static stream.
SyntheticStream synth_stream(const SynthParams& params);

struct OutlierSpec {
  int epoch = 0;
  double fraction = 0.3;
  double magnitude_sd = 8.0;
  std::optional<Box> region;
  std::optional<std::vector<int>> agents;
  std::uint64_t seed = 0;
  double jitter = 0.25;  // relative spread of the shift, u ~ U(-1, 1)

  void validate(Eigen::Index dim) const;
};

/// Shifts a random subset of the targeted observations at `spec.epoch` by
/// magnitude_sd * output_sd * (1 + jitter * u). Per batch, the count is
/// floor(f n) plus a Bernoulli draw on the remainder, where n counts the
/// observations inside the region. Returns the number of contaminated
/// observations.
std::size_t inject_outliers(std::vector<std::vector<StreamBatch>>& batches,
                            const std::vector<int>& epochs, const OutlierSpec& spec,
                            double output_sd);

}  // namespace roadgp
