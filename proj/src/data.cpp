#include "roadgp/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "roadgp/errors.hpp"
#include "roadgp/random.hpp"

namespace roadgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ParseError(std::string("invalid ") + column + " value '" + s + "'", line);
  }
  return v;
}

// Most square rows x cols with rows <= cols.
std::pair<int, int> block_shape(int K) {
  int rows = static_cast<int>(std::sqrt(static_cast<double>(K)));
  while (rows > 1 && K % rows != 0) --rows;
  return {rows, K / rows};
}

}  // namespace

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  }
  return true;
}

BlockPartition::BlockPartition(int num_agents, Eigen::Index dim) : dim_(dim) {
  if (num_agents < 1) throw ConfigError("partition needs at least one agent");
  if (dim < 1) throw ConfigError("partition needs at least one spatial dimension");
  if (dim == 1) {
    rows_ = num_agents;
    cols_ = 1;
  } else {
    std::tie(rows_, cols_) = block_shape(num_agents);
  }
}

int BlockPartition::owner(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  auto band = [](double v, int n) {
    return std::clamp(static_cast<int>(std::floor(v * n)), 0, n - 1);
  };
  const int r = band(x[0], rows_);
  const int c = dim_ >= 2 ? band(x[1], cols_) : 0;
  return r * cols_ + c;
}

Box BlockPartition::block(int agent) const {
  Box box{Eigen::VectorXd::Zero(dim_), Eigen::VectorXd::Ones(dim_)};
  const int r = agent / cols_;
  const int c = agent % cols_;
  box.lo[0] = static_cast<double>(r) / rows_;
  box.hi[0] = static_cast<double>(r + 1) / rows_;
  if (dim_ >= 2) {
    box.lo[1] = static_cast<double>(c) / cols_;
    box.hi[1] = static_cast<double>(c + 1) / cols_;
  }
  return box;
}

Eigen::Vector2d Normalization::normalize_coords(double lat, double lon) const {
  Eigen::Vector2d out;
  const Eigen::Vector2d raw(lat, lon);
  for (int i = 0; i < 2; ++i) {
    const double span = coord_max[i] - coord_min[i];
    out[i] = span > 0.0 ? (raw[i] - coord_min[i]) / span : 0.0;
  }
  return out;
}

std::vector<GridRow> read_grid_rows(std::istream& in) {
  std::vector<GridRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"lat", "lon", "t", "value"}) {
        throw ParseError("expected header 'lat,lon,t,value'", lineno);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, found " + std::to_string(fields.size()), lineno);
    }
    GridRow row{};
    row.lat = parse_double(fields[0], lineno, "lat");
    row.lon = parse_double(fields[1], lineno, "lon");
    const double t = parse_double(fields[2], lineno, "t");
    if (t != std::floor(t)) throw ParseError("time index must be an integer", lineno);
    row.t = static_cast<int>(t);
    row.value = parse_double(fields[3], lineno, "value");
    rows.push_back(row);
  }
  if (!header_seen) throw ParseError("empty input, header required", lineno);
  return rows;
}

std::vector<GridRow> read_grid_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file " + path.string());
  return read_grid_rows(in);
}

void write_grid_rows(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "lat,lon,t,value\n";
  out.precision(10);
  for (const auto& r : rows) out << r.lat << ',' << r.lon << ',' << r.t << ',' << r.value << '\n';
}

GridDataset build_grid_dataset(const std::vector<GridRow>& rows, int num_agents, Partition) {
  if (rows.empty()) throw ConfigError("grid dataset has no rows");
  GridDataset ds;
  auto& norm = ds.normalization;
  norm.coord_min = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  norm.coord_max = -norm.coord_min;
  double sum = 0.0;
  for (const auto& r : rows) {
    norm.coord_min = norm.coord_min.cwiseMin(Eigen::Vector2d(r.lat, r.lon));
    norm.coord_max = norm.coord_max.cwiseMax(Eigen::Vector2d(r.lat, r.lon));
    sum += r.value;
  }
  norm.value_mean = sum / static_cast<double>(rows.size());
  double sq = 0.0;
  for (const auto& r : rows) sq += (r.value - norm.value_mean) * (r.value - norm.value_mean);
  norm.value_sd = std::sqrt(sq / static_cast<double>(rows.size()));
  if (!(norm.value_sd > 0.0)) norm.value_sd = 1.0;

  std::map<std::pair<double, double>, int> location_index;
  std::map<int, int> epoch_index;
  for (const auto& r : rows) {
    location_index.emplace(std::make_pair(r.lat, r.lon), 0);
    epoch_index.emplace(r.t, 0);
  }
  int next = 0;
  for (auto& [_, idx] : location_index) idx = next++;
  next = 0;
  for (auto& [t, idx] : epoch_index) {
    idx = next++;
    ds.stream.epochs.push_back(t);
  }

  const auto L = static_cast<Eigen::Index>(location_index.size());
  const auto T = ds.stream.epochs.size();
  const BlockPartition partition(num_agents, 2);
  auto& stream = ds.stream;
  stream.spatial_dim = 2;
  ds.raw_locations.resize(L, 2);
  stream.test_inputs.resize(L, 2);
  stream.test_owner.assign(static_cast<std::size_t>(L), 0);
  std::vector<int> per_agent(static_cast<std::size_t>(num_agents), 0);
  for (const auto& [key, idx] : location_index) {
    ds.raw_locations.row(idx) << key.first, key.second;
    stream.test_inputs.row(idx) = norm.normalize_coords(key.first, key.second).transpose();
    const int owner = partition.owner(stream.test_inputs.row(idx).transpose());
    stream.test_owner[static_cast<std::size_t>(idx)] = owner;
    ++per_agent[static_cast<std::size_t>(owner)];
  }
  for (int k = 0; k < num_agents; ++k) {
    if (per_agent[static_cast<std::size_t>(k)] == 0) {
      throw ConfigError("spatial block of agent " + std::to_string(k) +
                        " contains no grid locations; reduce the number of agents");
    }
  }

  // Dense (epoch, location) table; duplicates keep the last row.
  Eigen::MatrixXd table = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(T), L, kNaN);
  for (const auto& r : rows) {
    table(epoch_index.at(r.t), location_index.at({r.lat, r.lon})) = norm.normalize_value(r.value);
  }

  stream.batches.resize(T);
  stream.test_truth.resize(T);
  for (std::size_t e = 0; e < T; ++e) {
    stream.test_truth[e] = table.row(static_cast<Eigen::Index>(e)).transpose();
    auto& per_epoch = stream.batches[e];
    per_epoch.resize(static_cast<std::size_t>(num_agents));
    for (int k = 0; k < num_agents; ++k) {
      std::vector<Eigen::Index> members;
      for (Eigen::Index l = 0; l < L; ++l) {
        if (stream.test_owner[static_cast<std::size_t>(l)] == k && !std::isnan(table(static_cast<Eigen::Index>(e), l))) {
          members.push_back(l);
        }
      }
      StreamBatch& b = per_epoch[static_cast<std::size_t>(k)];
      b.agent = k;
      b.t = stream.epochs[e];
      b.X.resize(static_cast<Eigen::Index>(members.size()), 2);
      b.y.resize(static_cast<Eigen::Index>(members.size()));
      for (std::size_t i = 0; i < members.size(); ++i) {
        b.X.row(static_cast<Eigen::Index>(i)) = stream.test_inputs.row(members[i]);
        b.y[static_cast<Eigen::Index>(i)] = table(static_cast<Eigen::Index>(e), members[i]);
      }
    }
  }
  stream.output_sd = 1.0;
  return ds;
}

GridDataset load_grid_dataset(const std::filesystem::path& path, int num_agents, Partition partition) {
  return build_grid_dataset(read_grid_rows(path), num_agents, partition);
}

std::vector<GridRow> synth_weather_rows(int nx, int ny, int epochs, std::uint64_t seed) {
  if (nx < 2 || ny < 2 || epochs < 1) throw ConfigError("weather grid needs nx, ny >= 2 and epochs >= 1");
  Rng rng(derive_seed(seed, 0x77));
  std::vector<GridRow> rows;
  rows.reserve(static_cast<std::size_t>(nx) * ny * epochs);
  auto bump = [](double lat, double lon, double clat, double clon, double slat, double slon) {
    const double a = (lat - clat) / slat;
    const double b = (lon - clon) / slon;
    return std::exp(-0.5 * (a * a + b * b));
  };
  for (int t = 1; t <= epochs; ++t) {
    const double season = std::sin(2.0 * std::numbers::pi * (t - 4) / 12.0);
    for (int i = 0; i < nx; ++i) {
      const double lat = 35.0 + 15.0 * i / (nx - 1);
      for (int j = 0; j < ny; ++j) {
        const double lon = 50.0 + 30.0 * j / (ny - 1);
        double v = 14.0 - 0.7 * (lat - 35.0);
        v += 4.0 * bump(lat, lon, 41.0, 60.0, 2.5, 5.0);
        v -= 7.0 * bump(lat, lon, 39.0, 73.0, 2.0, 3.5);  // highlands
        v += (13.0 + 0.4 * (lat - 35.0)) * season;
        v += 2.0 * bump(lat, lon, 38.0 + 0.2 * t, 55.0 + 0.4 * t, 3.0, 6.0);  // drifting anomaly
        v += 0.02 * t;
        v += 0.3 * rng.normal();
        rows.push_back({lat, lon, t, v});
      }
    }
  }
  return rows;
}

double SyntheticStream::truth(std::size_t epoch_index, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return feature_map(basis, x).dot(theta.at(epoch_index));
}

SyntheticStream synth_stream(const SynthParams& p) {
  if (p.dim < 1 || p.num_agents < 1 || p.epochs < 1 || p.points_per_agent < 0 || p.test_grid < 1) {
    throw ConfigError("invalid synthetic stream parameters");
  }
  if (p.truth_kernel.spatial_dim() != p.dim || p.truth_kernel.temporal_lengthscale) {
    throw ConfigError("synthetic truth kernel must be spatial with one lengthscale per dimension");
  }
  if (p.drift_scale < 0.0) throw ConfigError("drift scale must be non-negative");

  SyntheticStream out{StreamData{}, sample_frequencies(p.truth_kernel, p.truth_features, p.dim,
                                                       derive_seed(p.seed, 1)),
                      {}};
  Rng theta_rng(derive_seed(p.seed, 2));
  Rng point_rng(derive_seed(p.seed, 3));
  const double drift = p.kind == SynthKind::drifting_gp ? p.drift_scale : 0.0;
  const Eigen::Index dim_theta = out.basis.feature_dim();
  const double prior_sd = std::sqrt(p.truth_kernel.prior_variance);
  const double noise_sd = std::sqrt(p.truth_kernel.obs_variance);

  Eigen::VectorXd theta(dim_theta);
  for (Eigen::Index i = 0; i < dim_theta; ++i) theta[i] = prior_sd * theta_rng.normal();

  const BlockPartition partition(p.num_agents, p.dim);
  auto& data = out.data;
  data.spatial_dim = p.dim;

  // Evaluation grid: cell centers, test_grid points per dimension.
  Eigen::Index n_test = 1;
  for (Eigen::Index i = 0; i < p.dim; ++i) n_test *= p.test_grid;
  data.test_inputs.resize(n_test, p.dim);
  data.test_owner.resize(static_cast<std::size_t>(n_test));
  for (Eigen::Index r = 0; r < n_test; ++r) {
    Eigen::Index rem = r;
    for (Eigen::Index i = p.dim - 1; i >= 0; --i) {
      data.test_inputs(r, i) = (static_cast<double>(rem % p.test_grid) + 0.5) / p.test_grid;
      rem /= p.test_grid;
    }
    data.test_owner[static_cast<std::size_t>(r)] = partition.owner(data.test_inputs.row(r).transpose());
  }

  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (int t = 1; t <= p.epochs; ++t) {
    if (t > 1) {
      for (Eigen::Index i = 0; i < dim_theta; ++i) theta[i] += drift * theta_rng.normal();
    }
    out.theta.push_back(theta);
    data.epochs.push_back(t);
    std::vector<StreamBatch> per_agent;
    for (int k = 0; k < p.num_agents; ++k) {
      const Box box = partition.block(k);
      StreamBatch b;
      b.agent = k;
      b.t = t;
      b.X.resize(p.points_per_agent, p.dim);
      b.y.resize(p.points_per_agent);
      for (int i = 0; i < p.points_per_agent; ++i) {
        for (Eigen::Index c = 0; c < p.dim; ++c) b.X(i, c) = point_rng.uniform(box.lo[c], box.hi[c]);
        b.y[i] = feature_map(out.basis, b.X.row(i).transpose()).dot(theta) + noise_sd * point_rng.normal();
        sum += b.y[i];
        sq += b.y[i] * b.y[i];
        ++count;
      }
      per_agent.push_back(std::move(b));
    }
    data.batches.push_back(std::move(per_agent));
    data.test_truth.push_back(feature_matrix(out.basis, data.test_inputs).transpose() * theta);
  }
  if (count > 1) {
    const double mean = sum / static_cast<double>(count);
    data.output_sd = std::sqrt(std::max(0.0, sq / static_cast<double>(count) - mean * mean));
  }
  return out;
}

void OutlierSpec::validate(Eigen::Index dim) const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("outlier fraction must lie in [0, 1]");
  if (!(magnitude_sd > 0.0)) throw ConfigError("outlier magnitude must be positive");
  if (!(jitter >= 0.0)) throw ConfigError("outlier jitter must be non-negative");
  if (region) {
    if (region->lo.size() != dim || region->hi.size() != dim) {
      throw ConfigError("outlier region must give lo/hi for each of the " + std::to_string(dim) +
                        " input dimensions");
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (region->lo[i] > region->hi[i] || region->lo[i] > 1.0 || region->hi[i] < 0.0) {
        throw ConfigError("outlier region lies outside the normalized domain");
      }
    }
  }
}

std::size_t inject_outliers(std::vector<std::vector<StreamBatch>>& batches,
                            const std::vector<int>& epochs, const OutlierSpec& spec, double output_sd) {
  const auto it = std::find(epochs.begin(), epochs.end(), spec.epoch);
  if (it == epochs.end()) throw ConfigError("outlier epoch " + std::to_string(spec.epoch) + " is not in the stream");
  auto& per_agent = batches[static_cast<std::size_t>(it - epochs.begin())];
  if (!per_agent.empty()) spec.validate(per_agent.front().X.cols());

  std::size_t total = 0;
  for (auto& batch : per_agent) {
    if (spec.agents &&
        std::find(spec.agents->begin(), spec.agents->end(), batch.agent) == spec.agents->end()) {
      continue;
    }
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index i = 0; i < batch.y.size(); ++i) {
      if (!spec.region || spec.region->contains(batch.X.row(i).transpose())) candidates.push_back(i);
    }
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(batch.agent)));
    const double expected = spec.fraction * static_cast<double>(candidates.size());
    auto count = static_cast<std::size_t>(std::floor(expected));
    if (rng.bernoulli(expected - std::floor(expected))) ++count;
    count = std::min(count, candidates.size());
    // Partial Fisher-Yates: the first `count` slots are a uniform subset.
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + rng.uniform_index(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      const double u = rng.uniform(-1.0, 1.0);
      batch.y[candidates[i]] += spec.magnitude_sd * output_sd * (1.0 + spec.jitter * u);
    }
    total += count;
  }
  return total;
}

}  // namespace roadgp
