// roadgp command-line harness: run scenarios, sweep parameters, and write
// the bundled synthetic weather sample.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "roadgp/roadgp.hpp"

namespace fs = std::filesystem;
using namespace roadgp;

namespace {

void write_outputs(const fs::path& dir, const Scenario& scn, const RunResult& result) {
  fs::create_directories(dir);
  std::ofstream metrics(dir / "metrics.csv");
  write_metrics_csv(metrics, result.metrics);
  std::ofstream resolved(dir / "config_resolved.txt");
  write_scenario(resolved, scn);
  if (!metrics || !resolved) throw std::runtime_error("failed writing outputs to " + dir.string());
}

std::vector<std::string> base_overrides(const std::vector<std::string>& sets, const std::optional<std::uint64_t>& seed,
                                        const std::string& snapshots) {
  std::vector<std::string> out = sets;
  if (seed) out.push_back("seed=" + std::to_string(*seed));
  if (!snapshots.empty()) out.push_back("eval.snapshots=" + snapshots);
  return out;
}

int run_command(const fs::path& config, const fs::path& out_dir, const std::vector<std::string>& overrides) {
  const Scenario scn = load_scenario(config, overrides);
  RunOptions options;
  options.snapshot_dir = out_dir / "snapshots";
  const RunResult result = run_scenario(scn, options);
  write_outputs(out_dir, scn, result);
  std::cout << "wrote " << result.metrics.size() << " metric rows to " << (out_dir / "metrics.csv").string();
  if (result.outliers_injected) std::cout << " (" << result.outliers_injected << " outliers injected)";
  std::cout << "\n";
  return 0;
}

int sweep_command(const fs::path& config, const fs::path& out_dir, const std::string& param,
                  const std::vector<std::string>& overrides) {
  const auto eq = param.find('=');
  if (eq == std::string::npos) throw ConfigError("--param expects key=v1,v2,...");
  const std::string key = param.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream ss(param.substr(eq + 1));
  for (std::string v; std::getline(ss, v, ',');) {
    if (!v.empty()) values.push_back(v);
  }
  if (values.empty()) throw ConfigError("--param lists no values");

  fs::create_directories(out_dir);
  std::ofstream summary(out_dir / "sweep_summary.csv");
  summary << "value,t,mean_rmse,mean_npll,mean_w2\n" << std::setprecision(17);
  for (const auto& value : values) {
    auto run_overrides = overrides;
    run_overrides.push_back(key + "=" + value);
    const Scenario scn = load_scenario(config, run_overrides);
    RunOptions options;
    const fs::path dir = out_dir / (key + "=" + value);
    options.snapshot_dir = dir / "snapshots";
    const RunResult result = run_scenario(scn, options);
    write_outputs(dir, scn, result);

    // Agent-averaged metrics at the last evaluated epoch.
    if (result.metrics.empty()) continue;
    const int last = result.metrics.back().t;
    double rmse_sum = 0.0, npll_sum = 0.0, w2_sum = 0.0;
    int n = 0, n_w2 = 0;
    for (const auto& r : result.metrics) {
      if (r.t != last || r.agent == "central" || r.agent == "stitched") continue;
      rmse_sum += r.rmse;
      npll_sum += r.npll;
      ++n;
      if (r.w2_to_centralized) {
        w2_sum += *r.w2_to_centralized;
        ++n_w2;
      }
    }
    summary << value << ',' << last << ',' << (n ? rmse_sum / n : 0.0) << ',' << (n ? npll_sum / n : 0.0) << ',';
    if (n_w2) summary << w2_sum / n_w2;
    summary << '\n';
    std::cout << key << "=" << value << " done\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust online decentralized random-feature GP simulator"};
  app.require_subcommand(1);

  fs::path config, out_dir;
  std::optional<std::uint64_t> seed;
  std::string snapshots;
  std::vector<std::string> sets;

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config, "Scenario config file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--snapshots", snapshots, "Comma-separated epochs to snapshot");
  run->add_option("--set", sets, "Config override section.key=value (repeatable)");

  std::string param;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario once per parameter value");
  sweep->add_option("config", config, "Scenario config file")->required();
  sweep->add_option("--param", param, "section.key=v1,v2,...")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--seed", seed, "Override the scenario seed");
  sweep->add_option("--snapshots", snapshots, "Comma-separated epochs to snapshot");
  sweep->add_option("--set", sets, "Config override section.key=value (repeatable)");

  fs::path weather_out;
  int nx = 20, ny = 20, epochs = 48;
  std::uint64_t weather_seed = 0;
  auto* weather = app.add_subcommand("gen-weather", "Write a synthetic gridded lat,lon,t,value file");
  weather->add_option("--out", weather_out, "Output CSV path")->required();
  weather->add_option("--nx", nx, "Latitude points");
  weather->add_option("--ny", ny, "Longitude points");
  weather->add_option("--epochs", epochs, "Number of monthly epochs");
  weather->add_option("--seed", weather_seed, "Noise seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config, out_dir, base_overrides(sets, seed, snapshots));
    if (*sweep) return sweep_command(config, out_dir, param, base_overrides(sets, seed, snapshots));
    if (*weather) {
      std::ofstream out(weather_out);
      if (!out) throw std::runtime_error("cannot write " + weather_out.string());
      write_grid_rows(out, synth_weather_rows(nx, ny, epochs, weather_seed));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
