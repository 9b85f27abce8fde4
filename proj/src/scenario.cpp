#include "roadgp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "roadgp/errors.hpp"
#include "roadgp/metrics.hpp"

namespace roadgp {

namespace {

constexpr char kSnapshotMagic[8] = {'R', 'G', 'P', 'S', 'N', 'A', 'P', '\0'};
constexpr std::uint32_t kSnapshotVersion = 1;

// Message layout per member: packed lower triangle of P (column-major),
// then s, then the evidence scalar.
Eigen::VectorXd pack(const Increment& inc, double evidence) {
  const Eigen::Index n = inc.dim();
  Eigen::VectorXd out(n * (n + 1) / 2 + n + 1);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    out.segment(pos, n - j) = inc.P.col(j).tail(n - j);
    pos += n - j;
  }
  out.segment(pos, n) = inc.s;
  out[pos + n] = evidence;
  return out;
}

void unpack_into(const Eigen::VectorXd& msg, InfoState& state, double& evidence) {
  const Eigen::Index n = state.dim();
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i, ++pos) {
      state.D(i, j) += msg[pos];
      if (i != j) state.D(j, i) += msg[pos];
    }
  }
  state.eta += msg.segment(pos, n);
  evidence = msg[pos + n];
}

struct LocalUpdate {
  Increment increment;
  double evidence = 0.0;
};

LocalUpdate local_update(const InfoState& state, const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
                         const RobustConfig& robust) {
  LocalUpdate out;
  if (y.size() == 0) {
    out.increment = Increment::zero(state.dim());
    return out;
  }
  if (!y.allFinite()) throw InvalidArgument("non-finite observation");
  const Posterior post(state);
  const auto preds = post.predict_batch(Phi);
  Eigen::VectorXd weights(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto& p = preds[static_cast<std::size_t>(i)];
    out.evidence += gaussian_log_density(y[i], p.mean, p.variance);
    weights[i] = robust.weight((y[i] - p.mean) / std::sqrt(p.variance));
  }
  out.increment = robust.kind == RobustKind::none
                      ? compute_increment(Phi, y, state.obs_variance)
                      : robust_increment(Phi, y, weights, state.obs_variance);
  return out;
}

Eigen::MatrixXd model_inputs(const Eigen::MatrixXd& X, int t, bool spatiotemporal) {
  return spatiotemporal ? augment_time_rows(X, static_cast<double>(t)) : X;
}

std::string agent_label(int k) { return std::to_string(k); }

}  // namespace

StreamData prepare_stream(const Scenario& scn, std::size_t* outliers_injected) {
  StreamData data;
  switch (scn.stream.kind) {
    case StreamKind::synthetic: {
      SynthParams p = scn.stream.synthetic;
      p.num_agents = scn.num_agents;
      data = synth_stream(p).data;
      break;
    }
    case StreamKind::grid_file:
      data = load_grid_dataset(scn.stream.path, scn.num_agents).stream;
      break;
    case StreamKind::synth_weather:
      data = build_grid_dataset(synth_weather_rows(scn.stream.weather_nx, scn.stream.weather_ny,
                                                   scn.stream.weather_epochs, scn.stream.weather_seed),
                                scn.num_agents)
                 .stream;
      break;
  }
  std::size_t injected = 0;
  if (scn.outliers) injected = inject_outliers(data.batches, data.epochs, *scn.outliers, data.output_sd);
  if (outliers_injected) *outliers_injected = injected;
  return data;
}

RunResult run_scenario(const Scenario& scn, const RunOptions& options) {
  std::size_t injected = 0;
  const StreamData data = prepare_stream(scn, &injected);
  RunResult result = run_scenario(scn, data, options);
  result.outliers_injected = injected;
  return result;
}

RunResult run_scenario(const Scenario& scn, const StreamData& data, const RunOptions& options) {
  scn.validate();
  const int K = scn.num_agents;
  if (data.batches.empty()) throw ConfigError("stream has no epochs");
  for (const auto& per_epoch : data.batches) {
    if (static_cast<int>(per_epoch.size()) != K) {
      throw ConfigError("stream is partitioned for " + std::to_string(per_epoch.size()) +
                        " agents but the topology has " + std::to_string(K));
    }
  }

  const Topology topo = build_topology(scn.topology, K, scn.custom_edges);
  const EnsembleSpec spec = scn.ensemble_spec(data.spatial_dim);
  const std::vector<FeatureMap> maps = ensemble_feature_maps(spec);
  const std::size_t M = maps.size();
  const bool spatiotemporal = scn.dynamics.mode == DynamicsMode::spatiotemporal;
  const RobustConfig oracle_robust = scn.eval.oracle_robust_weights ? scn.robust : RobustConfig{};

  RunResult result;
  result.agents.assign(static_cast<std::size_t>(K), init_ensemble(spec));
  result.central = init_ensemble(spec);
  auto& agents = result.agents;
  auto& central = result.central;

  // Test inputs that have a target and fall inside the evaluation region.
  std::vector<Eigen::Index> region_idx;
  for (Eigen::Index i = 0; i < data.test_inputs.rows(); ++i) {
    if (!scn.eval.region || scn.eval.region->contains(data.test_inputs.row(i).transpose())) {
      region_idx.push_back(i);
    }
  }
  if (options.snapshot_dir && !scn.eval.snapshots.empty()) {
    std::filesystem::create_directories(*options.snapshot_dir);
  }

  for (std::size_t e = 0; e < data.epochs.size(); ++e) {
    const int t = data.epochs[e];
    int current_agent = -1;
    try {
      // Forget, then build each agent's local message per member.
      std::vector<std::vector<Eigen::VectorXd>> messages(M, std::vector<Eigen::VectorXd>(static_cast<std::size_t>(K)));
      std::vector<Eigen::MatrixXd> inputs(static_cast<std::size_t>(K));
      for (int k = 0; k < K; ++k) {
        current_agent = k;
        const StreamBatch& batch = data.batches[e][static_cast<std::size_t>(k)];
        inputs[static_cast<std::size_t>(k)] = model_inputs(batch.X, t, spatiotemporal);
        for (std::size_t m = 0; m < M; ++m) {
          InfoState& state = agents[static_cast<std::size_t>(k)].models[m];
          apply_forgetting_inplace(state, scn.dynamics);
          const Eigen::MatrixXd Phi = feature_matrix(maps[m], inputs[static_cast<std::size_t>(k)]);
          const LocalUpdate upd = local_update(state, Phi, batch.y, scn.robust);
          messages[m][static_cast<std::size_t>(k)] = pack(upd.increment, upd.evidence);
        }
      }
      current_agent = -1;

      // Exchange and apply.
      for (std::size_t m = 0; m < M; ++m) {
        std::vector<Eigen::VectorXd> received;
        switch (scn.exchange) {
          case ExchangeMode::gossip:
            received = consensus_sum(messages[m], topo, scn.consensus);
            break;
          case ExchangeMode::local:
            received = messages[m];
            break;
          case ExchangeMode::exact: {
            Eigen::VectorXd total = Eigen::VectorXd::Zero(messages[m].front().size());
            for (const auto& v : messages[m]) total += v;
            received.assign(static_cast<std::size_t>(K), total);
            break;
          }
        }
        for (int k = 0; k < K; ++k) {
          auto& ens = agents[static_cast<std::size_t>(k)];
          double evidence = 0.0;
          unpack_into(received[static_cast<std::size_t>(k)], ens.models[m], evidence);
          symmetrize(ens.models[m].D);
          const double local_evidence = messages[m][static_cast<std::size_t>(k)][messages[m][static_cast<std::size_t>(k)].size() - 1];
          ens.log_evidence[static_cast<Eigen::Index>(m)] +=
              scn.ensemble.shared_evidence ? evidence : local_evidence;
        }
      }

      // Fusion-center oracle on the pooled batch.
      Eigen::Index pooled_n = 0;
      for (int k = 0; k < K; ++k) pooled_n += data.batches[e][static_cast<std::size_t>(k)].y.size();
      const Eigen::Index in_dim = maps.front().input_dim();
      Eigen::MatrixXd pooled_X(pooled_n, in_dim);
      Eigen::VectorXd pooled_y(pooled_n);
      Eigen::Index row = 0;
      for (int k = 0; k < K; ++k) {
        const auto& y = data.batches[e][static_cast<std::size_t>(k)].y;
        pooled_X.middleRows(row, y.size()) = inputs[static_cast<std::size_t>(k)];
        pooled_y.segment(row, y.size()) = y;
        row += y.size();
      }
      for (std::size_t m = 0; m < M; ++m) {
        InfoState& state = central.models[m];
        apply_forgetting_inplace(state, scn.dynamics);
        const LocalUpdate upd = local_update(state, feature_matrix(maps[m], pooled_X), pooled_y, oracle_robust);
        apply_increment_inplace(state, upd.increment);
        central.log_evidence[static_cast<Eigen::Index>(m)] += upd.evidence;
      }
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "epoch " << t;
      if (current_agent >= 0) msg << ", agent " << current_agent;
      msg << ": " << ex.what();
      throw RunError(msg.str());
    }

    if (options.observer) options.observer(EpochView{t, e, agents, central, maps});

    if (options.snapshot_dir &&
        std::find(scn.eval.snapshots.begin(), scn.eval.snapshots.end(), t) != scn.eval.snapshots.end()) {
      for (int k = 0; k < K; ++k) {
        const auto file = *options.snapshot_dir /
                          ("epoch_" + std::to_string(t) + "_agent_" + std::to_string(k) + ".bin");
        std::ofstream out(file, std::ios::binary);
        if (!out) throw RunError("cannot write snapshot " + file.string());
        write_snapshot(out, agents[static_cast<std::size_t>(k)]);
      }
    }

    const bool evaluate = !scn.eval.epochs || std::find(scn.eval.epochs->begin(), scn.eval.epochs->end(),
                                                        t) != scn.eval.epochs->end();
    if (!evaluate) continue;

    std::vector<Eigen::Index> idx;
    for (const auto i : region_idx) {
      if (!std::isnan(data.test_truth[e][i])) idx.push_back(i);
    }
    if (idx.empty()) continue;
    const auto n_test = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd X_test(n_test, data.test_inputs.cols());
    Eigen::VectorXd truth(n_test);
    for (Eigen::Index i = 0; i < n_test; ++i) {
      X_test.row(i) = data.test_inputs.row(idx[static_cast<std::size_t>(i)]);
      truth[i] = data.test_truth[e][idx[static_cast<std::size_t>(i)]];
    }
    const Eigen::MatrixXd X_model = model_inputs(X_test, t, spatiotemporal);
    std::vector<Eigen::MatrixXd> Phi_test;
    Phi_test.reserve(M);
    for (const auto& fm : maps) Phi_test.push_back(feature_matrix(fm, X_model));

    auto mixture = [&](const EnsembleState& ens) {
      std::vector<std::vector<Prediction>> per_member;
      per_member.reserve(M);
      for (std::size_t m = 0; m < M; ++m) {
        per_member.push_back(Posterior(ens.models[m]).predict_batch(Phi_test[m]));
      }
      const Eigen::VectorXd w = ens.weights();
      std::vector<MixturePrediction> out;
      out.reserve(idx.size());
      std::vector<Prediction> point(M);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t m = 0; m < M; ++m) point[m] = per_member[m][i];
        out.push_back(combine_predictions(w, point));
      }
      return out;
    };
    auto record = [&](const std::string& label, const std::vector<MixturePrediction>& preds,
                      std::optional<double> w2) {
      Eigen::VectorXd means(n_test);
      for (Eigen::Index i = 0; i < n_test; ++i) means[i] = preds[static_cast<std::size_t>(i)].mean;
      result.metrics.push_back({t, label, rmse(means, truth), npll(preds, truth), w2});
    };

    std::vector<Moments> central_moments;
    if (scn.eval.w2) {
      for (std::size_t m = 0; m < M; ++m) central_moments.push_back(posterior_moments(central.models[m]));
    }
    std::vector<std::vector<MixturePrediction>> agent_preds;
    for (int k = 0; k < K; ++k) {
      const auto& ens = agents[static_cast<std::size_t>(k)];
      agent_preds.push_back(mixture(ens));
      if (scn.eval.mode == EvalMode::stitched) continue;
      std::optional<double> w2;
      if (scn.eval.w2) {
        double total = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
          const Moments mk = posterior_moments(ens.models[m]);
          total += wasserstein2_gaussians(mk.mean, mk.covariance, central_moments[m].mean,
                                          central_moments[m].covariance);
        }
        w2 = total / static_cast<double>(M);
      }
      record(agent_label(k), agent_preds.back(), w2);
    }
    if (scn.eval.mode != EvalMode::global) {
      std::vector<MixturePrediction> stitched;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        stitched.push_back(agent_preds[static_cast<std::size_t>(data.test_owner[static_cast<std::size_t>(idx[i])])][i]);
      }
      record("stitched", stitched, std::nullopt);
    }
    if (scn.eval.centralized) record("central", mixture(central), scn.eval.w2 ? std::optional<double>(0.0) : std::nullopt);
  }
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "t,agent,rmse,npll,w2_to_centralized\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.t << ',' << r.agent << ',' << r.rmse << ',' << r.npll << ',';
    if (r.w2_to_centralized) out << *r.w2_to_centralized;
    out << '\n';
  }
}

void write_snapshot(std::ostream& out, const EnsembleState& state) {
  out.write(kSnapshotMagic, sizeof kSnapshotMagic);
  const std::uint32_t version = kSnapshotVersion;
  const auto members = static_cast<std::uint32_t>(state.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&members), sizeof members);
  out.write(reinterpret_cast<const char*>(state.log_evidence.data()),
            static_cast<std::streamsize>(sizeof(double) * members));
  for (const auto& model : state.models) write_state(out, model);
}

EnsembleState read_snapshot(std::istream& in) {
  char magic[sizeof kSnapshotMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0) {
    throw InvalidArgument("not a snapshot file (bad magic)");
  }
  std::uint32_t version = 0, members = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&members), sizeof members);
  if (!in || version != kSnapshotVersion) throw InvalidArgument("unsupported snapshot version");
  EnsembleState state;
  state.log_evidence.resize(members);
  in.read(reinterpret_cast<char*>(state.log_evidence.data()),
          static_cast<std::streamsize>(sizeof(double) * members));
  for (std::uint32_t m = 0; m < members; ++m) state.models.push_back(read_state(in));
  return state;
}

}  // namespace roadgp
