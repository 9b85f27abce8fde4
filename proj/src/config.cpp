#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "roadgp/errors.hpp"
#include "roadgp/scenario.hpp"

namespace roadgp {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"", {"seed"}},
    {"stream",
     {"kind", "path", "synth_kind", "dim", "epochs", "points_per_agent", "truth_lengthscale",
      "truth_features", "truth_prior_variance", "noise_variance", "drift_scale", "test_grid", "seed",
      "nx", "ny"}},
    {"topology", {"kind", "agents", "edges"}},
    {"consensus", {"mode", "rounds", "weights"}},
    {"ensemble",
     {"features", "seed", "lengthscales", "prior_variances", "obs_variance", "temporal_lengthscale",
      "evidence"}},
    {"dynamics", {"mode", "nu"}},
    {"robust", {"kind", "delta", "a", "b", "c"}},
    {"outliers",
     {"enabled", "epoch", "fraction", "magnitude_sd", "region", "agents", "seed", "jitter"}},
    {"eval",
     {"epochs", "mode", "region", "centralized", "w2", "oracle_weighting", "snapshots"}},
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long i = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer seed, got '" + v + "'");
  }
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& path) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }
  bool has(const std::string& path) const { return raw(path).has_value(); }

  std::string str(const std::string& path, const std::string& fallback) const {
    return raw(path).value_or(fallback);
  }
  double real(const std::string& path, double fallback) const {
    const auto v = raw(path);
    return v ? to_double(path, *v) : fallback;
  }
  long long integer(const std::string& path, long long fallback) const {
    const auto v = raw(path);
    return v ? to_int(path, *v) : fallback;
  }
  std::uint64_t seed(const std::string& path, std::uint64_t fallback) const {
    const auto v = raw(path);
    return v ? to_seed(path, *v) : fallback;
  }
  bool flag(const std::string& path, bool fallback) const {
    const auto v = raw(path);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(path + ": expected true/false, got '" + *v + "'");
  }
  std::vector<double> reals(const std::string& path, std::vector<double> fallback) const {
    const auto v = raw(path);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*v)) out.push_back(to_double(path, item));
    return out;
  }
  std::vector<int> ints(const std::string& path) const {
    std::vector<int> out;
    if (const auto v = raw(path)) {
      for (const auto& item : split_list(*v)) out.push_back(static_cast<int>(to_int(path, item)));
    }
    return out;
  }

  template <typename Enum>
  Enum choice(const std::string& path, const std::map<std::string, Enum>& options, Enum fallback) const {
    const auto v = raw(path);
    if (!v) return fallback;
    const auto it = options.find(*v);
    if (it == options.end()) {
      std::string allowed;
      for (const auto& [name, _] : options) allowed += (allowed.empty() ? "" : "|") + name;
      throw ConfigError(path + ": unknown value '" + *v + "' (expected " + allowed + ")");
    }
    return it->second;
  }

 private:
  const pt::ptree& tree_;
};

const std::map<std::string, StreamKind> kStreamKinds{
    {"synthetic", StreamKind::synthetic}, {"grid_file", StreamKind::grid_file}, {"synth_weather", StreamKind::synth_weather}};
const std::map<std::string, SynthKind> kSynthKinds{{"static_gp", SynthKind::static_gp},
                                                   {"drifting_gp", SynthKind::drifting_gp}};
const std::map<std::string, TopologyKind> kTopologies{{"ring", TopologyKind::ring},
                                                      {"complete", TopologyKind::complete},
                                                      {"grid", TopologyKind::grid},
                                                      {"custom", TopologyKind::custom}};
const std::map<std::string, ExchangeMode> kExchange{
    {"gossip", ExchangeMode::gossip}, {"local", ExchangeMode::local}, {"exact", ExchangeMode::exact}};
const std::map<std::string, WeightRule> kWeightRules{{"metropolis", WeightRule::metropolis},
                                                     {"lazy_metropolis", WeightRule::lazy_metropolis}};
const std::map<std::string, DynamicsMode> kDynamics{{"static", DynamicsMode::static_model},
                                                    {"b2p", DynamicsMode::b2p},
                                                    {"ui", DynamicsMode::ui},
                                                    {"spatiotemporal", DynamicsMode::spatiotemporal}};
const std::map<std::string, RobustKind> kRobust{
    {"none", RobustKind::none}, {"huber", RobustKind::huber}, {"hampel", RobustKind::hampel}};
const std::map<std::string, EvalMode> kEvalModes{
    {"global", EvalMode::global}, {"stitched", EvalMode::stitched}, {"both", EvalMode::both}};

template <typename Enum>
std::string name_of(const std::map<std::string, Enum>& options, Enum value) {
  for (const auto& [name, v] : options) {
    if (v == value) return name;
  }
  return "?";
}

Box parse_box(const std::string& key, const std::vector<double>& bounds) {
  if (bounds.empty() || bounds.size() % 2 != 0) {
    throw ConfigError(key + ": expected lo,hi pairs per dimension");
  }
  const auto dim = static_cast<Eigen::Index>(bounds.size() / 2);
  Box box{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
  for (Eigen::Index i = 0; i < dim; ++i) {
    box.lo[i] = bounds[static_cast<std::size_t>(2 * i)];
    box.hi[i] = bounds[static_cast<std::size_t>(2 * i + 1)];
  }
  return box;
}

std::string format_box(const Box& box) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < box.lo.size(); ++i) {
    out << (i ? ", " : "") << box.lo[i] << ", " << box.hi[i];
  }
  return out.str();
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? ", " : "") << xs[i];
  return out.str();
}

void check_known_keys(const pt::ptree& tree) {
  for (const auto& [name, child] : tree) {
    if (child.empty()) {
      if (!kKnownKeys.at("").count(name)) throw ConfigError("unknown top-level key '" + name + "'");
      continue;
    }
    const auto section = kKnownKeys.find(name);
    if (section == kKnownKeys.end() || name.empty()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, _] : child) {
      if (!section->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    }
  }
}

void apply_override(pt::ptree& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
  tree.put(pt::ptree::path_type(key, '.'), value);
}

}  // namespace

EnsembleSpec Scenario::ensemble_spec(Eigen::Index spatial_dim) const {
  const auto temporal = dynamics.mode == DynamicsMode::spatiotemporal ? ensemble.temporal_lengthscale
                                                                       : std::nullopt;
  return EnsembleSpec::grid(spatial_dim, ensemble.lengthscales, ensemble.prior_variances,
                            ensemble.obs_variance, temporal, ensemble.num_features, ensemble.seed);
}

void Scenario::validate() const {
  if (num_agents < 1) throw ConfigError("topology.agents must be >= 1");
  if (consensus.rounds < 0) throw ConfigError("consensus.rounds must be >= 0");
  if (ensemble.lengthscales.empty() || ensemble.prior_variances.empty()) {
    throw ConfigError("ensemble needs at least one lengthscale and one prior variance");
  }
  if (ensemble.num_features < 1) throw ConfigError("ensemble.features must be >= 1");
  try {
    dynamics.validate();
    robust.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (dynamics.mode == DynamicsMode::spatiotemporal && !ensemble.temporal_lengthscale) {
    throw ConfigError("spatiotemporal dynamics require ensemble.temporal_lengthscale");
  }
  if (topology == TopologyKind::custom) {
    try {
      build_topology(topology, num_agents, custom_edges);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("topology: ") + e.what());
    }
  }
  if (stream.kind == StreamKind::grid_file && stream.path.empty()) {
    throw ConfigError("stream.path is required for grid_file streams");
  }
}

Scenario parse_scenario(std::istream& in, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(tree, o);
  check_known_keys(tree);
  const Reader r(tree);

  Scenario s;
  s.seed = r.seed("seed", 0);
  auto sub_seed = [&](const std::string& key, std::uint64_t tag) {
    return r.seed(key, derive_seed(s.seed, tag));
  };

  s.topology = r.choice("topology.kind", kTopologies, TopologyKind::ring);
  s.num_agents = static_cast<int>(r.integer("topology.agents", 4));
  if (const auto edges = r.raw("topology.edges")) {
    for (const auto& e : split_list(*edges)) {
      const auto dash = e.find('-');
      if (dash == std::string::npos) throw ConfigError("topology.edges: expected i-j, got '" + e + "'");
      s.custom_edges.emplace_back(static_cast<int>(to_int("topology.edges", trim(e.substr(0, dash)))),
                                  static_cast<int>(to_int("topology.edges", trim(e.substr(dash + 1)))));
    }
  }

  s.exchange = r.choice("consensus.mode", kExchange, ExchangeMode::gossip);
  s.consensus.rounds = static_cast<int>(r.integer("consensus.rounds", 1));
  s.consensus.weight_rule = r.choice("consensus.weights", kWeightRules, WeightRule::metropolis);

  auto& ens = s.ensemble;
  ens.num_features = static_cast<Eigen::Index>(r.integer("ensemble.features", 200));
  ens.seed = sub_seed("ensemble.seed", 11);
  ens.lengthscales = r.reals("ensemble.lengthscales", {0.1});
  ens.prior_variances = r.reals("ensemble.prior_variances", {1.0});
  ens.obs_variance = r.real("ensemble.obs_variance", 0.05);
  if (r.has("ensemble.temporal_lengthscale")) {
    ens.temporal_lengthscale = r.real("ensemble.temporal_lengthscale", 0.0);
  }
  const std::string evidence = r.str("ensemble.evidence", "shared");
  if (evidence != "shared" && evidence != "local") {
    throw ConfigError("ensemble.evidence: expected shared|local, got '" + evidence + "'");
  }
  ens.shared_evidence = evidence == "shared";

  s.dynamics.mode = r.choice("dynamics.mode", kDynamics, DynamicsMode::static_model);
  s.dynamics.nu = r.real("dynamics.nu", 1.0);

  s.robust.kind = r.choice("robust.kind", kRobust, RobustKind::none);
  s.robust.delta = r.real("robust.delta", 1.345);
  s.robust.a = r.real("robust.a", 2.0);
  s.robust.b = r.real("robust.b", 4.0);
  s.robust.c = r.real("robust.c", 8.0);

  auto& st = s.stream;
  st.kind = r.choice("stream.kind", kStreamKinds, StreamKind::synthetic);
  st.path = r.str("stream.path", "");
  auto& syn = st.synthetic;
  syn.kind = r.choice("stream.synth_kind", kSynthKinds, SynthKind::static_gp);
  syn.dim = static_cast<Eigen::Index>(r.integer("stream.dim", 1));
  syn.epochs = static_cast<int>(r.integer("stream.epochs", st.kind == StreamKind::synth_weather ? 48 : 10));
  syn.points_per_agent = static_cast<int>(r.integer("stream.points_per_agent", 20));
  const double truth_ell = r.real("stream.truth_lengthscale", 0.2);
  syn.truth_kernel.spatial_lengthscales = Eigen::VectorXd::Constant(std::max<Eigen::Index>(syn.dim, 1), truth_ell);
  syn.truth_kernel.prior_variance = r.real("stream.truth_prior_variance", 1.0);
  syn.truth_kernel.obs_variance = r.real("stream.noise_variance", 0.01);
  syn.truth_features = static_cast<Eigen::Index>(r.integer("stream.truth_features", 50));
  syn.drift_scale = r.real("stream.drift_scale", 0.0);
  syn.test_grid = static_cast<int>(r.integer("stream.test_grid", 20));
  syn.seed = sub_seed("stream.seed", 12);
  syn.num_agents = s.num_agents;
  st.weather_nx = static_cast<int>(r.integer("stream.nx", 20));
  st.weather_ny = static_cast<int>(r.integer("stream.ny", 20));
  st.weather_epochs = syn.epochs;
  st.weather_seed = syn.seed;

  if (r.flag("outliers.enabled", tree.get_child_optional("outliers").has_value())) {
    OutlierSpec o;
    o.epoch = static_cast<int>(r.integer("outliers.epoch", 0));
    o.fraction = r.real("outliers.fraction", 0.3);
    o.magnitude_sd = r.real("outliers.magnitude_sd", 8.0);
    o.jitter = r.real("outliers.jitter", 0.25);
    o.seed = sub_seed("outliers.seed", 13);
    if (r.has("outliers.region")) o.region = parse_box("outliers.region", r.reals("outliers.region", {}));
    if (r.has("outliers.agents")) o.agents = r.ints("outliers.agents");
    s.outliers = o;
  }

  auto& ev = s.eval;
  if (const auto epochs = r.raw("eval.epochs"); epochs && *epochs != "all") ev.epochs = r.ints("eval.epochs");
  ev.mode = r.choice("eval.mode", kEvalModes, EvalMode::global);
  if (r.has("eval.region")) ev.region = parse_box("eval.region", r.reals("eval.region", {}));
  ev.centralized = r.flag("eval.centralized", false);
  ev.w2 = r.flag("eval.w2", false);
  const std::string oracle = r.str("eval.oracle_weighting", "identical");
  if (oracle != "identical" && oracle != "unit") {
    throw ConfigError("eval.oracle_weighting: expected identical|unit, got '" + oracle + "'");
  }
  ev.oracle_robust_weights = oracle == "identical";
  ev.snapshots = r.ints("eval.snapshots");

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Scenario s = parse_scenario(in, overrides);
  // Relative data paths resolve against the config's directory.
  if (s.stream.kind == StreamKind::grid_file && s.stream.path.is_relative()) {
    s.stream.path = path.parent_path() / s.stream.path;
  }
  return s;
}

void write_scenario(std::ostream& out, const Scenario& s) {
  out << std::setprecision(17);
  out << "seed = " << s.seed << "\n\n";

  const auto& st = s.stream;
  const auto& syn = st.synthetic;
  out << "[stream]\nkind = " << name_of(kStreamKinds, st.kind) << "\n";
  if (st.kind == StreamKind::grid_file) out << "path = " << st.path.string() << "\n";
  out << "synth_kind = " << name_of(kSynthKinds, syn.kind) << "\n"
      << "dim = " << syn.dim << "\n"
      << "epochs = " << syn.epochs << "\n"
      << "points_per_agent = " << syn.points_per_agent << "\n"
      << "truth_lengthscale = " << syn.truth_kernel.spatial_lengthscales[0] << "\n"
      << "truth_features = " << syn.truth_features << "\n"
      << "truth_prior_variance = " << syn.truth_kernel.prior_variance << "\n"
      << "noise_variance = " << syn.truth_kernel.obs_variance << "\n"
      << "drift_scale = " << syn.drift_scale << "\n"
      << "test_grid = " << syn.test_grid << "\n"
      << "seed = " << syn.seed << "\n"
      << "nx = " << st.weather_nx << "\n"
      << "ny = " << st.weather_ny << "\n\n";

  out << "[topology]\nkind = " << name_of(kTopologies, s.topology) << "\nagents = " << s.num_agents << "\n";
  if (!s.custom_edges.empty()) {
    out << "edges = ";
    for (std::size_t i = 0; i < s.custom_edges.size(); ++i) {
      out << (i ? ", " : "") << s.custom_edges[i].first << "-" << s.custom_edges[i].second;
    }
    out << "\n";
  }
  out << "\n[consensus]\nmode = " << name_of(kExchange, s.exchange) << "\nrounds = " << s.consensus.rounds
      << "\nweights = " << name_of(kWeightRules, s.consensus.weight_rule) << "\n\n";

  const auto& ens = s.ensemble;
  out << "[ensemble]\nfeatures = " << ens.num_features << "\nseed = " << ens.seed
      << "\nlengthscales = " << join(ens.lengthscales)
      << "\nprior_variances = " << join(ens.prior_variances) << "\nobs_variance = " << ens.obs_variance
      << "\n";
  if (ens.temporal_lengthscale) out << "temporal_lengthscale = " << *ens.temporal_lengthscale << "\n";
  out << "evidence = " << (ens.shared_evidence ? "shared" : "local") << "\n\n";

  out << "[dynamics]\nmode = " << name_of(kDynamics, s.dynamics.mode) << "\nnu = " << s.dynamics.nu << "\n\n";
  out << "[robust]\nkind = " << name_of(kRobust, s.robust.kind) << "\ndelta = " << s.robust.delta
      << "\na = " << s.robust.a << "\nb = " << s.robust.b << "\nc = " << s.robust.c << "\n\n";

  out << "[outliers]\nenabled = " << (s.outliers ? "true" : "false") << "\n";
  if (s.outliers) {
    const auto& o = *s.outliers;
    out << "epoch = " << o.epoch << "\nfraction = " << o.fraction << "\nmagnitude_sd = " << o.magnitude_sd
        << "\njitter = " << o.jitter << "\nseed = " << o.seed << "\n";
    if (o.region) out << "region = " << format_box(*o.region) << "\n";
    if (o.agents) out << "agents = " << join(*o.agents) << "\n";
  }
  out << "\n";

  const auto& ev = s.eval;
  out << "[eval]\nepochs = " << (ev.epochs ? join(*ev.epochs) : std::string("all"))
      << "\nmode = " << name_of(kEvalModes, ev.mode) << "\n";
  if (ev.region) out << "region = " << format_box(*ev.region) << "\n";
  out << "centralized = " << (ev.centralized ? "true" : "false") << "\nw2 = " << (ev.w2 ? "true" : "false")
      << "\noracle_weighting = " << (ev.oracle_robust_weights ? "identical" : "unit") << "\n";
  if (!ev.snapshots.empty()) out << "snapshots = " << join(ev.snapshots) << "\n";
}

}  // namespace roadgp
