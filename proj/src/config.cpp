#include "mha/config.hpp"

#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "mha/errors.hpp"
#include "mha/losses.hpp"
#include "mha/partition.hpp"

namespace mha {

namespace {

const toml::table& section(const toml::table& root, const char* name) {
  const toml::table* table = root[name].as_table();
  if (table == nullptr) throw ConfigError(std::string("config is missing the [") + name + "] table");
  return *table;
}

double number(const toml::table& table, const char* key) {
  const toml::node* node = table.get(key);
  if (node == nullptr) throw ConfigError(std::string("config key '") + key + "' is missing");
  if (auto v = node->value<double>()) return *v;
  throw ConfigError(std::string("config key '") + key + "' must be a number");
}

double number_or(const toml::table& table, const char* key, double fallback) {
  return table.get(key) == nullptr ? fallback : number(table, key);
}

std::int64_t integer(const toml::table& table, const char* key) {
  const toml::node* node = table.get(key);
  if (node == nullptr) throw ConfigError(std::string("config key '") + key + "' is missing");
  if (const auto* v = node->as_integer()) return v->get();
  throw ConfigError(std::string("config key '") + key + "' must be an integer");
}

std::int64_t integer_or(const toml::table& table, const char* key, std::int64_t fallback) {
  return table.get(key) == nullptr ? fallback : integer(table, key);
}

std::string text(const toml::table& table, const char* key) {
  const toml::node* node = table.get(key);
  if (node == nullptr) throw ConfigError(std::string("config key '") + key + "' is missing");
  if (auto v = node->value<std::string>()) return *v;
  throw ConfigError(std::string("config key '") + key + "' must be a string");
}

std::vector<double> vector_of(const toml::node& node, const std::string& what) {
  const toml::array* array = node.as_array();
  if (array == nullptr) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const toml::node& item : *array) {
    auto v = item.value<double>();
    if (!v) throw ConfigError(what + " must contain only numbers");
    out.push_back(*v);
  }
  return out;
}

std::vector<double> vector_key(const toml::table& table, const char* key) {
  const toml::node* node = table.get(key);
  if (node == nullptr) throw ConfigError(std::string("config key '") + key + "' is missing");
  return vector_of(*node, std::string("config key '") + key + "'");
}

std::vector<std::vector<double>> matrix_key(const toml::table& table, const char* key) {
  const toml::node* node = table.get(key);
  const toml::array* array = node ? node->as_array() : nullptr;
  if (array == nullptr) {
    throw ConfigError(std::string("config key '") + key + "' must be an array of arrays");
  }
  std::vector<std::vector<double>> out;
  for (const toml::node& row : *array) out.push_back(vector_of(row, std::string("row of '") + key + "'"));
  return out;
}

std::vector<Observation> points_key(const toml::table& table, const char* key) {
  std::vector<Observation> out;
  for (auto& row : matrix_key(table, key)) out.push_back(Observation{std::move(row)});
  return out;
}

ProblemGeometry parse_geometry(const toml::table& table) {
  const auto d = integer(table, "d");
  const double half_width = number(table, "D");
  const std::string kind = text(table, "decision_set");
  const double lambda_max = number(table, "lambda_max");
  if (kind == "box") {
    return ProblemGeometry(static_cast<int>(d), half_width,
                           DecisionSet::box(vector_key(table, "lower"), vector_key(table, "upper")),
                           lambda_max);
  }
  if (kind == "simplex") {
    return ProblemGeometry(static_cast<int>(d), half_width,
                           DecisionSet::simplex(static_cast<int>(integer(table, "m"))), lambda_max);
  }
  throw ConfigError("unsupported decision_set '" + kind + "' (expected box or simplex)");
}

ProcessSpec parse_process(const toml::table& table, const ProblemGeometry& geometry) {
  ProcessSpec spec;
  const std::string kind = text(table, "kind");
  if (kind == "iid") {
    spec.kind = ProcessSpec::Kind::iid;
    spec.iid.support = points_key(table, "support");
    spec.iid.probabilities = vector_key(table, "probabilities");
  } else if (kind == "markov") {
    spec.kind = ProcessSpec::Kind::markov;
    spec.markov.states = points_key(table, "states");
    spec.markov.transition = matrix_key(table, "transition");
  } else if (kind == "ar1") {
    spec.kind = ProcessSpec::Kind::ar1;
    spec.ar1.phi = number(table, "phi");
    spec.ar1.sigma = number(table, "sigma");
    spec.ar1.d = geometry.d();
    spec.ar1.half_width = geometry.half_width();
  } else {
    throw ConfigError("unknown process kind '" + kind + "'");
  }
  return spec;
}

}  // namespace

LossSpec ExperimentConfig::loss_spec() const {
  if (custom_loss) return *custom_loss;
  return make_loss_spec(main_loss, constraint_loss, gamma, geometry);
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon N must be at least 1");
  if (max_k < 1 || max_h < 1) throw ConfigError("expert truncation K, H must be positive");
  if (max_h > PartitionFamily(geometry.d(), geometry.half_width()).max_level()) {
    throw ConfigError("H is too deep for the observation dimension");
  }
  if (!(solver.tol > 0.0) || solver.max_iters < 1) throw ConfigError("invalid solver tolerances");
  (void)loss_spec();
  process.validate(geometry);
}

ExperimentConfig parse_config(const std::string& toml_text, const std::string& default_name) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream message;
    message << "config parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(message.str());
  }
  const toml::table& experiment = section(root, "experiment");
  const toml::table& loss = section(root, "loss");

  ExperimentConfig config{
      .name = root["name"].value_or(default_name),
      .geometry = parse_geometry(section(root, "geometry")),
  };
  config.main_loss = text(loss, "main");
  config.constraint_loss = text(loss, "constraint");
  config.gamma = number(loss, "gamma");
  config.process = parse_process(section(root, "process"), config.geometry);

  const auto horizon = integer(experiment, "horizon");
  if (horizon < 1) throw ConfigError("horizon N must be at least 1");
  config.horizon = static_cast<std::size_t>(horizon);
  config.max_k = static_cast<int>(integer_or(experiment, "K", 5));
  config.max_h = static_cast<int>(integer_or(experiment, "H", 5));
  config.seed = static_cast<std::uint64_t>(integer_or(experiment, "seed", 0));
  config.process.seed = config.seed;
  config.solver.tol = number_or(experiment, "tol", 1e-6);
  config.solver.max_iters = static_cast<int>(integer_or(experiment, "max_iters", 10'000));
  if (experiment.get("output_dir") != nullptr) {
    config.output_dir = text(experiment, "output_dir");
  } else {
    config.output_dir = std::filesystem::path("out") / config.name;
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.stem().string());
}

}  // namespace mha
