#include "driftgen/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "driftgen/errors.hpp"

namespace driftgen {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) fail(path, "unknown key \"" + item.key() + "\"");
  }
}

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number_field(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t index_field(const Json& j, const std::string& path) {
  if (!j.is_number_integer() ||
      (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::string string_field(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool bool_field(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

const Json& array_field(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

const Json& object_field(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

Activation activation_from_name(const std::string& name,
                                const std::string& path) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  fail(path, "unknown activation \"" + name +
                 "\" (expected relu, tanh, or identity)");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

const char* output_name(OutputActivation a) {
  return a == OutputActivation::kSigmoid ? "sigmoid" : "identity";
}

const char* source_name(DatasetSpec::Source s) {
  switch (s) {
    case DatasetSpec::Source::kMoons: return "moons";
    case DatasetSpec::Source::kRegression: return "regression";
    case DatasetSpec::Source::kCsv: return "csv";
  }
  return "moons";
}

const char* task_name(TaskKind t) {
  return t == TaskKind::kClassification ? "classification" : "regression";
}

CsvLoadSpec parse_csv(const Json& obj, const std::string& path) {
  check_keys(obj, path,
             {"path", "feature_columns", "label_column", "domain_column",
              "time_column", "boundaries", "normalize", "stat_domains",
              "task"});
  CsvLoadSpec csv;
  if (const Json* j = find(obj, "path")) csv.path = string_field(*j, path + ".path");
  if (const Json* j = find(obj, "feature_columns")) {
    for (const Json& col : array_field(*j, path + ".feature_columns")) {
      csv.feature_columns.push_back(
          string_field(col, path + ".feature_columns[]"));
    }
  }
  if (const Json* j = find(obj, "label_column")) {
    csv.label_column = string_field(*j, path + ".label_column");
  }
  if (const Json* j = find(obj, "domain_column")) {
    csv.domain_column = string_field(*j, path + ".domain_column");
  }
  if (const Json* j = find(obj, "time_column")) {
    csv.time_column = string_field(*j, path + ".time_column");
  }
  if (const Json* j = find(obj, "boundaries")) {
    for (const Json& b : array_field(*j, path + ".boundaries")) {
      csv.boundaries.push_back(number_field(b, path + ".boundaries[]"));
    }
  }
  if (const Json* j = find(obj, "normalize")) {
    csv.normalize = bool_field(*j, path + ".normalize");
  }
  if (const Json* j = find(obj, "stat_domains")) {
    for (const Json& d : array_field(*j, path + ".stat_domains")) {
      csv.stat_domains.push_back(index_field(d, path + ".stat_domains[]"));
    }
  }
  if (const Json* j = find(obj, "task")) {
    std::string t = string_field(*j, path + ".task");
    if (t == "classification") {
      csv.task = TaskKind::kClassification;
    } else if (t == "regression") {
      csv.task = TaskKind::kRegression;
    } else {
      fail(path + ".task", "unknown task \"" + t + "\"");
    }
  }
  return csv;
}

DatasetSpec parse_dataset(const Json& obj, const std::string& path) {
  check_keys(obj, path,
             {"source", "num_domains", "n_per_domain", "step_degrees",
              "noise_sigma", "drift_rate", "train_domains", "test_domain",
              "csv"});
  DatasetSpec d;
  if (const Json* j = find(obj, "source")) {
    std::string s = string_field(*j, path + ".source");
    if (s == "moons") {
      d.source = DatasetSpec::Source::kMoons;
    } else if (s == "regression") {
      d.source = DatasetSpec::Source::kRegression;
    } else if (s == "csv") {
      d.source = DatasetSpec::Source::kCsv;
    } else {
      fail(path + ".source",
           "unknown source \"" + s + "\" (expected moons, regression, or csv)");
    }
  }
  if (const Json* j = find(obj, "num_domains")) {
    d.num_domains = index_field(*j, path + ".num_domains");
  }
  if (const Json* j = find(obj, "n_per_domain")) {
    d.n_per_domain = index_field(*j, path + ".n_per_domain");
  }
  if (const Json* j = find(obj, "step_degrees")) {
    d.step_degrees = number_field(*j, path + ".step_degrees");
  }
  if (const Json* j = find(obj, "noise_sigma")) {
    d.noise_sigma = number_field(*j, path + ".noise_sigma");
  }
  if (const Json* j = find(obj, "drift_rate")) {
    d.drift_rate = number_field(*j, path + ".drift_rate");
  }
  if (const Json* j = find(obj, "test_domain")) {
    d.test_domain = index_field(*j, path + ".test_domain");
  }
  if (const Json* j = find(obj, "train_domains")) {
    d.train_domains.clear();
    for (const Json& t : array_field(*j, path + ".train_domains")) {
      d.train_domains.push_back(index_field(t, path + ".train_domains[]"));
    }
  } else {
    // Default split: everything before the test domain.
    d.train_domains.clear();
    for (std::size_t i = 0; i < d.test_domain; ++i) d.train_domains.push_back(i);
  }
  if (const Json* j = find(obj, "csv")) {
    d.csv = parse_csv(object_field(*j, path + ".csv"), path + ".csv");
  }
  return d;
}

NetSchema parse_schema(const Json& obj, const std::string& path) {
  check_keys(obj, path,
             {"input_dim", "layers", "output", "generated_suffix_len"});
  NetSchema schema;
  if (const Json* j = find(obj, "input_dim")) {
    schema.input_dim = index_field(*j, path + ".input_dim");
  }
  const Json* layers = find(obj, "layers");
  if (!layers) fail(path, "missing \"layers\"");
  schema.layers.clear();
  std::size_t idx = 0;
  for (const Json& layer : array_field(*layers, path + ".layers")) {
    std::string lpath = path + ".layers[" + std::to_string(idx++) + "]";
    const Json& lobj = object_field(layer, lpath);
    check_keys(lobj, lpath, {"width", "activation", "bias"});
    LayerSpec spec;
    const Json* w = find(lobj, "width");
    if (!w) fail(lpath, "missing \"width\"");
    spec.width = index_field(*w, lpath + ".width");
    if (const Json* a = find(lobj, "activation")) {
      spec.activation =
          activation_from_name(string_field(*a, lpath + ".activation"),
                               lpath + ".activation");
    }
    if (const Json* b = find(lobj, "bias")) {
      spec.has_bias = bool_field(*b, lpath + ".bias");
    }
    schema.layers.push_back(spec);
  }
  if (const Json* j = find(obj, "output")) {
    std::string o = string_field(*j, path + ".output");
    if (o == "sigmoid") {
      schema.output_activation = OutputActivation::kSigmoid;
    } else if (o == "identity") {
      schema.output_activation = OutputActivation::kIdentity;
    } else {
      fail(path + ".output", "unknown output activation \"" + o + "\"");
    }
  }
  if (const Json* j = find(obj, "generated_suffix_len")) {
    schema.generated_suffix_len =
        index_field(*j, path + ".generated_suffix_len");
  } else {
    schema.generated_suffix_len = schema.layers.size();
  }
  return schema;
}

GeneratorConfig parse_generator(const Json& obj, const std::string& path) {
  check_keys(obj, path,
             {"latent_dim", "lstm_depth", "enc_hidden", "dec_hidden",
              "g0_hidden", "lambda", "tau"});
  GeneratorConfig g;
  if (const Json* j = find(obj, "latent_dim")) {
    g.latent_dim = index_field(*j, path + ".latent_dim");
  }
  if (const Json* j = find(obj, "lstm_depth")) {
    g.lstm_depth = index_field(*j, path + ".lstm_depth");
  }
  if (const Json* j = find(obj, "enc_hidden")) {
    g.enc_hidden = index_field(*j, path + ".enc_hidden");
  }
  if (const Json* j = find(obj, "dec_hidden")) {
    g.dec_hidden = index_field(*j, path + ".dec_hidden");
  }
  if (const Json* j = find(obj, "g0_hidden")) {
    g.g0_hidden = index_field(*j, path + ".g0_hidden");
  }
  if (const Json* j = find(obj, "lambda")) {
    g.lambda = number_field(*j, path + ".lambda");
  }
  if (const Json* j = find(obj, "tau")) {
    g.tau = index_field(*j, path + ".tau");
  }
  return g;
}

TrainConfig parse_train(const Json& obj, const std::string& path) {
  check_keys(obj, path,
             {"learning_rate", "iters_per_domain", "beta1", "beta2",
              "epsilon"});
  TrainConfig t;
  if (const Json* j = find(obj, "learning_rate")) {
    t.learning_rate = number_field(*j, path + ".learning_rate");
  }
  if (const Json* j = find(obj, "iters_per_domain")) {
    t.iters_per_domain = index_field(*j, path + ".iters_per_domain");
  }
  if (const Json* j = find(obj, "beta1")) t.beta1 = number_field(*j, path + ".beta1");
  if (const Json* j = find(obj, "beta2")) t.beta2 = number_field(*j, path + ".beta2");
  if (const Json* j = find(obj, "epsilon")) {
    t.epsilon = number_field(*j, path + ".epsilon");
  }
  return t;
}

BaselineConfig parse_baselines(const Json& obj, const std::string& path) {
  check_keys(obj, path,
             {"learning_rate", "iters", "finetune_iters", "finetune_lr_factor",
              "beta1", "beta2", "epsilon"});
  BaselineConfig b;
  if (const Json* j = find(obj, "learning_rate")) {
    b.learning_rate = number_field(*j, path + ".learning_rate");
  }
  if (const Json* j = find(obj, "iters")) {
    b.iters = index_field(*j, path + ".iters");
  }
  if (const Json* j = find(obj, "finetune_iters")) {
    b.finetune_iters = index_field(*j, path + ".finetune_iters");
  }
  if (const Json* j = find(obj, "finetune_lr_factor")) {
    b.finetune_lr_factor = number_field(*j, path + ".finetune_lr_factor");
  }
  if (const Json* j = find(obj, "beta1")) b.beta1 = number_field(*j, path + ".beta1");
  if (const Json* j = find(obj, "beta2")) b.beta2 = number_field(*j, path + ".beta2");
  if (const Json* j = find(obj, "epsilon")) {
    b.epsilon = number_field(*j, path + ".epsilon");
  }
  return b;
}

Json csv_json(const CsvLoadSpec& c) {
  Json j;
  j["path"] = c.path;
  j["feature_columns"] = c.feature_columns;
  j["label_column"] = c.label_column;
  j["domain_column"] = c.domain_column;
  j["time_column"] = c.time_column;
  j["boundaries"] = c.boundaries;
  j["normalize"] = c.normalize;
  j["stat_domains"] = c.stat_domains;
  j["task"] = task_name(c.task);
  return j;
}

std::uint32_t fnv1a32(const std::string& text) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : text) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::kRecurrent: return "recurrent";
    case Method::kOffline: return "offline";
    case Method::kLastDomain: return "last_domain";
    case Method::kIncFinetune: return "inc_finetune";
  }
  return "recurrent";
}

Method method_from_name(const std::string& name) {
  if (name == "recurrent") return Method::kRecurrent;
  if (name == "offline") return Method::kOffline;
  if (name == "last_domain") return Method::kLastDomain;
  if (name == "inc_finetune") return Method::kIncFinetune;
  throw ConfigError("unknown method \"" + name +
                    "\" (expected recurrent, offline, last_domain, or "
                    "inc_finetune)");
}

void ExperimentConfig::validate() const {
  dataset.validate();
  schema.validate();
  generator.validate();
  train.validate();
  baselines.validate();
  if (generator.target_param_count != param_count(schema)) {
    throw ConfigError("generator: target_param_count " +
                      std::to_string(generator.target_param_count) +
                      " does not match the schema's generated count " +
                      std::to_string(param_count(schema)));
  }
  std::size_t expected_dim = 0;
  switch (dataset.source) {
    case DatasetSpec::Source::kMoons: expected_dim = 2; break;
    case DatasetSpec::Source::kRegression: expected_dim = 1; break;
    case DatasetSpec::Source::kCsv:
      expected_dim = dataset.csv.feature_columns.size();
      break;
  }
  if (schema.input_dim != expected_dim) {
    throw ConfigError("schema: input_dim " + std::to_string(schema.input_dim) +
                      " does not match the dataset's feature count " +
                      std::to_string(expected_dim));
  }
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (methods.empty()) throw ConfigError("methods: the list is empty");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i] == methods[j]) {
        throw ConfigError(std::string("methods: \"") +
                          method_name(methods[i]) + "\" appears twice");
      }
    }
  }
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

ExperimentConfig parse_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  check_keys(root, "config",
             {"dataset", "schema", "generator", "train", "baselines",
              "methods", "seeds", "output_dir"});

  ExperimentConfig cfg;
  const Json* dataset = find(root, "dataset");
  if (!dataset) throw ConfigError("config: missing \"dataset\" section");
  cfg.dataset = parse_dataset(object_field(*dataset, "dataset"), "dataset");

  const Json* schema = find(root, "schema");
  if (!schema) throw ConfigError("config: missing \"schema\" section");
  cfg.schema = parse_schema(object_field(*schema, "schema"), "schema");

  if (const Json* j = find(root, "generator")) {
    cfg.generator = parse_generator(object_field(*j, "generator"), "generator");
  }
  cfg.generator.target_param_count = param_count(cfg.schema);
  if (const Json* j = find(root, "train")) {
    cfg.train = parse_train(object_field(*j, "train"), "train");
  }
  if (const Json* j = find(root, "baselines")) {
    cfg.baselines = parse_baselines(object_field(*j, "baselines"), "baselines");
  }
  if (const Json* j = find(root, "methods")) {
    for (const Json& m : array_field(*j, "methods")) {
      cfg.methods.push_back(
          method_from_name(string_field(m, "methods[]")));
    }
  } else {
    cfg.methods = {Method::kRecurrent, Method::kOffline, Method::kLastDomain,
                   Method::kIncFinetune};
  }
  const Json* seeds = find(root, "seeds");
  if (!seeds) throw ConfigError("config: missing \"seeds\" list");
  for (const Json& s : array_field(*seeds, "seeds")) {
    if (!s.is_number_integer() ||
        (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw ConfigError("seeds[]: expected a non-negative integer");
    }
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (const Json* j = find(root, "output_dir")) {
    cfg.output_dir = string_field(*j, "output_dir");
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_json(const ExperimentConfig& config) {
  Json root;
  Json& d = root["dataset"];
  d["source"] = source_name(config.dataset.source);
  d["num_domains"] = config.dataset.num_domains;
  d["n_per_domain"] = config.dataset.n_per_domain;
  d["step_degrees"] = config.dataset.step_degrees;
  d["noise_sigma"] = config.dataset.noise_sigma;
  d["drift_rate"] = config.dataset.drift_rate;
  d["train_domains"] = config.dataset.train_domains;
  d["test_domain"] = config.dataset.test_domain;
  d["csv"] = csv_json(config.dataset.csv);

  Json& s = root["schema"];
  s["input_dim"] = config.schema.input_dim;
  s["layers"] = Json::array();
  for (const LayerSpec& layer : config.schema.layers) {
    Json l;
    l["width"] = layer.width;
    l["activation"] = activation_name(layer.activation);
    l["bias"] = layer.has_bias;
    s["layers"].push_back(l);
  }
  s["output"] = output_name(config.schema.output_activation);
  s["generated_suffix_len"] = config.schema.generated_suffix_len;

  Json& g = root["generator"];
  g["latent_dim"] = config.generator.latent_dim;
  g["lstm_depth"] = config.generator.lstm_depth;
  g["enc_hidden"] = config.generator.enc_hidden;
  g["dec_hidden"] = config.generator.dec_hidden;
  g["g0_hidden"] = config.generator.g0_hidden;
  g["lambda"] = config.generator.lambda;
  g["tau"] = config.generator.tau;
  g["target_param_count"] = config.generator.target_param_count;

  Json& t = root["train"];
  t["learning_rate"] = config.train.learning_rate;
  t["iters_per_domain"] = config.train.iters_per_domain;
  t["beta1"] = config.train.beta1;
  t["beta2"] = config.train.beta2;
  t["epsilon"] = config.train.epsilon;

  Json& b = root["baselines"];
  b["learning_rate"] = config.baselines.learning_rate;
  b["iters"] = config.baselines.iters;
  b["finetune_iters"] = config.baselines.finetune_iters;
  b["finetune_lr_factor"] = config.baselines.finetune_lr_factor;
  b["beta1"] = config.baselines.beta1;
  b["beta2"] = config.baselines.beta2;
  b["epsilon"] = config.baselines.epsilon;

  root["methods"] = Json::array();
  for (Method m : config.methods) root["methods"].push_back(method_name(m));
  root["seeds"] = config.seeds;
  root["output_dir"] = config.output_dir;
  root["format_version"] = 1;
  return root.dump();
}

std::uint32_t config_hash(const ExperimentConfig& config) {
  return fnv1a32(canonical_json(config));
}

}  // namespace driftgen
