#include "newsgraph/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "newsgraph/errors.hpp"
#include "newsgraph/seed.hpp"

namespace newsgraph {

using nlohmann::json;

namespace {

const json& defaults() {
  static const json d = json::parse(R"({
  "seed": 7,
  "schema": "us-equities",
  "embedder": "file",
  "embedding_mode": "title",
  "stub_dim": 32,
  "paths": {
    "prices": "data/prices.csv",
    "news": "data/news.csv",
    "embeddings": "data/embeddings.csv",
    "screener": "data/screener.csv",
    "output_dir": "out"
  },
  "label": {"modes": ["direction", "significance"], "factor": 0.04, "lookback": 100},
  "split": {"train_fraction": 0.8627, "train_days": null, "test_days": null},
  "model": {
    "layer": "sage",
    "node_dim": 128,
    "layers": 3,
    "lstm_hidden": 64,
    "lstm_layers": 2,
    "company_embedding": 64,
    "industry_embedding": 128,
    "window": 15,
    "channels": ["close"],
    "rsi_period": 14,
    "sma_period": 10,
    "article_age_features": true,
    "leaky_slope": 0.2
  },
  "train": {
    "epochs": 55,
    "lr": 0.0001,
    "beta1": 0.9,
    "beta2": 0.999,
    "eps": 1e-8,
    "weight_decay": 0.01,
    "batch_size": 4,
    "validation_fraction": 0.1
  },
  "eval": {"top_k": 100, "top_k_per_company": false},
  "synth": {
    "companies": 30,
    "industries": 5,
    "days": 400,
    "start_date": "2016-01-04",
    "rate_min": 1.5,
    "rate_max": 1.5,
    "mention_rate": 0.5,
    "signal_strength": 1.0,
    "signal_amplitude": 2.0,
    "embedding_dim": 16,
    "drift": 0.0,
    "volatility_min": 0.01,
    "volatility_max": 0.03
  }
})");
  return d;
}

bool compatible(const json& def, const json& value) {
  if (def.is_null()) return value.is_null() || value.is_number_unsigned() || value.is_number_integer();
  if (def.is_number_float()) return value.is_number();
  if (def.is_number_unsigned() || def.is_number_integer()) return value.is_number_unsigned() || value.is_number_integer();
  return def.type() == value.type();
}

void merge(json& target, const json& user, const json& def, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config" + (path.empty() ? "" : " key '" + path + "'") + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!def.contains(key)) throw ConfigError("unknown config key '" + full + "'");
    const json& d = def.at(key);
    if (d.is_object()) {
      merge(target[key], value, d, full);
    } else {
      if (!compatible(d, value)) throw ConfigError("config key '" + full + "' has the wrong type");
      target[key] = value;
    }
  }
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  // Rebuild the nested object for the dotted key and merge it.
  json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = rest.find('.', start);
    parts.push_back(rest.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (it->empty()) throw ConfigError("override key '" + key + "' has an empty component");
    patch = json{{*it, patch}};
  }
  merge(config, patch, defaults(), "");
}

template <typename T>
T get(const json& j, const char* key) {
  return j.at(key).get<T>();
}

RunConfig from_json(const json& j) {
  RunConfig c;
  c.seed = get<std::uint64_t>(j, "seed");
  c.schema = data::parse_schema(get<std::string>(j, "schema"));
  const auto embedder = get<std::string>(j, "embedder");
  if (embedder != "file" && embedder != "stub") throw ConfigError("embedder must be file or stub");
  c.stub_embedder = embedder == "stub";
  c.embedding_mode = data::parse_embedding_mode(get<std::string>(j, "embedding_mode"));
  c.stub_dim = get<std::size_t>(j, "stub_dim");
  if (c.stub_dim == 0) throw ConfigError("stub_dim must be positive");

  const auto& p = j.at("paths");
  c.paths.prices = get<std::string>(p, "prices");
  c.paths.news = get<std::string>(p, "news");
  c.paths.embeddings = get<std::string>(p, "embeddings");
  c.paths.screener = get<std::string>(p, "screener");
  c.paths.output_dir = get<std::string>(p, "output_dir");

  const auto& l = j.at("label");
  c.modes.clear();
  for (const auto& m : l.at("modes")) {
    if (!m.is_string()) throw ConfigError("label.modes must list strings");
    const auto mode = labels::parse_target_mode(m.get<std::string>());
    if (std::find(c.modes.begin(), c.modes.end(), mode) != c.modes.end()) throw ConfigError("label.modes repeats a mode");
    c.modes.push_back(mode);
  }
  if (c.modes.empty()) throw ConfigError("label.modes must not be empty");
  c.significance.factor = get<double>(l, "factor");
  c.significance.lookback = get<std::size_t>(l, "lookback");
  c.significance.validate();

  const auto& s = j.at("split");
  c.split.train_fraction = get<double>(s, "train_fraction");
  if (!s.at("train_days").is_null()) c.split.train_days = get<std::size_t>(s, "train_days");
  if (!s.at("test_days").is_null()) c.split.test_days = get<std::size_t>(s, "test_days");

  const auto& m = j.at("model");
  c.model.layer = model::parse_layer_kind(get<std::string>(m, "layer"));
  c.model.node_dim = get<std::size_t>(m, "node_dim");
  c.model.layers = get<std::size_t>(m, "layers");
  c.model.lstm_hidden = get<std::size_t>(m, "lstm_hidden");
  c.model.lstm_layers = get<std::size_t>(m, "lstm_layers");
  c.model.company_embedding = get<std::size_t>(m, "company_embedding");
  c.model.industry_embedding = get<std::size_t>(m, "industry_embedding");
  c.model.features.steps = get<std::size_t>(m, "window");
  c.model.features.channels.clear();
  for (const auto& ch : m.at("channels")) {
    if (!ch.is_string()) throw ConfigError("model.channels must list strings");
    c.model.features.channels.push_back(model::parse_channel(ch.get<std::string>()));
  }
  c.model.features.rsi_period = get<std::size_t>(m, "rsi_period");
  c.model.features.sma_period = get<std::size_t>(m, "sma_period");
  c.model.article_age_features = get<bool>(m, "article_age_features");
  c.model.leaky_slope = get<double>(m, "leaky_slope");
  if (c.model.features.channels.empty() || c.model.features.steps == 0) {
    throw ConfigError("model.channels and model.window must be non-empty");
  }
  if (c.model.features.rsi_period == 0 || c.model.features.sma_period == 0) {
    throw ConfigError("model.rsi_period and model.sma_period must be positive");
  }

  const auto& t = j.at("train");
  c.train.epochs = get<std::size_t>(t, "epochs");
  c.train.lr = get<double>(t, "lr");
  c.train.beta1 = get<double>(t, "beta1");
  c.train.beta2 = get<double>(t, "beta2");
  c.train.eps = get<double>(t, "eps");
  c.train.weight_decay = get<double>(t, "weight_decay");
  c.train.batch_size = get<std::size_t>(t, "batch_size");
  c.train.validation_fraction = get<double>(t, "validation_fraction");
  c.train.seed = c.seed;
  c.train.validate();

  const auto& e = j.at("eval");
  c.top_k = get<std::size_t>(e, "top_k");
  c.top_k_per_company = get<bool>(e, "top_k_per_company");
  if (c.top_k == 0) throw ConfigError("eval.top_k must be positive");

  const auto& y = j.at("synth");
  auto& sc = c.synth;
  sc.companies = get<std::size_t>(y, "companies");
  sc.industries = get<std::size_t>(y, "industries");
  sc.days = get<std::size_t>(y, "days");
  sc.start_date = get<std::string>(y, "start_date");
  sc.rate_min = get<double>(y, "rate_min");
  sc.rate_max = get<double>(y, "rate_max");
  sc.mention_rate = get<double>(y, "mention_rate");
  sc.signal_strength = get<double>(y, "signal_strength");
  sc.signal_amplitude = get<double>(y, "signal_amplitude");
  sc.embedding_dim = get<std::size_t>(y, "embedding_dim");
  sc.drift = get<double>(y, "drift");
  sc.volatility_min = get<double>(y, "volatility_min");
  sc.volatility_max = get<double>(y, "volatility_max");
  sc.seed = derive_seed(c.seed, "synth");
  sc.validate();
  return c;
}

}  // namespace

data::PrepareOptions RunConfig::prepare_options() const {
  data::PrepareOptions o;
  o.schema = schema;
  o.embedding_mode = embedding_mode;
  o.stub_embedder = stub_embedder;
  o.stub_dim = stub_dim;
  o.stub_seed = derive_seed(seed, "stub");
  o.significance = significance;
  o.split = split;
  o.features = model.features;
  return o;
}

graph::GraphConfig RunConfig::graph_config() const { return graph::graph_config_for(schema, model.features); }

std::string default_config_json() { return defaults().dump(2); }

RunConfig parse_run_config(std::string_view json_text, const std::vector<std::string>& overrides) {
  json merged = defaults();
  try {
    if (!json_text.empty()) merge(merged, json::parse(json_text), defaults(), "");
    for (const auto& o : overrides) apply_override(merged, o);
    return from_json(merged);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  std::string text;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + file->string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return parse_run_config(text, overrides);
}

}  // namespace newsgraph
