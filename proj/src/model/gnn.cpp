#include "newsgraph/model/gnn.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "newsgraph/errors.hpp"

namespace newsgraph::model {

using graph::EdgeKind;
using graph::NodeKind;
using num::Axis;

namespace {

constexpr std::size_t kind_index(NodeKind k) { return static_cast<std::size_t>(k); }

constexpr std::array<NodeKind, graph::kNodeKinds> kKinds = {NodeKind::Company, NodeKind::Article,
                                                             NodeKind::Industry};

Tensor glorot_like(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return uniform_tensor(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)), rng);
}

}  // namespace

LayerKind parse_layer_kind(std::string_view text) {
  if (text == "sage") return LayerKind::Sage;
  if (text == "gat") return LayerKind::Gat;
  throw ConfigError("unknown layer kind '" + std::string(text) + "' (expected sage or gat)");
}

std::string_view to_string(LayerKind kind) { return kind == LayerKind::Sage ? "sage" : "gat"; }
std::string_view to_string(ModelKind kind) { return kind == ModelKind::Gnn ? "gnn" : "baseline"; }

std::size_t ModelConfig::article_input() const {
  return article_dim + (article_age_features ? features.steps : 0);
}

void ModelConfig::validate() const {
  if (node_dim == 0 || layers == 0) throw ConfigError("model.node_dim and model.layers must be positive");
  if (lstm_hidden == 0 || lstm_layers == 0) throw ConfigError("model.lstm_hidden and model.lstm_layers must be positive");
  if (company_embedding == 0 || industry_embedding == 0) throw ConfigError("embedding sizes must be positive");
  if (features.channels.empty() || features.steps == 0) throw ConfigError("model needs feature channels and steps");
  if (kind == ModelKind::Gnn && article_dim == 0) throw ConfigError("article embedding dim must be positive");
  if (!(leaky_slope >= 0.0)) throw ConfigError("leaky slope must be non-negative");
}

const std::array<Relation, 6>& relations() {
  static const std::array<Relation, 6> table = {{
      {EdgeKind::ArticleMainCompany, NodeKind::Article, NodeKind::Company, "main.to_company"},
      {EdgeKind::ArticleMainCompany, NodeKind::Company, NodeKind::Article, "main.to_article"},
      {EdgeKind::ArticleMentionedCompany, NodeKind::Article, NodeKind::Company, "mentioned.to_company"},
      {EdgeKind::ArticleMentionedCompany, NodeKind::Company, NodeKind::Article, "mentioned.to_article"},
      {EdgeKind::CompanyIndustry, NodeKind::Company, NodeKind::Industry, "industry.to_industry"},
      {EdgeKind::CompanyIndustry, NodeKind::Industry, NodeKind::Company, "industry.to_company"},
  }};
  return table;
}

GraphIndex::GraphIndex(const graph::Snapshot& snapshot) : local(snapshot.size()) {
  for (std::size_t id = 0; id < snapshot.size(); ++id) {
    auto& list = members[kind_index(snapshot.node(id).ref.kind)];
    local[id] = list.size();
    list.push_back(id);
  }
  for (std::size_t r = 0; r < relations().size(); ++r) {
    const Relation& rel = relations()[r];
    auto& seg = relation_segments[r];
    std::vector<std::size_t> rows;
    for (std::size_t dst : members[kind_index(rel.dst)]) {
      rows.clear();
      for (std::size_t src : snapshot.neighbors(dst, rel.edge)) rows.push_back(local[src]);
      seg.push_segment(rows);
    }
  }
}

KindStates sage_layer(Tape& tape, const ParameterStore& store, const SageLayerParams& params,
                      const GraphIndex& index, const KindStates& x,
                      const std::array<bool, graph::kNodeKinds>& compute) {
  KindStates out;
  for (NodeKind kind : kKinds) {
    const std::size_t k = kind_index(kind);
    if (!compute[k] || !x[k]) continue;
    std::optional<Var> message;
    for (std::size_t r = 0; r < relations().size(); ++r) {
      const Relation& rel = relations()[r];
      const auto& src = x[kind_index(rel.src)];
      if (rel.dst != kind || !src) continue;
      Var transform = tape.parameter(store, params.relation[r]);
      const auto& seg = index.relation_segments[r];
      // The mean commutes with the linear map. Articles outnumber the other
      // kinds, so they are averaged first and the rest transformed first. The
      // order is fixed per relation so a row never depends on the graph size.
      Var m = rel.src == NodeKind::Article ? num::matmul(num::segment_mean(*src, seg), transform)
                                           : num::segment_mean(num::matmul(*src, transform), seg);
      message = message ? num::add(*message, m) : m;
    }
    if (!message) {
      message = tape.constant(Tensor::matrix(x[k]->rows(), store[params.combine_bias[k]].value.cols()));
    }
    Var combined = num::matmul(num::concat({*x[k], *message}, Axis::Cols),
                               tape.parameter(store, params.combine_weight[k]));
    out[k] = num::relu(num::add(combined, tape.parameter(store, params.combine_bias[k])));
  }
  return out;
}

KindStates gat_layer(Tape& tape, const ParameterStore& store, const GatLayerParams& params,
                     const graph::Snapshot& snapshot, const GraphIndex& index, const KindStates& x,
                     const std::array<bool, graph::kNodeKinds>& compute, double slope,
                     AttentionRecord* record) {
  Var weight = tape.parameter(store, params.weight);
  // Stack every present kind, in kind order, into one projected matrix.
  std::vector<Var> blocks;
  std::array<std::size_t, graph::kNodeKinds> offset{};
  std::size_t total = 0;
  for (NodeKind kind : kKinds) {
    const std::size_t k = kind_index(kind);
    offset[k] = total;
    if (!x[k]) continue;
    blocks.push_back(*x[k]);
    total += x[k]->rows();
  }
  if (blocks.empty()) return {};
  Var z = num::matmul(blocks.size() == 1 ? blocks.front() : num::concat(blocks, Axis::Rows), weight);
  Var score_dst = num::matmul(z, tape.parameter(store, params.attention_dst));
  Var score_src = num::matmul(z, tape.parameter(store, params.attention_src));

  auto row_of = [&](std::size_t node) { return offset[kind_index(snapshot.node(node).ref.kind)] + index.local[node]; };

  std::vector<std::size_t> dst_rows, src_rows, offsets{0}, dst_nodes, src_nodes;
  std::vector<std::array<std::size_t, 2>> out_ranges(graph::kNodeKinds);
  std::vector<std::size_t> neighbours;
  for (NodeKind kind : kKinds) {
    const std::size_t k = kind_index(kind);
    const std::size_t first_segment = offsets.size() - 1;
    if (compute[k] && x[k]) {
      for (std::size_t node : index.members[k]) {
        neighbours.clear();
        for (std::size_t e = 0; e < graph::kEdgeKinds; ++e) {
          const auto& list = snapshot.neighbors(node, static_cast<EdgeKind>(e));
          for (std::size_t n : list) {
            if (x[kind_index(snapshot.node(n).ref.kind)]) neighbours.push_back(n);
          }
        }
        std::sort(neighbours.begin(), neighbours.end(), [&](std::size_t a, std::size_t b) {
          return snapshot.node(a).ref < snapshot.node(b).ref;
        });
        neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
        const std::size_t self = row_of(node);
        dst_rows.push_back(self);
        src_rows.push_back(self);
        src_nodes.push_back(node);
        for (std::size_t n : neighbours) {
          dst_rows.push_back(self);
          src_rows.push_back(row_of(n));
          src_nodes.push_back(n);
        }
        offsets.push_back(src_rows.size());
        dst_nodes.push_back(node);
      }
    }
    out_ranges[k] = {first_segment, offsets.size() - 1};
  }
  if (dst_nodes.empty()) return {};

  Var scores = num::leaky_relu(num::add(num::gather_rows(score_dst, dst_rows), num::gather_rows(score_src, src_rows)),
                               slope);
  Var alpha = num::segment_softmax(scores, offsets);
  Var weighted = num::row_scale(num::gather_rows(z, src_rows), alpha);
  num::SegmentIndex runs;
  runs.offsets = offsets;
  runs.indices.resize(src_rows.size());
  for (std::size_t i = 0; i < runs.indices.size(); ++i) runs.indices[i] = i;
  Var all = num::relu(num::segment_sum(weighted, runs));

  if (record != nullptr) *record = {alpha, offsets, dst_nodes, src_nodes};

  KindStates out;
  for (NodeKind kind : kKinds) {
    const std::size_t k = kind_index(kind);
    const auto [begin, end] = out_ranges[k];
    if (end > begin) out[k] = begin == 0 && end == dst_nodes.size() ? all : num::slice(all, Axis::Rows, begin, end);
  }
  return out;
}

Model::Model(const ModelConfig& config, std::vector<std::string> companies, std::vector<std::string> industries,
             std::uint64_t seed)
    : config_(config), company_keys_(std::move(companies)), industry_keys_(std::move(industries)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  EncoderConfig enc;
  enc.channels = config_.features.channel_count();
  enc.steps = config_.features.steps;
  enc.hidden = config_.lstm_hidden;
  enc.layers = config_.lstm_layers;
  encoder_ = SequenceEncoder(store_, "encoder", enc, rng);

  for (std::size_t i = 0; i < company_keys_.size(); ++i) {
    if (!company_row_.emplace(company_keys_[i], i).second) throw ConfigError("duplicate company key " + company_keys_[i]);
  }
  for (std::size_t i = 0; i < industry_keys_.size(); ++i) {
    if (!industry_row_.emplace(industry_keys_[i], i).second) throw ConfigError("duplicate industry key " + industry_keys_[i]);
  }

  const std::size_t d = config_.node_dim;
  if (config_.kind == ModelKind::Baseline) {
    head_weight_ = store_.add("head.weight", glorot_like(config_.lstm_hidden, 1, rng));
    head_bias_ = store_.add("head.bias", Tensor::matrix(1, 1));
    return;
  }

  if (!company_keys_.empty()) {
    company_table_ = store_.add("table.company", normal_tensor(company_keys_.size(), config_.company_embedding, 1.0, rng));
  }
  if (!industry_keys_.empty()) {
    industry_table_ = store_.add("table.industry", normal_tensor(industry_keys_.size(), config_.industry_embedding, 1.0, rng));
  }
  projection_[kind_index(NodeKind::Company)] = store_.add("proj.company", glorot_like(config_.company_input(), d, rng));
  projection_[kind_index(NodeKind::Article)] = store_.add("proj.article", glorot_like(config_.article_input(), d, rng));
  projection_[kind_index(NodeKind::Industry)] = store_.add("proj.industry", glorot_like(config_.industry_embedding, d, rng));

  for (std::size_t l = 0; l < config_.layers; ++l) {
    if (config_.layer == LayerKind::Sage) {
      const std::string prefix = "sage" + std::to_string(l);
      const bool last = l + 1 == config_.layers;
      SageLayerParams p{};
      p.relation.fill(kNoParam);
      p.combine_weight.fill(kNoParam);
      p.combine_bias.fill(kNoParam);
      for (std::size_t r = 0; r < relations().size(); ++r) {
        if (last && relations()[r].dst != NodeKind::Company) continue;
        p.relation[r] = store_.add(prefix + ".rel." + std::string(relations()[r].name), glorot_like(d, d, rng));
      }
      for (NodeKind kind : kKinds) {
        if (last && kind != NodeKind::Company) continue;
        const std::string name = prefix + ".combine." + std::string(graph::to_string(kind));
        p.combine_weight[kind_index(kind)] = store_.add(name + ".weight", glorot_like(2 * d, d, rng));
        p.combine_bias[kind_index(kind)] = store_.add(name + ".bias", Tensor::matrix(1, d));
      }
      sage_.push_back(p);
    } else {
      const std::string prefix = "gat" + std::to_string(l);
      GatLayerParams p;
      p.weight = store_.add(prefix + ".weight", glorot_like(d, d, rng));
      const double bound = 1.0 / std::sqrt(static_cast<double>(2 * d));
      p.attention_dst = store_.add(prefix + ".att_dst", uniform_tensor(d, 1, bound, rng));
      p.attention_src = store_.add(prefix + ".att_src", uniform_tensor(d, 1, bound, rng));
      gat_.push_back(p);
    }
  }
  head_weight_ = store_.add("head.weight", glorot_like(d, 1, rng));
  head_bias_ = store_.add("head.bias", Tensor::matrix(1, 1));
}

Var Model::company_rows(Tape& tape, const graph::Snapshot& snapshot, const GraphIndex& index, Mode mode) {
  const auto& companies = index.members[kind_index(NodeKind::Company)];
  std::vector<std::span<const double>> windows;
  std::vector<std::size_t> row(companies.size());
  std::size_t incomplete = 0;
  for (std::size_t i = 0; i < companies.size(); ++i) {
    if (snapshot.complete(companies[i])) {
      row[i] = windows.size();
      windows.push_back(snapshot.node(companies[i]).features);
    } else {
      ++incomplete;
    }
  }
  const std::size_t hidden = config_.lstm_hidden;
  if (windows.empty()) return tape.constant(Tensor::matrix(companies.size(), hidden));
  Var h = encoder_.encode(tape, store_, windows, mode);
  if (incomplete == 0) return h;
  // Incomplete windows contribute a zero encoder part.
  std::size_t next = windows.size();
  for (std::size_t i = 0; i < companies.size(); ++i) {
    if (!snapshot.complete(companies[i])) row[i] = next++;
  }
  Var padded = num::concat({h, tape.constant(Tensor::matrix(incomplete, hidden))}, Axis::Rows);
  return num::gather_rows(padded, std::move(row));
}

Var Model::table_rows(Tape& tape, std::size_t table, const std::map<std::string, std::size_t, std::less<>>& keys,
                      const graph::Snapshot& snapshot, const std::vector<std::size_t>& nodes) {
  std::vector<std::size_t> rows;
  rows.reserve(nodes.size());
  for (std::size_t n : nodes) {
    const auto& ref = snapshot.node(n).ref;
    const auto it = keys.find(ref.key);
    if (it == keys.end()) {
      throw DataError("no learnable embedding for " + std::string(graph::to_string(ref.kind)) + "/" + ref.key);
    }
    rows.push_back(it->second);
  }
  return num::gather_rows(tape.parameter(store_, table), std::move(rows));
}

KindStates Model::project_inputs(Tape& tape, const graph::Snapshot& snapshot, const GraphIndex& index, Mode mode) {
  if (config_.kind != ModelKind::Gnn) throw ConfigError("project_inputs: baseline model has no graph inputs");
  KindStates x;
  const auto& companies = index.members[kind_index(NodeKind::Company)];
  if (!companies.empty()) {
    if (!company_table_) throw DataError("no learnable embedding for company/" + snapshot.node(companies[0]).ref.key);
    Var raw = num::concat({company_rows(tape, snapshot, index, mode),
                           table_rows(tape, *company_table_, company_row_, snapshot, companies)},
                          Axis::Cols);
    x[kind_index(NodeKind::Company)] =
        num::matmul(raw, tape.parameter(store_, projection_[kind_index(NodeKind::Company)]));
  }
  const auto& articles = index.members[kind_index(NodeKind::Article)];
  if (!articles.empty()) {
    const std::size_t dim = config_.article_dim, steps = config_.features.steps;
    Tensor raw = Tensor::matrix(articles.size(), config_.article_input());
    for (std::size_t i = 0; i < articles.size(); ++i) {
      const auto& node = snapshot.node(articles[i]);
      if (node.features.size() != dim) {
        throw DataError("article/" + node.ref.key + " has a " + std::to_string(node.features.size()) +
                        "-dim embedding, model expects " + std::to_string(dim));
      }
      std::copy(node.features.begin(), node.features.end(), raw.row_span(i).begin());
      if (config_.article_age_features) {
        if (node.age < 1 || node.age > steps) {
          throw DataError("article/" + node.ref.key + " has age " + std::to_string(node.age) + " outside 1.." +
                          std::to_string(steps));
        }
        raw.at(i, dim + node.age - 1) = 1.0;
      }
    }
    x[kind_index(NodeKind::Article)] = num::matmul(tape.constant(std::move(raw)),
                                                   tape.parameter(store_, projection_[kind_index(NodeKind::Article)]));
  }
  const auto& industries = index.members[kind_index(NodeKind::Industry)];
  if (!industries.empty()) {
    if (!industry_table_) throw DataError("no learnable embedding for industry/" + snapshot.node(industries[0]).ref.key);
    x[kind_index(NodeKind::Industry)] =
        num::matmul(table_rows(tape, *industry_table_, industry_row_, snapshot, industries),
                    tape.parameter(store_, projection_[kind_index(NodeKind::Industry)]));
  }
  return x;
}

ForwardOutput Model::forward(Tape& tape, const graph::Snapshot& snapshot, Mode mode) {
  const GraphIndex index(snapshot);
  ForwardOutput out;
  out.companies = index.members[kind_index(NodeKind::Company)];
  if (out.companies.empty()) throw DataError("snapshot for day " + std::to_string(snapshot.target_day()) + " has no companies");

  Var features;
  if (config_.kind == ModelKind::Baseline) {
    features = company_rows(tape, snapshot, index, mode);
  } else {
    KindStates x = project_inputs(tape, snapshot, index, mode);
    for (std::size_t l = 0; l < config_.layers; ++l) {
      const bool last = l + 1 == config_.layers;
      const std::array<bool, graph::kNodeKinds> compute = {true, !last, !last};
      if (config_.layer == LayerKind::Sage) {
        x = sage_layer(tape, store_, sage_[l], index, x, compute);
      } else {
        AttentionRecord record;
        x = gat_layer(tape, store_, gat_[l], snapshot, index, x, compute, config_.leaky_slope, &record);
        out.attention.push_back(std::move(record));
      }
    }
    features = *x[kind_index(NodeKind::Company)];
  }
  out.logits = num::add(num::matmul(features, tape.parameter(store_, head_weight_)), tape.parameter(store_, head_bias_));
  return out;
}

std::vector<double> Model::predict(const graph::Snapshot& snapshot) {
  Tape tape;
  const auto out = forward(tape, snapshot, Mode::Eval);
  std::vector<double> p;
  for (double logit : out.logits.value().values()) p.push_back(1.0 / (1.0 + std::exp(-logit)));
  return p;
}

std::string Model::config_hash() const {
  std::ostringstream s;
  const auto& c = config_;
  s << "kind=" << to_string(c.kind) << ";layer=" << to_string(c.layer) << ";node_dim=" << c.node_dim
    << ";layers=" << c.layers << ";company_embedding=" << c.company_embedding
    << ";industry_embedding=" << c.industry_embedding << ";lstm_hidden=" << c.lstm_hidden
    << ";lstm_layers=" << c.lstm_layers << ";steps=" << c.features.steps << ";rsi=" << c.features.rsi_period
    << ";sma=" << c.features.sma_period << ";channels=";
  for (Channel ch : c.features.channels) s << to_string(ch) << ',';
  s << ";article_dim=" << c.article_dim << ";age=" << c.article_age_features << ";slope=" << c.leaky_slope
    << ";companies=";
  for (const auto& k : company_keys_) s << k << ',';
  s << ";industries=";
  for (const auto& k : industry_keys_) s << k << ',';
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

namespace {

void write_tensor(std::ostream& out, const std::string& tag, const std::string& name, const Tensor& t) {
  out << tag << ' ' << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
  char buf[40];
  for (std::size_t i = 0; i < t.numel(); ++i) {
    std::snprintf(buf, sizeof buf, "%a", t[i]);
    out << (i == 0 ? "" : " ") << buf;
  }
  out << '\n';
}

Tensor read_tensor(std::istream& in, const std::string& path, std::size_t rows, std::size_t cols) {
  Tensor t = Tensor::matrix(rows, cols);
  std::string token;
  for (std::size_t i = 0; i < t.numel(); ++i) {
    if (!(in >> token)) throw DataError(path + ": truncated tensor data");
    char* end = nullptr;
    t[i] = std::strtod(token.c_str(), &end);
    if (end == nullptr || *end != '\0') throw DataError(path + ": bad value '" + token + "'");
  }
  return t;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  const auto& store = model.params();
  out << "newsgraph-checkpoint 1\n";
  out << "config " << model.config_hash() << '\n';
  out << "model " << to_string(model.config().kind) << '\n';
  out << "tensors " << store.size() + 2 << '\n';
  for (const auto& p : store) write_tensor(out, "param", p.name, p.value);
  const auto& bn = model.encoder().batch_norm();
  write_tensor(out, "buffer", "encoder.bn.running_mean", bn.running_mean);
  write_tensor(out, "buffer", "encoder.bn.running_var", bn.running_var);
  out << "end\n";
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void load_checkpoint(const std::filesystem::path& path, Model& model) {
  std::ifstream in(path, std::ios::binary);
  const std::string file = path.string();
  if (!in) throw DataError("cannot open '" + file + "' for reading");
  std::string word, value;
  std::size_t version = 0;
  if (!(in >> word >> version) || word != "newsgraph-checkpoint" || version != 1) {
    throw DataError(file + ": not a version 1 checkpoint");
  }
  if (!(in >> word >> value) || word != "config") throw DataError(file + ": missing config hash");
  if (value != model.config_hash()) {
    throw ConfigError(file + ": checkpoint config hash " + value + " does not match the current configuration (" +
                      model.config_hash() + ")");
  }
  if (!(in >> word >> value) || word != "model") throw DataError(file + ": missing model kind");
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "tensors") throw DataError(file + ": missing tensor count");

  auto& store = model.params();
  auto& bn = model.encoder().batch_norm();
  std::vector<bool> loaded(store.size(), false);
  for (std::size_t i = 0; i < count; ++i) {
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols)) throw DataError(file + ": truncated tensor header");
    Tensor t = read_tensor(in, file, rows, cols);
    Tensor* target = nullptr;
    if (tag == "param") {
      const auto idx = store.find(name);
      if (!idx) throw DataError(file + ": unknown parameter '" + name + "'");
      target = &store[*idx].value;
      loaded[*idx] = true;
    } else if (tag == "buffer" && name == "encoder.bn.running_mean") {
      target = &bn.running_mean;
    } else if (tag == "buffer" && name == "encoder.bn.running_var") {
      target = &bn.running_var;
    } else {
      throw DataError(file + ": unknown entry '" + tag + " " + name + "'");
    }
    if (target->rows() != rows || target->cols() != cols) {
      throw DataError(file + ": shape mismatch for '" + name + "'");
    }
    for (std::size_t j = 0; j < t.numel(); ++j) (*target)[j] = t[j];
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!loaded[i]) throw DataError(file + ": parameter '" + store[i].name + "' missing");
  }
  if (!(in >> word) || word != "end") throw DataError(file + ": missing end marker");
}

}  // namespace newsgraph::model
