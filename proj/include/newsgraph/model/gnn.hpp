#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsgraph/graph/snapshot.hpp"
#include "newsgraph/model/encoders.hpp"
#include "newsgraph/numerics/ops.hpp"

namespace newsgraph::model {

enum class LayerKind { Sage, Gat };
enum class ModelKind { Gnn, Baseline };

LayerKind parse_layer_kind(std::string_view text);
std::string_view to_string(LayerKind kind);
std::string_view to_string(ModelKind kind);

struct ModelConfig {
  ModelKind kind = ModelKind::Gnn;
  LayerKind layer = LayerKind::Sage;
  std::size_t node_dim = 128;
  std::size_t layers = 3;
  std::size_t company_embedding = 64;
  std::size_t industry_embedding = 128;
  std::size_t lstm_hidden = 64;
  std::size_t lstm_layers = 2;
  FeatureSpec features;
  std::size_t article_dim = 0;  // embedding dim of the data
  // Appends a one-hot of the article age (1..features.steps) to its embedding.
  bool article_age_features = true;
  double leaky_slope = 0.2;

  std::size_t article_input() const;
  std::size_t company_input() const { return lstm_hidden + company_embedding; }
  void validate() const;
};

// Six directional relations: each edge kind read in both directions.
struct Relation {
  graph::EdgeKind edge;
  graph::NodeKind src;
  graph::NodeKind dst;
  std::string_view name;
};
const std::array<Relation, 6>& relations();

// Node ids of a snapshot grouped by kind (in snapshot order) and the CSR
// neighbour lists of every relation in local indices.
struct GraphIndex {
  std::array<std::vector<std::size_t>, graph::kNodeKinds> members;
  std::vector<std::size_t> local;  // node id -> index within its kind
  std::array<num::SegmentIndex, 6> relation_segments;  // per dst local row, src local rows

  explicit GraphIndex(const graph::Snapshot& snapshot);
  std::size_t count(graph::NodeKind kind) const { return members[static_cast<std::size_t>(kind)].size(); }
};

// Per-kind node states of one layer. Absent kinds have no Var.
using KindStates = std::array<std::optional<Var>, graph::kNodeKinds>;

inline constexpr std::size_t kNoParam = static_cast<std::size_t>(-1);

// The last layer only updates companies, so it holds kNoParam for the rest.
struct SageLayerParams {
  std::array<std::size_t, 6> relation;  // [D, D] transform per relation
  std::array<std::size_t, graph::kNodeKinds> combine_weight;  // [2D, D]
  std::array<std::size_t, graph::kNodeKinds> combine_bias;    // [1, D]
};

struct GatLayerParams {
  std::size_t weight = 0;      // [D, D] shared by every node kind
  std::size_t attention_dst = 0;  // [D, 1]
  std::size_t attention_src = 0;  // [D, 1]
};

struct AttentionRecord {
  Var weights;                       // [E, 1]
  std::vector<std::size_t> offsets;  // segment per destination node
  std::vector<std::size_t> dst;      // snapshot node ids
  std::vector<std::size_t> src;      // snapshot node id per entry
};

// m_{i,r} = mean of neighbour states under relation r times T_r, summed over
// relations; x'_i = ReLU([x_i || m_i] W_kind + b_kind). Only the kinds flagged
// in `compute` are produced.
KindStates sage_layer(Tape& tape, const ParameterStore& store, const SageLayerParams& params,
                      const GraphIndex& index, const KindStates& x,
                      const std::array<bool, graph::kNodeKinds>& compute);

// Single-head attention over self plus every typed neighbour:
// e_ij = LeakyReLU(a_dst . W x_i + a_src . W x_j), softmax per node, output
// ReLU(sum_j alpha_ij W x_j).
KindStates gat_layer(Tape& tape, const ParameterStore& store, const GatLayerParams& params,
                     const graph::Snapshot& snapshot, const GraphIndex& index, const KindStates& x,
                     const std::array<bool, graph::kNodeKinds>& compute, double slope,
                     AttentionRecord* record);

struct ForwardOutput {
  Var logits;                          // [companies, 1]
  std::vector<std::size_t> companies;  // snapshot node id of each row
  std::vector<AttentionRecord> attention;  // GAT only, one per layer
};

class Model {
 public:
  // `companies` and `industries` are the keys of the learnable embedding
  // tables.
  Model(const ModelConfig& config, std::vector<std::string> companies, std::vector<std::string> industries,
        std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  SequenceEncoder& encoder() { return encoder_; }
  const SequenceEncoder& encoder() const { return encoder_; }
  const std::vector<std::string>& company_keys() const { return company_keys_; }
  const std::vector<std::string>& industry_keys() const { return industry_keys_; }

  // Train mode uses (and updates) batch statistics in the batch norm.
  ForwardOutput forward(Tape& tape, const graph::Snapshot& snapshot, Mode mode);
  // Eval-mode probability of class 1 for every company node, in node order.
  std::vector<double> predict(const graph::Snapshot& snapshot);

  // Layer-0 node states (after the input projections).
  KindStates project_inputs(Tape& tape, const graph::Snapshot& snapshot, const GraphIndex& index, Mode mode);

  // FNV-1a over the architecture and the table keys, as 16 hex digits.
  std::string config_hash() const;

  const std::vector<SageLayerParams>& sage_layers() const { return sage_; }
  const std::vector<GatLayerParams>& gat_layers() const { return gat_; }

 private:
  Var company_rows(Tape& tape, const graph::Snapshot& snapshot, const GraphIndex& index, Mode mode);
  Var table_rows(Tape& tape, std::size_t table, const std::map<std::string, std::size_t, std::less<>>& keys,
                 const graph::Snapshot& snapshot, const std::vector<std::size_t>& nodes);

  ModelConfig config_;
  ParameterStore store_;
  SequenceEncoder encoder_;
  std::vector<std::string> company_keys_;
  std::vector<std::string> industry_keys_;
  std::map<std::string, std::size_t, std::less<>> company_row_;
  std::map<std::string, std::size_t, std::less<>> industry_row_;
  std::optional<std::size_t> company_table_, industry_table_;
  std::array<std::size_t, graph::kNodeKinds> projection_{};
  std::vector<SageLayerParams> sage_;
  std::vector<GatLayerParams> gat_;
  std::size_t head_weight_ = 0, head_bias_ = 0;
};

// Text container: header line, config hash, then every parameter and batch
// norm buffer as name, shape and hexfloat values.
void save_checkpoint(const std::filesystem::path& path, const Model& model);
// Throws ConfigError when the file was written for a different configuration.
void load_checkpoint(const std::filesystem::path& path, Model& model);

}  // namespace newsgraph::model
