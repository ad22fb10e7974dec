#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgn/diff/params.hpp"
#include "cgn/gnn/layers.hpp"
#include "cgn/graph/graph.hpp"
#include "cgn/len/entropy_readout.hpp"

namespace cgn::gnn {

enum class ModelKind { Concept, Vanilla };

ModelKind parse_model_kind(const std::string& s);
std::string to_string(ModelKind k);

struct ModelConfig {
    ModelKind kind = ModelKind::Concept;
    LayerKind layer = LayerKind::GCN;
    std::size_t conv_count = 4;
    std::size_t hidden_units = 10;
    /// Width of the final convolution, i.e. the concept encoding size.
    std::size_t concept_width = 10;
    double learning_rate = 1e-3;
    std::size_t epochs = 7000;
    /// Graphs per optimizer step for graph tasks; 0 trains on everything at once.
    std::size_t batch_size = 0;
    std::uint64_t seed = 42;
    double epsilon = 1e-6;
    double tau = 0.5;
    len::LenConfig len;

    /// Throws std::invalid_argument on values outside their domain.
    void validate() const;
    /// `key = value` lines; parse_model_config(render()) == *this.
    std::string render() const;
    bool operator==(const ModelConfig&) const = default;
};

ModelConfig parse_model_config(const std::string& text);

/// Nodes fed through the trunk in one pass: a whole node-task graph, or the
/// disjoint union of some member graphs of a graph-task collection.
struct GraphBatch {
    GraphOperators ops;
    diff::Matrix features;
    /// Graph tasks: position of each node's graph within `graphs`.
    std::vector<std::size_t> segment;
    /// Graph tasks: dataset graph ids in batch order.
    std::vector<std::size_t> graphs;
    bool pooled = false;

    std::size_t sample_count() const { return pooled ? graphs.size() : ops.node_count; }
};

GraphBatch node_batch(const graph::Dataset& d);
GraphBatch graph_batch(const graph::Dataset& d, std::span<const std::size_t> graphs);
/// All samples of the dataset in one batch.
GraphBatch full_batch(const graph::Dataset& d);

struct ForwardPass {
    diff::Var h;
    /// Fuzzy concept encoding (concept models only).
    std::optional<diff::Var> q;
    diff::Var logits;
    std::optional<diff::Var> attention;
};

/// Everything a trained model computes on a batch, without a tape.
struct Inference {
    diff::Matrix h;
    /// Node-level fuzzy encoding; empty for vanilla models.
    diff::Matrix q;
    diff::Matrix logits;
    std::vector<int> predictions;
};

class GnnModel {
public:
    GnnModel(ModelConfig cfg, std::size_t input_width, std::size_t class_count);

    const ModelConfig& config() const { return cfg_; }
    std::size_t input_width() const { return input_width_; }
    std::size_t class_count() const { return class_count_; }
    diff::ParamStore& params() { return params_; }
    const diff::ParamStore& params() const { return params_; }

    ForwardPass forward(const diff::BoundParams& p, const GraphBatch& batch) const;
    diff::Var loss(const ForwardPass& pass, std::span<const int> labels, const std::vector<bool>& mask) const;

    Inference infer(const GraphBatch& batch) const;
    /// Readout recomputed from node-level encodings q (pooled for graph
    /// batches); the trunk is not evaluated. Concept models only.
    std::vector<int> predict_from_q(const diff::Matrix& q, const GraphBatch& batch) const;
    /// Per-class attention divided by its maximum. Concept models only.
    diff::Matrix normalized_attention() const;

private:
    diff::Var trunk(const diff::BoundParams& p, const GraphBatch& batch) const;
    diff::Var readout(const diff::BoundParams& p, diff::Var h_or_q, const GraphBatch& batch,
                      std::optional<diff::Var>& attention) const;

    ModelConfig cfg_;
    std::size_t input_width_ = 0;
    std::size_t class_count_ = 0;
    diff::ParamStore params_;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t epoch, const std::string& what);
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

struct TrainResult {
    /// Mean loss of each epoch.
    std::vector<double> loss_trace;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

/// Adam on the masked cross-entropy (plus the attention entropy penalty for
/// concept models). Throws TrainingDiverged on a non-finite loss or gradient.
TrainResult train(GnnModel& model, const graph::Dataset& d, const graph::Split& split);

std::vector<int> argmax_rows(const diff::Matrix& m);
/// Fraction of masked samples with prediction == label. Throws on an empty mask.
double evaluate_accuracy(std::span<const int> predictions, std::span<const int> labels, const std::vector<bool>& mask);

void save_checkpoint(const GnnModel& model, const std::filesystem::path& path);
GnnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace cgn::gnn
