#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgn/cem/concepts.hpp"
#include "cgn/exp/config.hpp"
#include "cgn/gnn/model.hpp"
#include "cgn/intervene/intervene.hpp"
#include "cgn/len/formula.hpp"
#include "cgn/metrics/ged.hpp"

namespace cgn::exp {

/// A dataset that is not generated locally and was not found on disk.
class DataUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dataset plus the per-node views every metric needs.
struct DatasetBundle {
    graph::Dataset data;
    /// Per sample (node or graph).
    graph::Split split;
    /// Per node: ground-truth role (synthetic) or the label of the node's sample.
    std::vector<int> node_keys;
    /// Per node: belongs to a training sample.
    std::vector<bool> node_train;
    /// Per node: belongs to a test sample.
    std::vector<bool> node_test;
    /// Per node: label of the node's sample.
    std::vector<int> node_labels;
    bool has_roles = false;
};

/// Generates a synthetic benchmark or reads a TU collection from
/// `$CGL_DATA/<Name>` or `<data_dir>/<Name>`. Throws DataUnavailable.
graph::Dataset load_dataset(const RunConfig& cfg);
DatasetBundle prepare_dataset(const RunConfig& cfg);

struct ClusterInfo {
    std::string pattern;
    std::size_t size = 0;
    bool rare = false;
};

struct SeedMetrics {
    std::uint64_t seed = 0;
    gnn::ModelKind kind = gnn::ModelKind::Concept;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    /// Decision-tree accuracy from concept encodings (k-Means ids for vanilla models).
    std::optional<double> completeness;
    metrics::PurityReport purity;
    std::vector<ClusterInfo> clusters;

    std::vector<len::LogicFormula> formulas;
    std::optional<double> formula_accuracy;
    std::optional<double> formula_complexity;

    std::optional<intervene::SeedCurve> curve;
    std::string oracle_policy;
    /// Fraction of training nodes whose pattern equals their oracle pattern.
    std::optional<double> oracle_agreement;

    std::string error;
};

/// Everything derived from a trained model that explanation exports need.
struct ConceptView {
    gnn::Inference inference;
    /// Node-level encodings used for clustering (q for concept models, h for vanilla).
    cem::BooleanConcept r;
    cem::ClusterTable table;
    std::vector<std::vector<cem::Representative>> representatives;
    /// Sample-level Boolean encoding used for completeness and formulas.
    cem::BooleanConcept sample_r;
};

ConceptView concept_view(const gnn::GnnModel& model, const DatasetBundle& bundle, const RunConfig& cfg);

SeedMetrics evaluate_model(const gnn::GnnModel& model, const DatasetBundle& bundle, const RunConfig& cfg,
                           std::optional<std::size_t> max_budget = std::nullopt);

struct SeedRun {
    std::uint64_t seed = 0;
    std::optional<gnn::GnnModel> model;
    gnn::TrainResult train;
    SeedMetrics metrics;
};

struct RunRecord {
    RunConfig config;
    std::vector<SeedRun> seeds;
    /// Relative path of the aggregated intervention curve, if written.
    std::string curve_file;
};

using Progress = std::function<void(const std::string&)>;

/// Trains and evaluates every seed of `cfg` (up to `jobs` seeds at a time).
/// A failing seed is recorded in its metrics and does not stop the others.
RunRecord run_seeds(const RunConfig& cfg, const DatasetBundle& bundle, std::size_t jobs, const Progress& progress);

/// File layout under the output root.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path checkpoint(const std::string& dataset, gnn::ModelKind kind, std::uint64_t seed) const;
    std::filesystem::path report() const { return root / "report.json"; }
    std::filesystem::path curve(const std::string& dataset) const;
    std::filesystem::path concepts(const std::string& dataset, std::uint64_t seed) const;
    std::filesystem::path formulas() const { return root / "formulas.txt"; }
};

/// Output root: an explicit value, else `$CGL_OUT`, else `out`.
std::filesystem::path output_root(const std::optional<std::string>& explicit_root);

/// Writes the aggregated intervention curve of a concept run and records its path.
void write_curve(RunRecord& record, const OutputLayout& layout);

/// One DOT file per concept, a cluster manifest, and the concept's formulas.
/// Returns the formula text block written for this seed.
std::string write_explanations(const gnn::GnnModel& model, const DatasetBundle& bundle, const RunConfig& cfg,
                               std::uint64_t seed, const OutputLayout& layout);

}  // namespace cgn::exp
