#include "cgn/exp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "cgn/graph/synthetic.hpp"
#include "cgn/graph/tu_format.hpp"
#include "cgn/metrics/decision_tree.hpp"
#include "cgn/metrics/formula_metrics.hpp"
#include "cgn/metrics/kmeans.hpp"

namespace cgn::exp {

namespace fs = std::filesystem;
using diff::Matrix;

namespace {

std::string tu_name(const std::string& dataset) {
    if (dataset == "mutagenicity") return "Mutagenicity";
    if (dataset == "reddit-binary") return "REDDIT-BINARY";
    throw ConfigError("dataset '" + dataset + "' is not a TU collection");
}

}  // namespace

graph::Dataset load_dataset(const RunConfig& cfg) {
    if (graph::is_synthetic_id(cfg.dataset)) {
        graph::Dataset d = graph::generate_synthetic(graph::default_spec(cfg.dataset, cfg.data_seed));
        d.name = cfg.dataset;
        return d;
    }
    const std::string name = tu_name(cfg.dataset);
    std::vector<fs::path> candidates;
    if (const char* env = std::getenv("CGL_DATA"); env != nullptr && *env != '\0') candidates.push_back(fs::path(env) / name);
    candidates.push_back(fs::path(cfg.data_dir) / name);
    for (const fs::path& dir : candidates) {
        if (!fs::is_directory(dir)) continue;
        graph::Dataset d = graph::load_tu_dataset(dir);
        d.name = cfg.dataset;
        if (cfg.dataset == "reddit-binary" && !cfg.full) d = graph::subsample_graphs(d, cfg.subsample, cfg.data_seed);
        return d;
    }
    std::string tried;
    for (const fs::path& dir : candidates) tried += (tried.empty() ? "" : ", ") + dir.string();
    throw DataUnavailable("dataset '" + cfg.dataset + "' not found (looked in " + tried + ")");
}

DatasetBundle prepare_dataset(const RunConfig& cfg) {
    DatasetBundle b;
    b.data = load_dataset(cfg);
    b.split = graph::make_split(b.data.labels, cfg.train_fraction, cfg.data_seed);
    const std::size_t n = b.data.graph.node_count;
    b.node_keys.resize(n);
    b.node_labels.resize(n);
    b.node_train.resize(n);
    b.node_test.resize(n);
    const bool graph_task = b.data.task == graph::TaskKind::Graph;
    b.has_roles = !graph_task && b.data.annotations.size() == n;
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t s = graph_task ? b.data.graph_indicator[v] : v;
        b.node_labels[v] = b.data.labels[s];
        b.node_train[v] = b.split.train[s];
        b.node_test[v] = b.split.test[s];
        b.node_keys[v] = b.has_roles ? b.data.annotations[v].role : b.node_labels[v];
    }
    return b;
}

namespace {

/// k-Means clusters of vanilla embeddings in the same shape as concept clusters.
cem::ClusterTable kmeans_table(const Matrix& h, std::size_t k, std::uint64_t seed) {
    metrics::KMeansConfig kc;
    kc.k = std::min(k, h.rows);
    kc.seed = seed;
    const metrics::KMeansResult km = metrics::kmeans(h, kc);
    cem::ClusterTable table;
    table.width = kc.k;
    for (std::size_t c = 0; c < kc.k; ++c) {
        cem::Cluster cl;
        cl.pattern = c;
        for (std::size_t i = 0; i < h.rows; ++i) {
            if (km.assignment[i] == c) cl.members.push_back(i);
        }
        if (cl.members.empty()) continue;
        cl.centroid.assign(km.centroids.row(c).begin(), km.centroids.row(c).end());
        cl.rare = cl.members.size() <= cem::kRareClusterSize;
        table.clusters.push_back(std::move(cl));
    }
    std::stable_sort(table.clusters.begin(), table.clusters.end(),
                     [](const cem::Cluster& a, const cem::Cluster& b) { return a.members.size() > b.members.size(); });
    table.assignment.assign(h.rows, 0);
    for (std::size_t c = 0; c < table.clusters.size(); ++c) {
        for (std::size_t i : table.clusters[c].members) table.assignment[i] = c;
    }
    return table;
}

/// Per-sample concept features for the vanilla baseline: one-hot cluster ids
/// for nodes, normalized cluster histograms for graphs.
Matrix baseline_features(const cem::ClusterTable& table, const DatasetBundle& b) {
    const std::size_t k = table.clusters.size();
    if (b.data.task == graph::TaskKind::Node) return metrics::one_hot(table.assignment, k);
    Matrix m(b.data.graph_count(), k);
    for (std::size_t v = 0; v < table.assignment.size(); ++v) m(b.data.graph_indicator[v], table.assignment[v]) += 1.0;
    for (std::size_t g = 0; g < m.rows; ++g) {
        const double size = static_cast<double>(b.data.graph_offsets[g + 1] - b.data.graph_offsets[g]);
        for (std::size_t c = 0; c < k; ++c) m(g, c) /= size;
    }
    return m;
}

Matrix pooled(const Matrix& q, const graph::Dataset& d) {
    Matrix out(d.graph_count(), q.cols);
    for (std::size_t v = 0; v < q.rows; ++v) {
        for (std::size_t u = 0; u < q.cols; ++u) out(d.graph_indicator[v], u) += q(v, u);
    }
    for (std::size_t g = 0; g < out.rows; ++g) {
        const double size = static_cast<double>(d.graph_offsets[g + 1] - d.graph_offsets[g]);
        for (std::size_t u = 0; u < q.cols; ++u) out(g, u) /= size;
    }
    return out;
}

}  // namespace

ConceptView concept_view(const gnn::GnnModel& model, const DatasetBundle& b, const RunConfig& cfg) {
    ConceptView view;
    view.inference = model.infer(gnn::full_batch(b.data));
    const Matrix* space = nullptr;
    if (model.config().kind == gnn::ModelKind::Concept) {
        view.r = cem::booleanize(view.inference.q, model.config().tau);
        view.table = cem::assign_clusters(view.r, view.inference.q);
        view.sample_r = b.data.task == graph::TaskKind::Node
                            ? view.r
                            : cem::booleanize(pooled(view.inference.q, b.data), model.config().tau);
        space = &view.inference.q;
    } else {
        view.table = kmeans_table(view.inference.h, cfg.baseline_k, model.config().seed);
        space = &view.inference.h;
    }
    view.representatives = cem::concept_representatives(view.table, *space, b.data.graph, cfg.hops);
    return view;
}

namespace {

metrics::PurityReport purity_of(const ConceptView& view, const RunConfig& cfg) {
    std::vector<std::vector<graph::Subgraph>> reps;
    for (const auto& slots : view.representatives) {
        std::vector<graph::Subgraph> subs;
        for (const auto& r : slots) {
            if (!r.exhausted()) subs.push_back(*r.neighborhood);
        }
        reps.push_back(std::move(subs));
    }
    metrics::GedOptions opt;
    opt.size_cap = metrics::ged_size_cap(cfg.dataset);
    return metrics::concept_purity(reps, cfg.dataset == "mutagenicity", opt);
}

}  // namespace

SeedMetrics evaluate_model(const gnn::GnnModel& model, const DatasetBundle& b, const RunConfig& cfg,
                           std::optional<std::size_t> max_budget) {
    SeedMetrics m;
    m.seed = model.config().seed;
    m.kind = model.config().kind;
    const ConceptView view = concept_view(model, b, cfg);
    const auto& pred = view.inference.predictions;
    m.train_accuracy = gnn::evaluate_accuracy(pred, b.data.labels, b.split.train);
    m.test_accuracy = gnn::evaluate_accuracy(pred, b.data.labels, b.split.test);
    for (const auto& c : view.table.clusters) {
        m.clusters.push_back({m.kind == gnn::ModelKind::Concept ? cem::pattern_string(c.pattern, view.table.width)
                                                                 : std::to_string(c.pattern),
                              c.members.size(), c.rare});
    }
    m.purity = purity_of(view, cfg);

    if (m.kind == gnn::ModelKind::Vanilla) {
        m.completeness = metrics::concept_completeness(baseline_features(view.table, b), b.data.labels, b.split.train,
                                                       b.split.test);
        return m;
    }

    m.completeness = metrics::concept_completeness(metrics::bits_to_features(view.sample_r), b.data.labels,
                                                   b.split.train, b.split.test);

    len::ExtractionInput in;
    in.patterns = &view.sample_r;
    in.labels = b.data.labels;
    in.predictions = pred;
    in.selection = b.split.train;
    in.relevant = len::relevant_concepts(model.normalized_attention(), model.config().len.relevance_threshold);
    in.max_minterms = model.config().len.max_minterms;
    m.formulas = len::extract_formulas(in);
    const int fallback = metrics::majority_class(b.data.labels, b.split.train);
    m.formula_accuracy = metrics::formula_accuracy(m.formulas, view.sample_r, b.data.labels, b.split.test, fallback);
    m.formula_complexity = metrics::formula_complexity(m.formulas);

    const intervene::OracleTable oracle =
        b.has_roles ? intervene::build_role_oracle(view.inference.q, view.r, b.node_keys, b.node_train)
                    : intervene::build_label_oracle(view.table, b.node_labels, b.node_train);
    m.oracle_policy = oracle.policy;
    std::size_t covered = 0, agree = 0;
    for (std::size_t v = 0; v < view.r.size(); ++v) {
        if (!b.node_train[v]) continue;
        const intervene::OracleEntry* e = oracle.find(b.node_keys[v]);
        if (e == nullptr) continue;
        ++covered;
        if (e->pattern == view.r.rows[v]) ++agree;
    }
    if (covered > 0) m.oracle_agreement = static_cast<double>(agree) / static_cast<double>(covered);
    m.curve = intervene::intervention_curve(model, gnn::full_batch(b.data), view.inference.q, oracle, b.node_keys,
                                            b.node_test, b.data.labels, b.split.test, m.seed, max_budget);
    return m;
}

RunRecord run_seeds(const RunConfig& cfg, const DatasetBundle& b, std::size_t jobs, const Progress& progress) {
    RunRecord record;
    record.config = cfg;
    record.seeds.resize(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto say = [&](const std::string& msg) {
        if (!progress) return;
        std::lock_guard<std::mutex> lock(log_mutex);
        progress(msg);
    };
    auto worker = [&] {
        for (std::size_t k = next++; k < cfg.seeds.size(); k = next++) {
            SeedRun& run = record.seeds[k];
            run.seed = cfg.seeds[k];
            run.metrics.seed = run.seed;
            run.metrics.kind = cfg.model.kind;
            const std::string tag = cfg.dataset + "/" + gnn::to_string(cfg.model.kind) + "/seed " + std::to_string(run.seed);
            try {
                gnn::ModelConfig mc = cfg.model;
                mc.seed = run.seed;
                run.model.emplace(mc, b.data.graph.features.cols, b.data.num_classes);
                say(tag + ": training");
                run.train = gnn::train(*run.model, b.data, b.split);
                run.metrics = evaluate_model(*run.model, b, cfg);
                say(tag + ": test accuracy " + std::to_string(run.metrics.test_accuracy));
            } catch (const std::exception& e) {
                run.metrics.error = e.what();
                say(tag + ": failed: " + e.what());
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, cfg.seeds.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return record;
}

fs::path OutputLayout::checkpoint(const std::string& dataset, gnn::ModelKind kind, std::uint64_t seed) const {
    return root / "checkpoints" / (dataset + "-" + gnn::to_string(kind) + "-" + std::to_string(seed) + ".bin");
}

fs::path OutputLayout::curve(const std::string& dataset) const { return root / "curves" / (dataset + ".csv"); }

fs::path OutputLayout::concepts(const std::string& dataset, std::uint64_t seed) const {
    return root / "concepts" / (dataset + "-" + std::to_string(seed));
}

fs::path output_root(const std::optional<std::string>& explicit_root) {
    if (explicit_root && !explicit_root->empty()) return *explicit_root;
    if (const char* env = std::getenv("CGL_OUT"); env != nullptr && *env != '\0') return env;
    return "out";
}

void write_curve(RunRecord& record, const OutputLayout& layout) {
    std::vector<intervene::SeedCurve> curves;
    for (const auto& s : record.seeds) {
        if (s.metrics.curve) curves.push_back(*s.metrics.curve);
    }
    if (curves.empty()) return;
    const fs::path path = layout.curve(record.config.dataset);
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << intervene::curve_csv(intervene::aggregate_curves(curves));
    if (!out) throw std::runtime_error("cannot write " + path.string());
    record.curve_file = fs::relative(path, layout.root).generic_string();
}

std::string write_explanations(const gnn::GnnModel& model, const DatasetBundle& b, const RunConfig& cfg,
                               std::uint64_t seed, const OutputLayout& layout) {
    const ConceptView view = concept_view(model, b, cfg);
    const fs::path dir = layout.concepts(cfg.dataset, seed);
    fs::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt");
    manifest << "# concept pattern size rare\n";
    const std::size_t width = model.config().kind == gnn::ModelKind::Concept ? view.table.width : 0;
    for (std::size_t c = 0; c < view.table.clusters.size(); ++c) {
        const cem::Cluster& cl = view.table.clusters[c];
        const std::string pattern = width > 0 ? cem::pattern_string(cl.pattern, width) : std::to_string(cl.pattern);
        manifest << c << ' ' << pattern << ' ' << cl.members.size() << ' ' << (cl.rare ? "rare" : "-") << '\n';
        std::ofstream dot(dir / ("concept_" + std::to_string(c) + ".dot"));
        dot << cem::concept_dot(cl, c, width, view.representatives[c]);
    }
    if (model.config().kind != gnn::ModelKind::Concept) return {};
    len::ExtractionInput in;
    in.patterns = &view.sample_r;
    in.labels = b.data.labels;
    in.predictions = view.inference.predictions;
    in.selection = b.split.train;
    in.relevant = len::relevant_concepts(model.normalized_attention(), model.config().len.relevance_threshold);
    in.max_minterms = model.config().len.max_minterms;
    return "# " + cfg.dataset + " seed " + std::to_string(seed) + "\n" + len::formulas_to_text(len::extract_formulas(in));
}

}  // namespace cgn::exp
