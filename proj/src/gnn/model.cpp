#include "cgn/gnn/model.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "cgn/cem/concepts.hpp"
#include "cgn/diff/ops.hpp"

namespace cgn::gnn {

using diff::Matrix;
using diff::Var;

ModelKind parse_model_kind(const std::string& s) {
    if (s == "cgn") return ModelKind::Concept;
    if (s == "vanilla") return ModelKind::Vanilla;
    throw std::invalid_argument("unknown model kind '" + s + "' (expected cgn or vanilla)");
}

std::string to_string(ModelKind k) { return k == ModelKind::Concept ? "cgn" : "vanilla"; }

void ModelConfig::validate() const {
    if (conv_count < 1) throw std::invalid_argument("conv_count must be at least 1");
    if (hidden_units < 1) throw std::invalid_argument("hidden_units must be at least 1");
    if (concept_width < 2) throw std::invalid_argument("concept_width must be at least 2");
    if (concept_width > 64) throw std::invalid_argument("concept_width above 64 is not supported");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning_rate must be positive");
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
    if (!(len.temperature > 0.0)) throw std::invalid_argument("len temperature must be positive");
    if (len.entropy_weight < 0.0) throw std::invalid_argument("len entropy weight must be nonnegative");
    if (len.hidden_units < 1) throw std::invalid_argument("len hidden units must be at least 1");
}

namespace {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    T value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("bad value '" + text + "' for key '" + key + "'");
    }
    return value;
}

}  // namespace

std::string ModelConfig::render() const {
    std::ostringstream os;
    os << "model = " << to_string(kind) << '\n'
       << "layer = " << to_string(layer) << '\n'
       << "convs = " << conv_count << '\n'
       << "hidden = " << hidden_units << '\n'
       << "concept_width = " << concept_width << '\n'
       << "lr = " << fmt(learning_rate) << '\n'
       << "epochs = " << epochs << '\n'
       << "batch = " << batch_size << '\n'
       << "seed = " << seed << '\n'
       << "epsilon = " << fmt(epsilon) << '\n'
       << "tau = " << fmt(tau) << '\n'
       << "len_temperature = " << fmt(len.temperature) << '\n'
       << "len_entropy_weight = " << fmt(len.entropy_weight) << '\n'
       << "len_relevance_threshold = " << fmt(len.relevance_threshold) << '\n'
       << "len_hidden = " << len.hidden_units << '\n'
       << "len_max_minterms = " << len.max_minterms << '\n';
    return os.str();
}

ModelConfig parse_model_config(const std::string& text) {
    ModelConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) throw std::invalid_argument("expected 'key = value', got: " + line);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key == "model") c.kind = parse_model_kind(val);
        else if (key == "layer") c.layer = parse_layer_kind(val);
        else if (key == "convs") c.conv_count = parse_value<std::size_t>(key, val);
        else if (key == "hidden") c.hidden_units = parse_value<std::size_t>(key, val);
        else if (key == "concept_width") c.concept_width = parse_value<std::size_t>(key, val);
        else if (key == "lr") c.learning_rate = parse_value<double>(key, val);
        else if (key == "epochs") c.epochs = parse_value<std::size_t>(key, val);
        else if (key == "batch") c.batch_size = parse_value<std::size_t>(key, val);
        else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, val);
        else if (key == "epsilon") c.epsilon = parse_value<double>(key, val);
        else if (key == "tau") c.tau = parse_value<double>(key, val);
        else if (key == "len_temperature") c.len.temperature = parse_value<double>(key, val);
        else if (key == "len_entropy_weight") c.len.entropy_weight = parse_value<double>(key, val);
        else if (key == "len_relevance_threshold") c.len.relevance_threshold = parse_value<double>(key, val);
        else if (key == "len_hidden") c.len.hidden_units = parse_value<std::size_t>(key, val);
        else if (key == "len_max_minterms") c.len.max_minterms = parse_value<std::size_t>(key, val);
        else throw std::invalid_argument("unknown model config key '" + key + "'");
    }
    return c;
}

GraphBatch node_batch(const graph::Dataset& d) {
    if (d.task != graph::TaskKind::Node) throw std::invalid_argument("node_batch: dataset is a graph task");
    GraphBatch b;
    b.ops = build_operators(d.graph.node_count, d.graph.edges);
    b.features = d.graph.features;
    return b;
}

GraphBatch graph_batch(const graph::Dataset& d, std::span<const std::size_t> graphs) {
    if (d.task != graph::TaskKind::Graph) throw std::invalid_argument("graph_batch: dataset is a node task");
    GraphBatch b;
    b.pooled = true;
    b.graphs.assign(graphs.begin(), graphs.end());
    std::vector<std::size_t> local(d.graph.node_count, SIZE_MAX);
    std::size_t n = 0;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        const std::size_t g = graphs[k];
        if (g >= d.graph_count()) throw std::out_of_range("graph_batch: graph id out of range");
        for (std::size_t v = d.graph_offsets[g]; v < d.graph_offsets[g + 1]; ++v) {
            local[v] = n++;
            b.segment.push_back(k);
        }
    }
    const std::size_t width = d.graph.features.cols;
    b.features = Matrix(n, width);
    for (std::size_t v = 0; v < d.graph.node_count; ++v) {
        if (local[v] == SIZE_MAX) continue;
        for (std::size_t j = 0; j < width; ++j) b.features(local[v], j) = d.graph.features(v, j);
    }
    std::vector<graph::Edge> edges;
    for (const auto& [u, v] : d.graph.edges) {
        if (local[u] != SIZE_MAX) edges.emplace_back(local[u], local[v]);
    }
    b.ops = build_operators(n, edges);
    return b;
}

GraphBatch full_batch(const graph::Dataset& d) {
    if (d.task == graph::TaskKind::Node) return node_batch(d);
    std::vector<std::size_t> all(d.graph_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return graph_batch(d, all);
}

GnnModel::GnnModel(ModelConfig cfg, std::size_t input_width, std::size_t class_count)
    : cfg_(std::move(cfg)), input_width_(input_width), class_count_(class_count) {
    cfg_.validate();
    if (input_width_ == 0) throw std::invalid_argument("GnnModel: input width must be positive");
    if (class_count_ < 2) throw std::invalid_argument("GnnModel: at least two classes required");
    Rng rng(cfg_.seed);
    std::size_t in = input_width_;
    for (std::size_t i = 0; i < cfg_.conv_count; ++i) {
        const bool last = i + 1 == cfg_.conv_count;
        const std::size_t out = last ? cfg_.concept_width : cfg_.hidden_units;
        const std::string p = "conv" + std::to_string(i) + ".";
        switch (cfg_.layer) {
            case LayerKind::GCN:
                params_.add_glorot(p + "w", in, out, rng);
                params_.add(p + "b", Matrix(1, out));
                break;
            case LayerKind::GIN:
                params_.add_glorot(p + "w1", in, out, rng);
                params_.add(p + "b1", Matrix(1, out));
                params_.add_glorot(p + "w2", out, out, rng);
                params_.add(p + "b2", Matrix(1, out));
                break;
            case LayerKind::SAGE:
                params_.add_glorot(p + "w_self", in, out, rng);
                params_.add_glorot(p + "w_neigh", in, out, rng);
                params_.add(p + "b", Matrix(1, out));
                break;
        }
        in = out;
    }
    if (cfg_.kind == ModelKind::Concept) {
        len::add_len_params(params_, cfg_.concept_width, class_count_, cfg_.len, rng);
    } else {
        params_.add_glorot("vanilla.w", cfg_.concept_width, class_count_, rng);
        params_.add("vanilla.b", Matrix(1, class_count_));
    }
}

Var GnnModel::trunk(const diff::BoundParams& p, const GraphBatch& batch) const {
    if (batch.features.cols != input_width_) {
        throw std::invalid_argument("GnnModel: feature width " + std::to_string(batch.features.cols) +
                                    " does not match model input width " + std::to_string(input_width_));
    }
    diff::Tape& tape = *p.vars.front().tape;
    Var h = tape.constant(batch.features);
    for (std::size_t i = 0; i < cfg_.conv_count; ++i) {
        const bool last = i + 1 == cfg_.conv_count;
        const std::string n = "conv" + std::to_string(i) + ".";
        switch (cfg_.layer) {
            case LayerKind::GCN: h = gcn_layer(batch.ops, h, p[n + "w"], p[n + "b"], last); break;
            case LayerKind::GIN:
                h = gin_layer(batch.ops, h, p[n + "w1"], p[n + "b1"], p[n + "w2"], p[n + "b2"], last);
                break;
            case LayerKind::SAGE: h = sage_layer(batch.ops, h, p[n + "w_self"], p[n + "w_neigh"], p[n + "b"], last); break;
        }
    }
    return h;
}

Var GnnModel::readout(const diff::BoundParams& p, Var x, const GraphBatch& batch,
                      std::optional<Var>& attention) const {
    if (batch.pooled) x = diff::segment_mean(x, batch.segment, batch.graphs.size());
    if (cfg_.kind == ModelKind::Concept) {
        len::LenOutput out = len::len_forward(p, x, class_count_, cfg_.len);
        attention = out.attention;
        return out.logits;
    }
    return diff::log_softmax_rows(diff::add_row(diff::matmul(x, p["vanilla.w"]), p["vanilla.b"]));
}

ForwardPass GnnModel::forward(const diff::BoundParams& p, const GraphBatch& batch) const {
    ForwardPass pass;
    pass.h = trunk(p, batch);
    if (cfg_.kind == ModelKind::Concept) {
        pass.q = cem::fuzzify(pass.h, cfg_.epsilon);
        pass.logits = readout(p, *pass.q, batch, pass.attention);
    } else {
        pass.logits = readout(p, pass.h, batch, pass.attention);
    }
    return pass;
}

Var GnnModel::loss(const ForwardPass& pass, std::span<const int> labels, const std::vector<bool>& mask) const {
    if (cfg_.kind == ModelKind::Concept) {
        return len::len_loss(len::LenOutput{pass.logits, *pass.attention}, labels, mask, cfg_.len);
    }
    return diff::cross_entropy_mean(pass.logits, labels, mask);
}

Inference GnnModel::infer(const GraphBatch& batch) const {
    diff::Tape tape;
    diff::BoundParams p(params_, tape);
    ForwardPass pass = forward(p, batch);
    Inference out;
    out.h = pass.h.value();
    if (pass.q) out.q = pass.q->value();
    out.logits = pass.logits.value();
    out.predictions = argmax_rows(out.logits);
    return out;
}

std::vector<int> GnnModel::predict_from_q(const Matrix& q, const GraphBatch& batch) const {
    if (cfg_.kind != ModelKind::Concept) throw std::logic_error("predict_from_q: vanilla models have no concept layer");
    if (q.cols != cfg_.concept_width) throw std::invalid_argument("predict_from_q: encoding width mismatch");
    diff::Tape tape;
    diff::BoundParams p(params_, tape);
    std::optional<Var> attention;
    return argmax_rows(readout(p, tape.constant(q), batch, attention).value());
}

Matrix GnnModel::normalized_attention() const {
    if (cfg_.kind != ModelKind::Concept) throw std::logic_error("normalized_attention: vanilla models have no attention");
    return len::normalized_attention(params_, cfg_.len);
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, const std::string& what)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

namespace {

double step(GnnModel& model, const GraphBatch& batch, std::span<const int> labels, const std::vector<bool>& mask,
            diff::AdamState& adam, std::size_t epoch) {
    diff::Tape tape;
    diff::BoundParams p(model.params(), tape);
    ForwardPass pass = model.forward(p, batch);
    Var loss = model.loss(pass, labels, mask);
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value)) throw TrainingDiverged(epoch, "loss is not finite");
    tape.backward(loss);
    try {
        diff::adam_step(model.params(), p.grads(), adam);
    } catch (const std::runtime_error& e) {
        throw TrainingDiverged(epoch, e.what());
    }
    return value;
}

}  // namespace

TrainResult train(GnnModel& model, const graph::Dataset& d, const graph::Split& split) {
    const ModelConfig& cfg = model.config();
    cfg.validate();
    if (split.train.size() != d.sample_count() || split.test.size() != d.sample_count()) {
        throw std::invalid_argument("train: split does not match dataset");
    }
    diff::AdamState adam;
    adam.learning_rate = cfg.learning_rate;
    TrainResult result;
    result.loss_trace.reserve(cfg.epochs);

    if (d.task == graph::TaskKind::Node) {
        const GraphBatch batch = node_batch(d);
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            result.loss_trace.push_back(step(model, batch, d.labels, split.train, adam, e));
        }
    } else {
        std::vector<std::size_t> train_graphs;
        for (std::size_t g = 0; g < d.graph_count(); ++g) {
            if (split.train[g]) train_graphs.push_back(g);
        }
        if (train_graphs.empty()) throw std::invalid_argument("train: no training graphs");
        const std::size_t bs = cfg.batch_size == 0 ? train_graphs.size() : cfg.batch_size;
        Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        std::optional<GraphBatch> cached;
        if (bs >= train_graphs.size()) cached = graph_batch(d, train_graphs);
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            if (!cached) order_rng.shuffle(train_graphs);
            double total = 0.0;
            std::size_t batches = 0;
            for (std::size_t start = 0; start < train_graphs.size(); start += bs) {
                const std::size_t end = std::min(start + bs, train_graphs.size());
                std::span<const std::size_t> ids(train_graphs.data() + start, end - start);
                const GraphBatch batch = cached ? *cached : graph_batch(d, ids);
                std::vector<int> labels;
                labels.reserve(ids.size());
                for (std::size_t g : ids) labels.push_back(d.labels[g]);
                total += step(model, batch, labels, std::vector<bool>(ids.size(), true), adam, e);
                ++batches;
            }
            result.loss_trace.push_back(total / static_cast<double>(batches));
        }
    }

    const Inference inf = model.infer(full_batch(d));
    result.train_accuracy = evaluate_accuracy(inf.predictions, d.labels, split.train);
    result.test_accuracy = evaluate_accuracy(inf.predictions, d.labels, split.test);
    return result;
}

std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(m.rows, 0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.cols; ++j) {
            if (m(i, j) > m(i, best)) best = j;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

double evaluate_accuracy(std::span<const int> predictions, std::span<const int> labels, const std::vector<bool>& mask) {
    if (predictions.size() != labels.size() || mask.size() != labels.size()) {
        throw std::invalid_argument("evaluate_accuracy: length mismatch");
    }
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        ++total;
        if (predictions[i] == labels[i]) ++correct;
    }
    if (total == 0) throw std::invalid_argument("evaluate_accuracy: empty mask");
    return static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

constexpr char kMagic[8] = {'C', 'G', 'N', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw std::runtime_error("checkpoint " + path.string() + " is truncated");
    }
    return v;
}

std::string get_string(std::istream& is, const std::filesystem::path& path) {
    const auto len = get<std::uint64_t>(is, path);
    if (len > (1U << 20)) throw std::runtime_error("checkpoint " + path.string() + " has an implausible string length");
    std::string s(len, '\0');
    if (!is.read(s.data(), static_cast<std::streamsize>(len))) {
        throw std::runtime_error("checkpoint " + path.string() + " is truncated");
    }
    return s;
}

}  // namespace

void save_checkpoint(const GnnModel& model, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
    os.write(kMagic, sizeof(kMagic));
    const std::string cfg = model.config().render();
    put<std::uint64_t>(os, cfg.size());
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    put<std::uint64_t>(os, model.input_width());
    put<std::uint64_t>(os, model.class_count());
    const diff::ParamStore& ps = model.params();
    put<std::uint64_t>(os, ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        put<std::uint64_t>(os, ps.name(i).size());
        os.write(ps.name(i).data(), static_cast<std::streamsize>(ps.name(i).size()));
        const Matrix& m = ps.value(i);
        put<std::uint64_t>(os, m.rows);
        put<std::uint64_t>(os, m.cols);
        os.write(reinterpret_cast<const char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("failed while writing checkpoint " + path.string());
}

GnnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
    char magic[sizeof(kMagic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error(path.string() + " is not a checkpoint file");
    }
    const ModelConfig cfg = parse_model_config(get_string(is, path));
    const auto input_width = get<std::uint64_t>(is, path);
    const auto classes = get<std::uint64_t>(is, path);
    GnnModel model(cfg, input_width, classes);
    diff::ParamStore& ps = model.params();
    const auto count = get<std::uint64_t>(is, path);
    if (count != ps.size()) throw std::runtime_error("checkpoint " + path.string() + " parameter count mismatch");
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::string name = get_string(is, path);
        if (!ps.contains(name)) throw std::runtime_error("checkpoint " + path.string() + " has unknown parameter " + name);
        Matrix& m = ps.value(ps.index_of(name));
        const auto rows = get<std::uint64_t>(is, path);
        const auto cols = get<std::uint64_t>(is, path);
        if (rows != m.rows || cols != m.cols) {
            throw std::runtime_error("checkpoint " + path.string() + " shape mismatch for " + name);
        }
        if (!is.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)))) {
            throw std::runtime_error("checkpoint " + path.string() + " is truncated");
        }
    }
    return model;
}

}  // namespace cgn::gnn
