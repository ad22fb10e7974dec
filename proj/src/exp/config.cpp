#include "cgn/exp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cgn::exp {

bool RunConfig::operator==(const RunConfig& o) const {
    return dataset == o.dataset && model == o.model && baseline_k == o.baseline_k && hops == o.hops &&
           seeds == o.seeds && data_seed == o.data_seed && train_fraction == o.train_fraction &&
           subsample == o.subsample && full == o.full && data_dir == o.data_dir;
}

const std::vector<std::string>& known_datasets() {
    static const std::vector<std::string> ids = {"ba-shapes",   "ba-grid",      "tree-cycles",  "tree-grid",
                                                 "ba-community", "mutagenicity", "reddit-binary"};
    return ids;
}

const std::vector<std::string>& synthetic_datasets() {
    static const std::vector<std::string> ids = {"ba-shapes", "ba-grid", "tree-cycles", "tree-grid", "ba-community"};
    return ids;
}

bool is_graph_task(const std::string& dataset) { return dataset == "mutagenicity" || dataset == "reddit-binary"; }

RunConfig default_run_config(const std::string& dataset) {
    const auto& ids = known_datasets();
    if (std::find(ids.begin(), ids.end(), dataset) == ids.end()) {
        throw ConfigError("unknown dataset '" + dataset + "'");
    }
    RunConfig c;
    c.dataset = dataset;
    auto set = [&](std::size_t convs, std::size_t hidden, std::size_t width, double lr, std::size_t epochs,
                   std::size_t batch, std::size_t k, std::size_t hops) {
        c.model.conv_count = convs;
        c.model.hidden_units = hidden;
        c.model.concept_width = width;
        c.model.learning_rate = lr;
        c.model.epochs = epochs;
        c.model.batch_size = batch;
        c.baseline_k = k;
        c.hops = hops;
    };
    if (dataset == "ba-shapes") set(4, 10, 10, 1e-3, 7000, 0, 10, 2);
    else if (dataset == "ba-grid") set(4, 10, 10, 1e-3, 3000, 0, 10, 4);
    else if (dataset == "tree-grid") set(7, 20, 20, 1e-4, 20000, 0, 10, 4);
    else if (dataset == "tree-cycles") set(3, 10, 10, 1e-3, 7000, 0, 10, 4);
    else if (dataset == "ba-community") set(6, 20, 20, 1e-4, 10000, 0, 30, 2);
    else set(4, 40, 10, 1e-3, 1000, 16, 30, 4);
    return c;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T number(const std::string& key, const std::string& text) {
    T v{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError("invalid value '" + text + "' for '" + key + "'");
    }
    return v;
}

bool boolean(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("invalid boolean '" + text + "' for '" + key + "'");
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "dataset") {
            throw ConfigError("'dataset' cannot be set from a config file; use sections");
        } else if (key == "model") {
            c.model.kind = gnn::parse_model_kind(value);
        } else if (key == "layer") {
            c.model.layer = gnn::parse_layer_kind(value);
        } else if (key == "convs") {
            c.model.conv_count = number<std::size_t>(key, value);
        } else if (key == "hidden") {
            c.model.hidden_units = number<std::size_t>(key, value);
        } else if (key == "concept_width") {
            c.model.concept_width = number<std::size_t>(key, value);
        } else if (key == "lr") {
            c.model.learning_rate = number<double>(key, value);
        } else if (key == "epochs") {
            c.model.epochs = number<std::size_t>(key, value);
        } else if (key == "batch") {
            c.model.batch_size = number<std::size_t>(key, value);
        } else if (key == "epsilon") {
            c.model.epsilon = number<double>(key, value);
        } else if (key == "tau") {
            c.model.tau = number<double>(key, value);
        } else if (key == "len_temperature") {
            c.model.len.temperature = number<double>(key, value);
        } else if (key == "len_entropy_weight") {
            c.model.len.entropy_weight = number<double>(key, value);
        } else if (key == "len_relevance_threshold") {
            c.model.len.relevance_threshold = number<double>(key, value);
        } else if (key == "len_hidden") {
            c.model.len.hidden_units = number<std::size_t>(key, value);
        } else if (key == "len_max_minterms") {
            c.model.len.max_minterms = number<std::size_t>(key, value);
        } else if (key == "baseline_k") {
            c.baseline_k = number<std::size_t>(key, value);
        } else if (key == "hops") {
            c.hops = number<std::size_t>(key, value);
        } else if (key == "seeds") {
            c.seeds.clear();
            std::istringstream is(value);
            std::string part;
            while (std::getline(is, part, ',')) c.seeds.push_back(number<std::uint64_t>(key, trim(part)));
            if (c.seeds.empty()) throw ConfigError("'seeds' must list at least one seed");
        } else if (key == "data_seed") {
            c.data_seed = number<std::uint64_t>(key, value);
        } else if (key == "train_fraction") {
            c.train_fraction = number<double>(key, value);
            if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw ConfigError("'train_fraction' must lie in (0, 1)");
        } else if (key == "subsample") {
            c.subsample = number<std::size_t>(key, value);
        } else if (key == "full") {
            c.full = boolean(key, value);
        } else if (key == "data_dir") {
            c.data_dir = value;
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_run_config(const std::string& text, const std::string& dataset) {
    RunConfig c = default_run_config(dataset);
    std::istringstream is(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            const auto& ids = known_datasets();
            if (std::find(ids.begin(), ids.end(), section) == ids.end()) {
                throw ConfigError("line " + std::to_string(lineno) + ": unknown dataset section '" + section + "'");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        if (!section.empty() && section != dataset) continue;
        try {
            apply_setting(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    try {
        c.model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::string& dataset) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), dataset);
}

std::string render_run_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[" << c.dataset << "]\n";
    os << "model = " << gnn::to_string(c.model.kind) << '\n';
    os << "layer = " << gnn::to_string(c.model.layer) << '\n';
    os << "convs = " << c.model.conv_count << '\n';
    os << "hidden = " << c.model.hidden_units << '\n';
    os << "concept_width = " << c.model.concept_width << '\n';
    os << "lr = " << fmt(c.model.learning_rate) << '\n';
    os << "epochs = " << c.model.epochs << '\n';
    os << "batch = " << c.model.batch_size << '\n';
    os << "epsilon = " << fmt(c.model.epsilon) << '\n';
    os << "tau = " << fmt(c.model.tau) << '\n';
    os << "len_temperature = " << fmt(c.model.len.temperature) << '\n';
    os << "len_entropy_weight = " << fmt(c.model.len.entropy_weight) << '\n';
    os << "len_relevance_threshold = " << fmt(c.model.len.relevance_threshold) << '\n';
    os << "len_hidden = " << c.model.len.hidden_units << '\n';
    os << "len_max_minterms = " << c.model.len.max_minterms << '\n';
    os << "baseline_k = " << c.baseline_k << '\n';
    os << "hops = " << c.hops << '\n';
    os << "seeds = ";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
    os << '\n';
    os << "data_seed = " << c.data_seed << '\n';
    os << "train_fraction = " << fmt(c.train_fraction) << '\n';
    os << "subsample = " << c.subsample << '\n';
    os << "full = " << (c.full ? "true" : "false") << '\n';
    os << "data_dir = " << c.data_dir << '\n';
    return os.str();
}

}  // namespace cgn::exp
