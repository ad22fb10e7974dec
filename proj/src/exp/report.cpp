#include "cgn/exp/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cgn::exp {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"test_accuracy", "train_accuracy", "completeness", "purity",
                                                   "formula_accuracy", "formula_complexity"};
    return names;
}

}  // namespace

json summary_json(const metrics::SeedSummary& s) {
    return {{"values", s.values},       {"mean", s.mean},           {"ci_low", s.ci_low},
            {"ci_high", s.ci_high},     {"normality_p", s.normality_p}, {"transformed", s.transformed},
            {"lambda", s.lambda}};
}

json seed_json(const SeedMetrics& m) {
    json j;
    j["seed"] = m.seed;
    j["model"] = gnn::to_string(m.kind);
    if (!m.error.empty()) {
        j["error"] = m.error;
        return j;
    }
    j["train_accuracy"] = m.train_accuracy;
    j["test_accuracy"] = m.test_accuracy;
    j["completeness"] = optional_number(m.completeness);
    json purity;
    purity["minimum"] = optional_number(m.purity.minimum);
    purity["minimum_pairwise"] = optional_number(m.purity.minimum_pairwise);
    purity["eligible_concepts"] = m.purity.eligible;
    json concepts = json::array();
    for (const auto& c : m.purity.concepts) {
        json e{{"concept", c.cluster}, {"score", optional_number(c.score)}};
        e["ged_second"] = c.ged_second ? json(*c.ged_second) : json(nullptr);
        e["ged_third"] = c.ged_third ? json(*c.ged_third) : json(nullptr);
        if (!c.skipped.empty()) e["skipped"] = c.skipped;
        concepts.push_back(e);
    }
    purity["concepts"] = concepts;
    j["purity"] = purity;
    json clusters = json::array();
    for (const auto& c : m.clusters) clusters.push_back({{"pattern", c.pattern}, {"size", c.size}, {"rare", c.rare}});
    j["clusters"] = clusters;
    if (m.kind == gnn::ModelKind::Concept) {
        j["formula_accuracy"] = optional_number(m.formula_accuracy);
        j["formula_complexity"] = optional_number(m.formula_complexity);
        j["formulas"] = len::formulas_to_text(m.formulas);
        j["oracle_policy"] = m.oracle_policy;
        j["oracle_agreement"] = optional_number(m.oracle_agreement);
        if (m.curve) {
            j["intervention"] = {{"eligible_nodes", m.curve->eligible},
                                 {"budgets", m.curve->budgets},
                                 {"accuracy", m.curve->accuracy}};
        }
    }
    return j;
}

std::vector<double> metric_values(const std::vector<SeedMetrics>& seeds, const std::string& metric) {
    std::vector<double> out;
    for (const auto& m : seeds) {
        if (!m.error.empty()) continue;
        std::optional<double> v;
        if (metric == "test_accuracy") v = m.test_accuracy;
        else if (metric == "train_accuracy") v = m.train_accuracy;
        else if (metric == "completeness") v = m.completeness;
        else if (metric == "purity") v = m.purity.minimum;
        else if (metric == "formula_accuracy") v = m.formula_accuracy;
        else if (metric == "formula_complexity") v = m.formula_complexity;
        if (v) out.push_back(*v);
    }
    return out;
}

json run_json(const RunRecord& record) {
    json j;
    j["dataset"] = record.config.dataset;
    j["model"] = gnn::to_string(record.config.model.kind);
    j["config"] = render_run_config(record.config);
    std::vector<SeedMetrics> metrics;
    json seeds = json::array();
    for (const auto& s : record.seeds) {
        metrics.push_back(s.metrics);
        json sj = seed_json(s.metrics);
        if (s.metrics.error.empty() && !s.train.loss_trace.empty()) {
            sj["final_loss"] = s.train.loss_trace.back();
            sj["epochs"] = s.train.loss_trace.size();
        }
        seeds.push_back(sj);
    }
    j["seeds"] = seeds;
    json summary = json::object();
    for (const auto& name : metric_names()) {
        const auto values = metric_values(metrics, name);
        if (!values.empty()) summary[name] = summary_json(metrics::summarize_runs(values));
    }
    j["summary"] = summary;
    if (!record.curve_file.empty()) j["intervention_curve"] = record.curve_file;
    return j;
}

void merge_report(const std::filesystem::path& path, const std::vector<json>& runs) {
    json report;
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        try {
            report = json::parse(in);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("existing report " + path.string() + " is not valid JSON: " + e.what());
        }
    }
    if (!report.is_object()) report = json::object();
    report["schema_version"] = kReportSchemaVersion;
    report["intervention_axis"] = "intervened nodes";
    if (!report.contains("runs") || !report["runs"].is_array()) report["runs"] = json::array();
    for (const json& run : runs) {
        bool replaced = false;
        for (json& existing : report["runs"]) {
            if (existing.value("dataset", "") == run["dataset"] && existing.value("model", "") == run["model"]) {
                existing = run;
                replaced = true;
            }
        }
        if (!replaced) report["runs"].push_back(run);
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << std::setw(2) << report << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string comparison_table(const json& report) {
    std::ostringstream os;
    os << std::left << std::setw(15) << "dataset" << std::setw(9) << "model" << std::setw(20) << "metric"
       << "mean [95% CI]\n";
    if (!report.contains("runs")) return os.str();
    for (const json& run : report["runs"]) {
        for (const auto& [metric, s] : run["summary"].items()) {
            os << std::left << std::setw(15) << run["dataset"].get<std::string>() << std::setw(9)
               << run["model"].get<std::string>() << std::setw(20) << metric << std::fixed << std::setprecision(4)
               << s["mean"].get<double>() << " [" << s["ci_low"].get<double>() << ", " << s["ci_high"].get<double>()
               << "]\n";
        }
    }
    return os.str();
}

}  // namespace cgn::exp
