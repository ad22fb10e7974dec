// Command-line experiment runner.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cgn/exp/config.hpp"
#include "cgn/exp/report.hpp"
#include "cgn/exp/runner.hpp"

namespace {

using namespace cgn;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
    std::string dataset = "ba-shapes";
    std::optional<std::string> model;
    std::optional<std::string> layer;
    std::optional<std::string> config_file;
    std::vector<std::string> overrides;
    std::optional<std::string> seeds;
    std::optional<std::size_t> epochs;
    std::optional<std::string> out;
    std::optional<std::string> data_dir;
    std::optional<std::size_t> jobs;
    bool full = false;
    bool quiet = false;
};

void add_common(CLI::App* app, CommonOptions& o, bool with_dataset = true) {
    if (with_dataset) app->add_option("-d,--dataset", o.dataset, "dataset id")->capture_default_str();
    app->add_option("-m,--model", o.model, "cgn or vanilla");
    app->add_option("--layer", o.layer, "gcn, gin or sage");
    app->add_option("-c,--config", o.config_file, "key = value config file with [dataset] sections");
    app->add_option("--set", o.overrides, "extra key=value setting (repeatable)");
    app->add_option("--seeds", o.seeds, "comma-separated seeds");
    app->add_option("--epochs", o.epochs, "training epochs");
    app->add_option("-o,--out", o.out, "output root (default: $CGL_OUT or ./out)");
    app->add_option("--data-dir", o.data_dir, "directory holding TU collections");
    app->add_option("-j,--jobs", o.jobs, "seeds trained concurrently");
    app->add_flag("--full", o.full, "use the whole social-network collection");
    app->add_flag("-q,--quiet", o.quiet, "suppress progress output");
}

exp::RunConfig resolve_config(const CommonOptions& o, const std::string& dataset) {
    exp::RunConfig cfg =
        o.config_file ? exp::load_run_config(*o.config_file, dataset) : exp::default_run_config(dataset);
    auto set = [&](const std::string& k, const std::string& v) { exp::apply_setting(cfg, k, v); };
    for (const std::string& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw exp::ConfigError("--set expects key=value, got '" + kv + "'");
        set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.model) set("model", *o.model);
    if (o.layer) set("layer", *o.layer);
    if (o.seeds) set("seeds", *o.seeds);
    if (o.epochs) set("epochs", std::to_string(*o.epochs));
    if (o.data_dir) set("data_dir", *o.data_dir);
    if (o.full) cfg.full = true;
    try {
        cfg.model.validate();
    } catch (const std::invalid_argument& e) {
        throw exp::ConfigError(e.what());
    }
    return cfg;
}

std::size_t job_count(const CommonOptions& o) {
    if (o.jobs) return std::max<std::size_t>(1, *o.jobs);
    return std::max(1U, std::thread::hardware_concurrency());
}

exp::Progress progress_sink(const CommonOptions& o) {
    if (o.quiet) return {};
    return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

int finish(const exp::RunRecord& record) {
    for (const auto& s : record.seeds) {
        if (!s.metrics.error.empty()) return kExitRuntime;
    }
    return kExitOk;
}

/// Loads the checkpoint of every configured seed.
std::vector<gnn::GnnModel> load_models(const exp::RunConfig& cfg, const exp::OutputLayout& layout) {
    std::vector<gnn::GnnModel> models;
    for (std::uint64_t seed : cfg.seeds) {
        const fs::path path = layout.checkpoint(cfg.dataset, cfg.model.kind, seed);
        if (!fs::exists(path)) throw std::runtime_error("missing checkpoint " + path.string());
        models.push_back(gnn::load_checkpoint(path));
    }
    return models;
}

exp::RunRecord train_and_save(const exp::RunConfig& cfg, const exp::DatasetBundle& bundle,
                              const exp::OutputLayout& layout, const CommonOptions& o) {
    exp::RunRecord record = exp::run_seeds(cfg, bundle, job_count(o), progress_sink(o));
    for (const auto& s : record.seeds) {
        if (s.model && s.metrics.error.empty()) gnn::save_checkpoint(*s.model, layout.checkpoint(cfg.dataset, cfg.model.kind, s.seed));
    }
    exp::write_curve(record, layout);
    return record;
}

int cmd_train(const CommonOptions& o) {
    const exp::RunConfig cfg = resolve_config(o, o.dataset);
    const exp::OutputLayout layout{exp::output_root(o.out)};
    const exp::DatasetBundle bundle = exp::prepare_dataset(cfg);
    exp::RunRecord record = train_and_save(cfg, bundle, layout, o);
    exp::merge_report(layout.report(), {exp::run_json(record)});
    std::cout << "wrote " << layout.report().string() << '\n';
    return finish(record);
}

exp::RunRecord evaluate_checkpoints(const exp::RunConfig& cfg, const exp::DatasetBundle& bundle,
                                    const exp::OutputLayout& layout, std::optional<std::size_t> budget) {
    exp::RunRecord record;
    record.config = cfg;
    std::vector<gnn::GnnModel> models = load_models(cfg, layout);
    for (std::size_t k = 0; k < models.size(); ++k) {
        exp::SeedRun run;
        run.seed = cfg.seeds[k];
        try {
            run.metrics = exp::evaluate_model(models[k], bundle, cfg, budget);
        } catch (const std::exception& e) {
            run.metrics.seed = run.seed;
            run.metrics.kind = cfg.model.kind;
            run.metrics.error = e.what();
        }
        record.seeds.push_back(std::move(run));
    }
    return record;
}

int cmd_evaluate(const CommonOptions& o, const std::optional<std::string>& baseline) {
    exp::RunConfig cfg = resolve_config(o, o.dataset);
    if (baseline) {
        if (*baseline != "gcexplainer") throw exp::ConfigError("unknown baseline '" + *baseline + "'");
        cfg.model.kind = gnn::ModelKind::Vanilla;
    }
    const exp::OutputLayout layout{exp::output_root(o.out)};
    const exp::DatasetBundle bundle = exp::prepare_dataset(cfg);
    exp::RunRecord record = evaluate_checkpoints(cfg, bundle, layout, std::nullopt);
    exp::write_curve(record, layout);
    const auto run = exp::run_json(record);
    exp::merge_report(layout.report(), {run});
    std::cout << run["summary"].dump(2) << '\n';
    return finish(record);
}

int cmd_explain(const CommonOptions& o) {
    const exp::RunConfig cfg = resolve_config(o, o.dataset);
    const exp::OutputLayout layout{exp::output_root(o.out)};
    const exp::DatasetBundle bundle = exp::prepare_dataset(cfg);
    std::vector<gnn::GnnModel> models = load_models(cfg, layout);
    std::string formulas;
    for (std::size_t k = 0; k < models.size(); ++k) {
        formulas += exp::write_explanations(models[k], bundle, cfg, cfg.seeds[k], layout);
        std::cout << "wrote " << layout.concepts(cfg.dataset, cfg.seeds[k]).string() << '\n';
    }
    if (!formulas.empty()) {
        fs::create_directories(layout.root);
        std::ofstream out(layout.formulas());
        out << formulas;
        std::cout << "wrote " << layout.formulas().string() << '\n';
    }
    return kExitOk;
}

int cmd_intervene(const CommonOptions& o, std::optional<std::size_t> budget) {
    exp::RunConfig cfg = resolve_config(o, o.dataset);
    cfg.model.kind = gnn::ModelKind::Concept;
    const exp::OutputLayout layout{exp::output_root(o.out)};
    const exp::DatasetBundle bundle = exp::prepare_dataset(cfg);
    exp::RunRecord record = evaluate_checkpoints(cfg, bundle, layout, budget);
    exp::write_curve(record, layout);
    exp::merge_report(layout.report(), {exp::run_json(record)});
    if (!record.curve_file.empty()) std::cout << "wrote " << (layout.root / record.curve_file).string() << '\n';
    return finish(record);
}

int cmd_sweep(const CommonOptions& o) {
    const exp::RunConfig base = resolve_config(o, o.dataset);
    const exp::OutputLayout layout{exp::output_root(o.out)};
    const exp::DatasetBundle bundle = exp::prepare_dataset(base);
    const std::vector<std::size_t> hidden = exp::is_graph_task(base.dataset) ? std::vector<std::size_t>{20, 30, 40}
                                                                             : std::vector<std::size_t>{10, 20, 30};
    const std::vector<double> rates = {0.1, 0.001, 0.0001};
    nlohmann::json rows = nlohmann::json::array();
    std::optional<std::size_t> best;
    double best_acc = -1.0;
    for (std::size_t h : hidden) {
        for (double lr : rates) {
            exp::RunConfig cfg = base;
            cfg.model.hidden_units = h;
            cfg.model.learning_rate = lr;
            exp::RunRecord record = exp::run_seeds(cfg, bundle, job_count(o), progress_sink(o));
            const auto acc = exp::metric_values([&] {
                std::vector<exp::SeedMetrics> m;
                for (const auto& s : record.seeds) m.push_back(s.metrics);
                return m;
            }(), "test_accuracy");
            const bool diverged = acc.size() != record.seeds.size();
            double mean = 0.0;
            for (double a : acc) mean += a;
            if (!acc.empty()) mean /= static_cast<double>(acc.size());
            rows.push_back({{"hidden", h}, {"lr", lr}, {"mean_test_accuracy", acc.empty() ? nlohmann::json(nullptr) : nlohmann::json(mean)},
                            {"diverged", diverged}});
            if (!diverged && mean > best_acc) {
                best_acc = mean;
                best = rows.size() - 1;
            }
        }
    }
    nlohmann::json out{{"dataset", base.dataset},
                       {"model", gnn::to_string(base.model.kind)},
                       {"selection", "highest mean test accuracy among runs without divergence"},
                       {"grid", rows}};
    out["best"] = best ? rows[*best] : nlohmann::json(nullptr);
    fs::create_directories(layout.root);
    const fs::path path = layout.root / ("sweep-" + base.dataset + "-" + gnn::to_string(base.model.kind) + ".json");
    std::ofstream(path) << out.dump(2) << '\n';
    std::cout << "wrote " << path.string() << '\n';
    return best ? kExitOk : kExitRuntime;
}

int cmd_reproduce(const CommonOptions& o, bool include_reddit, const std::vector<std::string>& only) {
    const exp::OutputLayout layout{exp::output_root(o.out)};
    std::vector<std::string> datasets = only;
    if (datasets.empty()) {
        datasets = exp::synthetic_datasets();
        datasets.push_back("mutagenicity");
        if (include_reddit) datasets.push_back("reddit-binary");
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const std::string& dataset : datasets) {
        exp::RunConfig base = resolve_config(o, dataset);
        std::optional<exp::DatasetBundle> bundle;
        try {
            bundle = exp::prepare_dataset(base);
        } catch (const std::exception& e) {
            std::cerr << dataset << ": skipped: " << e.what() << '\n';
            failures.push_back({{"dataset", dataset}, {"error", e.what()}});
            continue;
        }
        std::vector<nlohmann::json> runs;
        for (gnn::ModelKind kind : {gnn::ModelKind::Concept, gnn::ModelKind::Vanilla}) {
            exp::RunConfig cfg = base;
            cfg.model.kind = kind;
            exp::RunRecord record = train_and_save(cfg, *bundle, layout, o);
            if (kind == gnn::ModelKind::Concept) {
                std::string formulas;
                for (const auto& s : record.seeds) {
                    if (s.model && s.metrics.error.empty()) {
                        formulas += exp::write_explanations(*s.model, *bundle, cfg, s.seed, layout);
                    }
                }
                std::ofstream(layout.root / ("formulas-" + dataset + ".txt")) << formulas;
            }
            for (const auto& s : record.seeds) {
                if (!s.metrics.error.empty()) {
                    failures.push_back({{"dataset", dataset}, {"model", gnn::to_string(kind)}, {"seed", s.seed}, {"error", s.metrics.error}});
                }
            }
            runs.push_back(exp::run_json(record));
        }
        exp::merge_report(layout.report(), runs);
    }
    std::ifstream in(layout.report());
    nlohmann::json report = in ? nlohmann::json::parse(in) : nlohmann::json::object();
    report["failures"] = failures;
    std::ofstream(layout.report()) << report.dump(2) << '\n';
    const std::string table = exp::comparison_table(report);
    std::ofstream(layout.root / "table.txt") << table;
    std::cout << table;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concept graph network experiments"};
    app.require_subcommand(1);

    CommonOptions train_opts, eval_opts, explain_opts, intervene_opts, sweep_opts, repro_opts;
    std::optional<std::string> baseline;
    std::optional<std::size_t> budget;
    bool include_reddit = false;
    std::vector<std::string> only;

    auto* train = app.add_subcommand("train", "train every seed, save checkpoints and metrics");
    add_common(train, train_opts);
    auto* evaluate = app.add_subcommand("evaluate", "recompute metrics from checkpoints");
    add_common(evaluate, eval_opts);
    evaluate->add_option("--baseline", baseline, "gcexplainer: k-Means concepts on vanilla checkpoints");
    auto* explain = app.add_subcommand("explain", "export concept subgraphs and logic formulas");
    add_common(explain, explain_opts);
    auto* intervene = app.add_subcommand("intervene", "intervention accuracy curves from checkpoints");
    add_common(intervene, intervene_opts);
    intervene->add_option("--budget", budget, "largest number of intervened nodes");
    auto* sweep = app.add_subcommand("sweep", "grid search over hidden units and learning rate");
    add_common(sweep, sweep_opts);
    auto* reproduce = app.add_subcommand("reproduce", "all datasets, both models, every seed");
    add_common(reproduce, repro_opts, false);
    reproduce->add_flag("--reddit", include_reddit, "include the subsampled social-network collection");
    reproduce->add_option("--only", only, "restrict to these datasets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*train) return cmd_train(train_opts);
        if (*evaluate) return cmd_evaluate(eval_opts, baseline);
        if (*explain) return cmd_explain(explain_opts);
        if (*intervene) return cmd_intervene(intervene_opts, budget);
        if (*sweep) return cmd_sweep(sweep_opts);
        if (*reproduce) return cmd_reproduce(repro_opts, include_reddit, only);
    } catch (const exp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
