#include "cgn/intervene/intervene.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cgn::intervene {

using diff::Matrix;

const OracleEntry* OracleTable::find(int key) const {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
}

OracleTable build_role_oracle(const Matrix& q, const cem::BooleanConcept& r, const std::vector<int>& roles,
                              const std::vector<bool>& train) {
    if (roles.size() != r.size() || train.size() != r.size() || q.rows != r.size()) {
        throw std::invalid_argument("build_role_oracle: length mismatch");
    }
    std::map<int, std::map<std::uint64_t, std::size_t>> counts;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (train[i]) ++counts[roles[i]][r.rows[i]];
    }
    OracleTable table;
    table.policy = "role";
    for (const auto& [role, patterns] : counts) {
        std::uint64_t best = 0;
        std::size_t best_count = 0;
        for (const auto& [pattern, c] : patterns) {
            if (c > best_count) {
                best = pattern;
                best_count = c;
            }
        }
        OracleEntry e;
        e.pattern = best;
        e.support = best_count;
        e.q.assign(q.cols, 0.0);
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!train[i] || roles[i] != role || r.rows[i] != best) continue;
            for (std::size_t u = 0; u < q.cols; ++u) e.q[u] += q(i, u);
        }
        for (double& v : e.q) v /= static_cast<double>(best_count);
        table.entries.emplace(role, std::move(e));
    }
    return table;
}

OracleTable build_label_oracle(const cem::ClusterTable& table, const std::vector<int>& node_labels,
                               const std::vector<bool>& train) {
    if (node_labels.size() != table.assignment.size() || train.size() != node_labels.size()) {
        throw std::invalid_argument("build_label_oracle: length mismatch");
    }
    std::set<int> labels;
    for (std::size_t i = 0; i < node_labels.size(); ++i) {
        if (train[i]) labels.insert(node_labels[i]);
    }
    OracleTable oracle;
    oracle.policy = "label-cluster";
    for (int label : labels) {
        double best_purity = -1.0;
        std::size_t best_size = 0;
        std::optional<std::size_t> best;
        for (std::size_t c = 0; c < table.clusters.size(); ++c) {
            std::size_t members = 0, hits = 0;
            for (std::size_t i : table.clusters[c].members) {
                if (!train[i]) continue;
                ++members;
                if (node_labels[i] == label) ++hits;
            }
            if (members == 0) continue;
            const double purity = static_cast<double>(hits) / static_cast<double>(members);
            if (purity > best_purity || (purity == best_purity && members > best_size)) {
                best_purity = purity;
                best_size = members;
                best = c;
            }
        }
        if (!best) continue;
        const cem::Cluster& cl = table.clusters[*best];
        oracle.entries.emplace(label, OracleEntry{cl.pattern, cl.centroid, best_size});
    }
    return oracle;
}

std::vector<std::size_t> eligible_nodes(const OracleTable& oracle, const cem::BooleanConcept& r,
                                        const std::vector<int>& keys, const std::vector<bool>& candidates) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!candidates[i]) continue;
        const OracleEntry* e = oracle.find(keys[i]);
        if (e != nullptr && e->pattern != r.rows[i]) out.push_back(i);
    }
    return out;
}

Matrix apply_interventions(const Matrix& q, const OracleTable& oracle, const std::vector<int>& keys,
                           const std::vector<std::size_t>& order, std::size_t budget) {
    Matrix out = q;
    const std::size_t count = std::min(budget, order.size());
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = order[k];
        const OracleEntry* e = oracle.find(keys[i]);
        if (e == nullptr) throw std::invalid_argument("apply_interventions: node without an oracle entry");
        for (std::size_t u = 0; u < q.cols; ++u) out(i, u) = e->q[u];
    }
    return out;
}

std::vector<std::size_t> budget_schedule(std::size_t eligible, std::size_t dense_until, std::size_t max_points) {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b <= std::min(eligible, dense_until); ++b) out.push_back(b);
    if (eligible <= dense_until) return out;
    const std::size_t rest = max_points > out.size() ? max_points - out.size() : 1;
    const std::size_t span = eligible - dense_until;
    for (std::size_t k = 1; k <= rest; ++k) {
        const std::size_t b = dense_until + (span * k + rest - 1) / rest;
        if (b > out.back()) out.push_back(b);
    }
    if (out.back() != eligible) out.push_back(eligible);
    return out;
}

SeedCurve intervention_curve(const gnn::GnnModel& model, const gnn::GraphBatch& batch, const Matrix& q,
                             const OracleTable& oracle, const std::vector<int>& keys,
                             const std::vector<bool>& candidates, const std::vector<int>& sample_labels,
                             const std::vector<bool>& test, std::uint64_t seed,
                             std::optional<std::size_t> max_budget) {
    const cem::BooleanConcept r = cem::booleanize(q, model.config().tau);
    std::vector<std::size_t> order = eligible_nodes(oracle, r, keys, candidates);
    Rng rng(seed);
    rng.shuffle(order);
    SeedCurve curve;
    curve.eligible = order.size();
    curve.budgets = budget_schedule(max_budget ? std::min(*max_budget, order.size()) : order.size());
    for (std::size_t b : curve.budgets) {
        const auto pred = model.predict_from_q(apply_interventions(q, oracle, keys, order, b), batch);
        curve.accuracy.push_back(gnn::evaluate_accuracy(pred, sample_labels, test));
    }
    return curve;
}

std::vector<CurvePoint> aggregate_curves(const std::vector<SeedCurve>& curves) {
    std::set<std::size_t> budgets;
    for (const auto& c : curves) budgets.insert(c.budgets.begin(), c.budgets.end());
    std::vector<CurvePoint> out;
    for (std::size_t b : budgets) {
        std::vector<double> values;
        for (const auto& c : curves) {
            if (c.budgets.empty()) continue;
            auto it = std::upper_bound(c.budgets.begin(), c.budgets.end(), b);
            const std::size_t idx = static_cast<std::size_t>(it - c.budgets.begin()) - 1;
            values.push_back(c.accuracy[idx]);
        }
        if (values.empty()) continue;
        out.push_back({b, metrics::summarize_runs(values)});
    }
    return out;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "budget,mean_accuracy,ci_low,ci_high\n";
    for (const auto& p : points) {
        os << p.budget << ',' << p.summary.mean << ',' << p.summary.ci_low << ',' << p.summary.ci_high << '\n';
    }
    return os.str();
}

}  // namespace cgn::intervene
