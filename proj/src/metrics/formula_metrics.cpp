#include "cgn/metrics/formula_metrics.hpp"

#include <map>
#include <stdexcept>

namespace cgn::metrics {

std::vector<int> formula_predictions(const std::vector<len::LogicFormula>& formulas, const cem::BooleanConcept& r,
                                     int fallback_class) {
    std::vector<int> out(r.size(), fallback_class);
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::size_t best_support = 0;
        bool fired = false;
        for (const len::LogicFormula& f : formulas) {
            for (const len::Minterm& m : f.minterms) {
                if (!m.holds(r.rows[i])) continue;
                if (!fired || m.support > best_support ||
                    (m.support == best_support && f.class_id < out[i])) {
                    fired = true;
                    best_support = m.support;
                    out[i] = f.class_id;
                }
            }
        }
    }
    return out;
}

double formula_accuracy(const std::vector<len::LogicFormula>& formulas, const cem::BooleanConcept& r,
                        const std::vector<int>& labels, const std::vector<bool>& mask, int fallback_class) {
    if (labels.size() != r.size() || mask.size() != r.size()) {
        throw std::invalid_argument("formula_accuracy: length mismatch");
    }
    const auto pred = formula_predictions(formulas, r, fallback_class);
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!mask[i]) continue;
        ++total;
        if (pred[i] == labels[i]) ++correct;
    }
    if (total == 0) throw std::invalid_argument("formula_accuracy: empty mask");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double formula_complexity(const std::vector<len::LogicFormula>& formulas) {
    if (formulas.empty()) return 0.0;
    double total = 0.0;
    for (const auto& f : formulas) total += static_cast<double>(f.complexity());
    return total / static_cast<double>(formulas.size());
}

int majority_class(const std::vector<int>& labels, const std::vector<bool>& mask) {
    std::map<int, std::size_t> counts;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (mask[i]) ++counts[labels[i]];
    }
    if (counts.empty()) throw std::invalid_argument("majority_class: empty mask");
    int best = counts.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [label, c] : counts) {
        if (c > best_count) {
            best = label;
            best_count = c;
        }
    }
    return best;
}

}  // namespace cgn::metrics
