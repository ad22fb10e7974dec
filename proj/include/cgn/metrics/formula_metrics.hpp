#pragma once

#include <vector>

#include "cgn/len/formula.hpp"

namespace cgn::metrics {

/// Class predictions from per-class formulas. A sample takes the class whose
/// formula fires; when several fire, the one whose firing minterm has the
/// largest support (lowest class on ties); when none fires, `fallback_class`.
std::vector<int> formula_predictions(const std::vector<len::LogicFormula>& formulas, const cem::BooleanConcept& r,
                                     int fallback_class);

double formula_accuracy(const std::vector<len::LogicFormula>& formulas, const cem::BooleanConcept& r,
                        const std::vector<int>& labels, const std::vector<bool>& mask, int fallback_class);

/// Mean minterm count over classes.
double formula_complexity(const std::vector<len::LogicFormula>& formulas);

/// Most frequent label among masked samples (lowest on ties).
int majority_class(const std::vector<int>& labels, const std::vector<bool>& mask);

}  // namespace cgn::metrics
