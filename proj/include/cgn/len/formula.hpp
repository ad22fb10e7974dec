#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgn/cem/concepts.hpp"

namespace cgn::len {

struct Literal {
    std::size_t concept_index = 0;
    bool positive = true;

    bool operator==(const Literal&) const = default;
};

/// Conjunction of literals, sorted by concept index.
struct Minterm {
    std::vector<Literal> literals;
    /// Training samples whose pattern produced this minterm.
    std::size_t support = 0;
    /// One-vs-rest accuracy of this minterm alone on the selection split.
    double accuracy = 0.0;

    bool holds(std::uint64_t pattern) const;
    bool operator==(const Minterm& o) const { return literals == o.literals; }
};

/// Disjunction of minterms explaining one class.
struct LogicFormula {
    int class_id = 0;
    std::vector<Minterm> minterms;
    /// Set when the class had no correctly classified sample to explain.
    bool flagged_empty = false;

    bool holds(std::uint64_t pattern) const;
    std::size_t complexity() const { return minterms.size(); }
};

/// Evaluates the formula on every row of r (empty formula -> all false).
std::vector<bool> eval_formula(const LogicFormula& f, const cem::BooleanConcept& r);

struct ExtractionInput {
    const cem::BooleanConcept* patterns = nullptr;
    std::vector<int> labels;
    std::vector<int> predictions;
    /// Samples used to build and select minterms.
    std::vector<bool> selection;
    /// Relevant concepts per class.
    std::vector<std::vector<std::size_t>> relevant;
    std::size_t max_minterms = 10;
};

/// Class-level DNF explanations. For each class, every correctly classified
/// selection sample contributes the minterm of its relevant concept bits;
/// minterms are then added greedily, best one-vs-rest accuracy first, as long
/// as each addition improves the formula's accuracy.
std::vector<LogicFormula> extract_formulas(const ExtractionInput& in);

/// `y=2 <- c4 & ~c1 | c7  # support=12,3 accuracy=0.95,0.9`; one line per class.
std::string formulas_to_text(const std::vector<LogicFormula>& formulas);
/// Inverse of formulas_to_text; blank lines and lines starting with '#' are
/// skipped. Throws std::invalid_argument on malformed text.
std::vector<LogicFormula> parse_formulas(const std::string& text);

}  // namespace cgn::len
