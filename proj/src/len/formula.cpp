#include "cgn/len/formula.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cgn::len {

bool Minterm::holds(std::uint64_t pattern) const {
    for (const Literal& l : literals) {
        const bool bit = (pattern >> l.concept_index) & 1U;
        if (bit != l.positive) return false;
    }
    return true;
}

bool LogicFormula::holds(std::uint64_t pattern) const {
    return std::any_of(minterms.begin(), minterms.end(), [&](const Minterm& m) { return m.holds(pattern); });
}

std::vector<bool> eval_formula(const LogicFormula& f, const cem::BooleanConcept& r) {
    for (const Minterm& m : f.minterms) {
        for (const Literal& l : m.literals) {
            if (l.concept_index >= r.width) throw std::invalid_argument("eval_formula: literal outside concept width");
        }
    }
    std::vector<bool> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = f.holds(r.rows[i]);
    return out;
}

namespace {

struct Candidate {
    Minterm minterm;
    std::uint64_t key = 0;
    std::vector<char> fires;
};

double one_vs_rest_accuracy(const std::vector<char>& fires, const std::vector<std::size_t>& rows,
                            const std::vector<int>& labels, int c) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if ((fires[k] != 0) == (labels[rows[k]] == c)) ++hits;
    }
    return rows.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(rows.size());
}

}  // namespace

std::vector<LogicFormula> extract_formulas(const ExtractionInput& in) {
    if (in.patterns == nullptr) throw std::invalid_argument("extract_formulas: missing patterns");
    const cem::BooleanConcept& r = *in.patterns;
    const std::size_t n = r.size();
    if (in.labels.size() != n || in.predictions.size() != n || in.selection.size() != n) {
        throw std::invalid_argument("extract_formulas: inputs disagree in length");
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (in.selection[i]) rows.push_back(i);
    }

    std::vector<LogicFormula> formulas(in.relevant.size());
    for (std::size_t cls = 0; cls < in.relevant.size(); ++cls) {
        const int c = static_cast<int>(cls);
        LogicFormula& f = formulas[cls];
        f.class_id = c;
        std::uint64_t relevant_mask = 0;
        for (std::size_t u : in.relevant[cls]) relevant_mask |= std::uint64_t{1} << u;

        std::map<std::uint64_t, std::size_t> support;
        for (std::size_t i : rows) {
            if (in.labels[i] == c && in.predictions[i] == c) ++support[r.rows[i] & relevant_mask];
        }
        if (support.empty()) {
            f.flagged_empty = true;
            continue;
        }

        std::vector<Candidate> candidates;
        for (const auto& [key, count] : support) {
            Candidate cand;
            cand.key = key;
            for (std::size_t u : in.relevant[cls]) cand.minterm.literals.push_back({u, ((key >> u) & 1U) != 0});
            std::sort(cand.minterm.literals.begin(), cand.minterm.literals.end(),
                      [](const Literal& a, const Literal& b) { return a.concept_index < b.concept_index; });
            cand.minterm.support = count;
            cand.fires.resize(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k) cand.fires[k] = cand.minterm.holds(r.rows[rows[k]]);
            cand.minterm.accuracy = one_vs_rest_accuracy(cand.fires, rows, in.labels, c);
            candidates.push_back(std::move(cand));
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.minterm.accuracy != b.minterm.accuracy) return a.minterm.accuracy > b.minterm.accuracy;
            if (a.minterm.support != b.minterm.support) return a.minterm.support > b.minterm.support;
            return a.key < b.key;
        });

        std::vector<char> current(rows.size(), 0);
        double best = one_vs_rest_accuracy(current, rows, in.labels, c);
        for (const Candidate& cand : candidates) {
            if (f.minterms.size() >= in.max_minterms) break;
            std::vector<char> trial = current;
            for (std::size_t k = 0; k < rows.size(); ++k) trial[k] = trial[k] || cand.fires[k];
            const double acc = one_vs_rest_accuracy(trial, rows, in.labels, c);
            if (acc > best) {
                best = acc;
                current = std::move(trial);
                f.minterms.push_back(cand.minterm);
            }
        }
    }
    return formulas;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

template <typename T>
T parse_number(const std::string& text, const std::string& line) {
    T value{};
    const std::string t = trim(text);
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw std::invalid_argument("parse_formulas: bad number '" + t + "' in line: " + line);
    }
    return value;
}

}  // namespace

std::string formulas_to_text(const std::vector<LogicFormula>& formulas) {
    std::ostringstream os;
    for (const LogicFormula& f : formulas) {
        os << "y=" << f.class_id << " <- ";
        if (f.minterms.empty()) {
            os << "false";
        } else {
            for (std::size_t k = 0; k < f.minterms.size(); ++k) {
                if (k > 0) os << " | ";
                const auto& lits = f.minterms[k].literals;
                if (lits.empty()) os << "true";
                for (std::size_t j = 0; j < lits.size(); ++j) {
                    if (j > 0) os << " & ";
                    os << (lits[j].positive ? "" : "~") << 'c' << lits[j].concept_index;
                }
            }
        }
        os << "  #";
        if (f.flagged_empty) os << " flagged-empty";
        if (!f.minterms.empty()) {
            os << " support=";
            for (std::size_t k = 0; k < f.minterms.size(); ++k) os << (k ? "," : "") << f.minterms[k].support;
            os << " accuracy=";
            for (std::size_t k = 0; k < f.minterms.size(); ++k) {
                os << (k ? "," : "") << format_double(f.minterms[k].accuracy);
            }
        }
        os << '\n';
    }
    return os.str();
}

std::vector<LogicFormula> parse_formulas(const std::string& text) {
    std::vector<LogicFormula> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        LogicFormula f;
        std::string body = line;
        std::string meta;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            body = line.substr(0, hash);
            meta = line.substr(hash + 1);
        }
        const auto arrow = body.find("<-");
        if (body.rfind("y=", 0) != 0 || arrow == std::string::npos) {
            throw std::invalid_argument("parse_formulas: expected 'y=<class> <- ...' in line: " + line);
        }
        f.class_id = parse_number<int>(body.substr(2, arrow - 2), line);
        const std::string rhs = trim(body.substr(arrow + 2));
        if (rhs != "false") {
            for (const std::string& term : split(rhs, '|')) {
                Minterm m;
                const std::string t = trim(term);
                if (t.empty()) throw std::invalid_argument("parse_formulas: empty minterm in line: " + line);
                if (t != "true") {
                    for (const std::string& lit_text : split(t, '&')) {
                        std::string lit = trim(lit_text);
                        Literal l;
                        if (!lit.empty() && lit[0] == '~') {
                            l.positive = false;
                            lit = trim(lit.substr(1));
                        }
                        if (lit.size() < 2 || lit[0] != 'c') {
                            throw std::invalid_argument("parse_formulas: bad literal '" + lit + "' in line: " + line);
                        }
                        l.concept_index = parse_number<std::size_t>(lit.substr(1), line);
                        m.literals.push_back(l);
                    }
                }
                f.minterms.push_back(std::move(m));
            }
        }
        std::istringstream ms(meta);
        std::string field;
        while (ms >> field) {
            if (field == "flagged-empty") {
                f.flagged_empty = true;
            } else if (field.rfind("support=", 0) == 0) {
                const auto parts = split(field.substr(8), ',');
                if (parts.size() != f.minterms.size()) throw std::invalid_argument("parse_formulas: support count mismatch");
                for (std::size_t k = 0; k < parts.size(); ++k) {
                    f.minterms[k].support = parse_number<std::size_t>(parts[k], line);
                }
            } else if (field.rfind("accuracy=", 0) == 0) {
                const auto parts = split(field.substr(9), ',');
                if (parts.size() != f.minterms.size()) {
                    throw std::invalid_argument("parse_formulas: accuracy count mismatch");
                }
                for (std::size_t k = 0; k < parts.size(); ++k) {
                    f.minterms[k].accuracy = parse_number<double>(parts[k], line);
                }
            } else {
                throw std::invalid_argument("parse_formulas: unknown field '" + field + "'");
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace cgn::len
