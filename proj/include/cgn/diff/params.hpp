#pragma once

#include <map>
#include <string>
#include <vector>

#include "cgn/diff/rng.hpp"
#include "cgn/diff/tape.hpp"

namespace cgn::diff {

/// Named, ordered collection of trainable matrices.
class ParamStore {
public:
    /// Registers a parameter; names must be unique.
    std::size_t add(std::string name, Matrix value);
    /// Glorot-uniform initialized fan_in x fan_out weight.
    std::size_t add_glorot(std::string name, std::size_t fan_in, std::size_t fan_out, Rng& rng);

    std::size_t size() const { return values_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    Matrix& value(std::size_t i) { return values_.at(i); }
    const Matrix& value(std::size_t i) const { return values_.at(i); }
    std::size_t index_of(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.contains(name); }

    /// Puts every parameter on the tape as a gradient-tracking leaf.
    std::vector<Var> bind(Tape& tape) const;

private:
    std::vector<std::string> names_;
    std::vector<Matrix> values_;
    std::map<std::string, std::size_t> index_;
};

/// Parameters of a store as bound on one tape, addressable by name.
struct BoundParams {
    const ParamStore* store = nullptr;
    std::vector<Var> vars;

    BoundParams(const ParamStore& s, Tape& tape) : store(&s), vars(s.bind(tape)) {}
    Var operator[](const std::string& name) const { return vars[store->index_of(name)]; }
    std::vector<Matrix> grads() const {
        std::vector<Matrix> g;
        g.reserve(vars.size());
        for (const Var& v : vars) g.push_back(v.grad());
        return g;
    }
};

/// First/second moment state for adaptive-moment updates.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
    long step_count = 0;
};

/// One bias-corrected adaptive-moment step. Throws std::runtime_error on a
/// non-finite gradient, naming the offending parameter.
void adam_step(ParamStore& params, const std::vector<Matrix>& grads, AdamState& state);

}  // namespace cgn::diff
