#include "cgn/diff/params.hpp"

#include <cmath>
#include <stdexcept>

namespace cgn::diff {

std::size_t ParamStore::add(std::string name, Matrix value) {
    if (index_.contains(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    index_[name] = values_.size();
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return values_.size() - 1;
}

std::size_t ParamStore::add_glorot(std::string name, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data) v = rng.uniform(-limit, limit);
    return add(std::move(name), std::move(w));
}

std::size_t ParamStore::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter named " + name);
    return it->second;
}

std::vector<Var> ParamStore::bind(Tape& tape) const {
    std::vector<Var> vars;
    vars.reserve(values_.size());
    for (const Matrix& v : values_) vars.push_back(tape.variable(v));
    return vars;
}

void adam_step(ParamStore& params, const std::vector<Matrix>& grads, AdamState& state) {
    if (grads.size() != params.size()) throw std::invalid_argument("adam_step: one gradient per parameter required");
    if (state.first_moment.empty()) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.first_moment.emplace_back(params.value(i).rows, params.value(i).cols);
            state.second_moment.emplace_back(params.value(i).rows, params.value(i).cols);
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!grads[i].same_shape(params.value(i))) {
            throw std::invalid_argument("adam_step: gradient shape mismatch for " + params.name(i));
        }
        if (!grads[i].all_finite()) throw std::runtime_error("adam_step: non-finite gradient for " + params.name(i));
    }
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = params.value(i);
        Matrix& m = state.first_moment[i];
        Matrix& v = state.second_moment[i];
        const Matrix& g = grads[i];
        for (std::size_t k = 0; k < p.data.size(); ++k) {
            m.data[k] = state.beta1 * m.data[k] + (1.0 - state.beta1) * g.data[k];
            v.data[k] = state.beta2 * v.data[k] + (1.0 - state.beta2) * g.data[k] * g.data[k];
            const double mhat = m.data[k] / c1;
            const double vhat = v.data[k] / c2;
            p.data[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace cgn::diff
