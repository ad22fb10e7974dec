#include "cgn/diff/tape.hpp"

#include <stdexcept>

namespace cgn::diff {

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

Var Tape::variable(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::vector<std::size_t> parents, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    for (std::size_t p : parents) {
        if (p >= nodes_.size()) throw std::logic_error("Tape::record: parent not yet on tape");
        n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
    }
    n.parents = std::move(parents);
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

const Matrix& Tape::grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    if (!n.has_grad) {
        n.grad = Matrix(n.value.rows, n.value.cols);
    }
    return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return;
    if (!g.same_shape(n.value)) {
        throw std::logic_error("Tape::accumulate: gradient shape " + g.shape_str() + " vs value " +
                               n.value.shape_str());
    }
    if (!n.has_grad) {
        n.grad = g;
        n.has_grad = true;
        return;
    }
    for (std::size_t i = 0; i < g.data.size(); ++i) n.grad.data[i] += g.data[i];
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: loss recorded on a different tape");
    const Matrix& lv = value(loss.id);
    if (lv.rows != 1 || lv.cols != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got " + lv.shape_str());
    }
    for (Node& n : nodes_) {
        n.has_grad = false;
        n.grad = Matrix();
    }
    accumulate(loss.id, Matrix(1, 1, 1.0));
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.has_grad || !n.backward) continue;
        n.backward(*this, n.grad, n.value);
    }
}

}  // namespace cgn::diff
