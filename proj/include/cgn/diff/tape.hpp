#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cgn/diff/matrix.hpp"

namespace cgn::diff {

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    const Matrix& grad() const;
    std::size_t rows() const { return value().rows; }
    std::size_t cols() const { return value().cols; }
};

/// Append-only record of a forward computation. Nodes are stored in creation
/// order, which is a topological order: parents always precede children.
/// A tape belongs to a single thread of execution.
class Tape {
public:
    /// Receives the gradient flowing into the node (and the node's own value)
    /// and accumulates into the parents.
    using BackwardFn = std::function<void(Tape&, const Matrix& grad_out, const Matrix& value_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf that accumulates a gradient (model parameter or probe input).
    Var variable(Matrix value);
    /// Leaf without gradient tracking.
    Var constant(Matrix value);
    /// Interior node; `backward` may be empty for non-differentiable results.
    Var record(Matrix value, std::vector<std::size_t> parents, BackwardFn backward);

    /// Reverse sweep from a 1x1 loss. All accumulators are zeroed first, so
    /// repeated calls give identical gradients.
    void backward(Var loss);

    const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
    /// Gradient of the last backward pass; zeros for nodes the loss does not reach.
    const Matrix& grad(std::size_t id) const;

    /// Adds `g` into the accumulator of node `id` (used by backward rules).
    void accumulate(std::size_t id, const Matrix& g);
    bool tracks_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        std::vector<std::size_t> parents;
        BackwardFn backward;
        bool requires_grad = false;
        mutable Matrix grad;
        bool has_grad = false;
    };
    std::vector<Node> nodes_;
};

}  // namespace cgn::diff
