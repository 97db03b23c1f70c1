#include "uigen/nk/tape.hpp"

#include "uigen/core/error.hpp"

namespace uigen::nk {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::leaf(const Tensor& external, bool requires_grad) {
    Node n;
    n.ext = &external;
    n.requires_grad = record_ && requires_grad;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::variable(Tensor value, bool requires_grad) {
    Node n;
    n.owned = std::move(value);
    n.requires_grad = record_ && requires_grad;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buffer(int id) {
    Node& n = node(id);
    if (n.grad.empty()) n.grad = Tensor(n.val().shape(), 0.0);
    return n.grad;
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
    bool needs = false;
    if (record_) {
        for (const Var& p : parents) {
            if (p.tape != this) throw ShapeError("op mixes values from different tapes");
            needs = needs || node(p.id).requires_grad;
        }
    }
    Node n;
    n.owned = std::move(value);
    n.requires_grad = needs;
    if (needs) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var scalar) {
    if (!record_) throw ShapeError("backward on a non-recording tape");
    if (value(scalar).size() != 1) throw ShapeError("backward needs a scalar, got " + value(scalar).shape_str());
    for (auto& n : nodes_) n.grad = Tensor();
    grad_buffer(scalar.id)[0] = 1.0;
    for (int id = scalar.id; id >= 0; --id) {
        Node& n = node(id);
        if (n.backward && !n.grad.empty()) n.backward(*this, id);
    }
}

}  // namespace uigen::nk
