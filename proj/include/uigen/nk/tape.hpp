#pragma once

#include <deque>
#include <functional>
#include <initializer_list>

#include "uigen/nk/tensor.hpp"

namespace uigen::nk {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while its tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Tensor& value() const;
    bool valid() const noexcept { return tape != nullptr && id >= 0; }
};

/// Reverse-mode gradient tape.
///
/// Nodes are appended in evaluation order, which is a topological order of the graph, so
/// `backward` walks the record once in reverse. Gradients accumulate additively, so an input
/// feeding several ops receives the sum of the branch gradients. A non-recording tape
/// evaluates the same ops without keeping backward closures (inference).
///
/// A tape belongs to one thread. Distinct tapes may run concurrently as long as the
/// external tensors they reference are not being written.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, int self)>;

    explicit Tape(bool record = true) : record_(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const noexcept { return record_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Leaf referencing `external` without copying. `external` must outlive the tape.
    Var leaf(const Tensor& external, bool requires_grad = true);
    /// Leaf owning a copy of `value`.
    Var variable(Tensor value, bool requires_grad = true);
    /// Owned leaf that never receives gradient.
    Var constant(Tensor value) { return variable(std::move(value), false); }

    const Tensor& value(Var v) const { return node(v.id).val(); }
    bool requires_grad(Var v) const { return node(v.id).requires_grad; }

    /// Gradient of the last `backward` target with respect to v; empty if v was not reached.
    const Tensor& grad(Var v) const { return node(v.id).grad; }

    /// Zero-initialised on first use. For op implementations.
    Tensor& grad_buffer(int id);

    /// Seeds d(scalar)/d(scalar) = 1 and propagates to every recorded input.
    void backward(Var scalar);

    /// Appends an op result. `fn` is kept only when recording and some parent needs gradient.
    Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);

private:
    struct Node {
        Tensor owned;
        const Tensor* ext = nullptr;
        Tensor grad;
        bool requires_grad = false;
        BackwardFn backward;

        const Tensor& val() const noexcept { return ext != nullptr ? *ext : owned; }
    };

    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    Node& node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }

    std::deque<Node> nodes_;
    bool record_;
};

}  // namespace uigen::nk
