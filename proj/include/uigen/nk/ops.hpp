#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uigen/nk/tape.hpp"

// Differentiable operations. Each takes and returns Vars on one tape; shapes are checked and
// mismatches throw ShapeError. Only row-wise vector broadcasting exists (add_row, layer_norm).

namespace uigen::nk {

/// [m,k] x [k,n] -> [m,n]
Var matmul(Var a, Var b);
/// Elementwise a + b, identical shapes.
Var add(Var a, Var b);
/// a[m,n] + bias[n] on every row.
Var add_row(Var a, Var bias);
Var scale(Var a, double s);
/// tanh-approximated GELU.
Var gelu(Var a);
/// Row-wise softmax with max subtraction.
Var softmax_rows(Var x);
/// Per-row (x - mean) / sqrt(var + eps) * gain + bias, population variance.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
/// Rows of table[V,d] selected by ids -> [ids.size(), d].
Var embedding(Var table, std::span<const int> ids);
/// Sum of squares of all entries -> [1].
Var sum_squares(Var a);
/// Sum of all entries -> [1].
Var sum(Var a);

/// Boolean matrix; allowed(i, j) == false forbids query i from attending key j.
struct AttnMask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> allowed;

    bool ok(int i, int j) const noexcept { return allowed[static_cast<std::size_t>(i) * cols + j] != 0; }

    static AttnMask all(int rows, int cols);
    /// Lower-triangular: query i sees keys 0..i.
    static AttnMask causal(int n);
    /// Forbids every key column whose flag in `key_is_pad` is set.
    AttnMask& mask_keys(std::span<const std::uint8_t> key_is_pad);
};

/// Multi-head scaled dot-product attention. q[m,d], k[n,d], v[n,dv]; d and dv are split into
/// `heads` equal column blocks and each head computes softmax(q_h k_h^T / sqrt(d/heads)) v_h,
/// with forbidden entries at -inf (exactly zero weight). Throws MaskError if a query row has
/// no allowed key. `weights_out`, when given, receives the [heads*m, n] weight matrices.
Var attention(Var q, Var k, Var v, const AttnMask* mask, int heads = 1, Tensor* weights_out = nullptr);

/// Mean over included positions of -log softmax(logits[t])[target[t]].
/// `include[t] == 0` drops position t (padding). Throws RangeError on out-of-vocabulary targets.
Var cross_entropy(Var logits, std::span<const int> targets, std::span<const std::uint8_t> include);

/// Sum over positions of log p_t(target[t]) where p_t = softmax(logits[t] / temperature)
/// restricted to the tokens allowed by masks[t]. The target must be allowed.
Var masked_log_prob(Var logits, std::span<const int> targets, std::span<const std::vector<std::uint8_t>> masks,
                    double temperature = 1.0);

}  // namespace uigen::nk
