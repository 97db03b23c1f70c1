#include "uigen/nk/ops.hpp"

#include <cmath>
#include <limits>

#include "uigen/core/error.hpp"
#include "uigen/nk/kernels.hpp"

namespace uigen::nk {

namespace {

void require(bool cond, const char* op, const Tensor& a, const Tensor& b) {
    if (!cond) throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

void require_matrix(const Tensor& t, const char* op) {
    if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + t.shape_str());
}

}  // namespace

Var matmul(Var a, Var b) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    require_matrix(A, "matmul");
    require_matrix(B, "matmul");
    require(A.dim(1) == B.dim(0), "matmul", A, B);
    const int m = A.dim(0), k = A.dim(1), n = B.dim(1);
    Tensor C({m, n});
    kernels::matmul(A.data(), B.data(), C.data(), m, k, n, false);
    return a.tape->record(std::move(C), {a, b}, [a, b, m, k, n](Tape& t, int self) {
        const Tensor& g = t.grad_buffer(self);
        if (t.requires_grad(a))
            kernels::matmul_nt(g.data(), t.value(b).data(), t.grad_buffer(a.id).data(), m, n, k, true);
        if (t.requires_grad(b))
            kernels::matmul_tn(t.value(a).data(), g.data(), t.grad_buffer(b.id).data(), k, m, n, true);
    });
}

Var add(Var a, Var b) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    require(A.same_shape(B), "add", A, B);
    Tensor C = A;
    for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
    return a.tape->record(std::move(C), {a, b}, [a, b](Tape& t, int self) {
        const Tensor& g = t.grad_buffer(self);
        for (Var p : {a, b}) {
            if (!t.requires_grad(p)) continue;
            Tensor& gp = t.grad_buffer(p.id);
            for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
        }
    });
}

Var add_row(Var a, Var bias) {
    const Tensor& A = a.value();
    const Tensor& B = bias.value();
    require(B.rank() == 1 && B.dim(0) == A.cols(), "add_row", A, B);
    Tensor C = A;
    const int rows = A.rows(), cols = A.cols();
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) C.at(r, c) += B[static_cast<std::size_t>(c)];
    return a.tape->record(std::move(C), {a, bias}, [a, bias, rows, cols](Tape& t, int self) {
        const Tensor& g = t.grad_buffer(self);
        if (t.requires_grad(a)) {
            Tensor& ga = t.grad_buffer(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.requires_grad(bias)) {
            Tensor& gb = t.grad_buffer(bias.id);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) gb[static_cast<std::size_t>(c)] += g.at(r, c);
        }
    });
}

Var scale(Var a, double s) {
    Tensor C = a.value();
    for (auto& v : C.values()) v *= s;
    return a.tape->record(std::move(C), {a}, [a, s](Tape& t, int self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& ga = t.grad_buffer(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
    });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var gelu(Var a) {
    const Tensor& X = a.value();
    Tensor Y(X.shape());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double x = X[i];
        Y[i] = 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
    }
    return a.tape->record(std::move(Y), {a}, [a](Tape& t, int self) {
        const Tensor& g = t.grad_buffer(self);
        const Tensor& X = t.value(a);
        Tensor& ga = t.grad_buffer(a.id);
        for (std::size_t i = 0; i < X.size(); ++i) {
            const double x = X[i];
            const double th = std::tanh(kGeluC * (x + kGeluA * x * x * x));
            const double d = 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
            ga[i] += g[i] * d;
        }
    });
}

Var softmax_rows(Var x) {
    const Tensor& X = x.value();
    Tensor Y(X.shape());
    const int rows = X.rows(), cols = X.cols();
    for (int r = 0; r < rows; ++r) {
        double mx = X.at(r, 0);
        for (int c = 1; c < cols; ++c) mx = std::max(mx, X.at(r, c));
        double s = 0.0;
        for (int c = 0; c < cols; ++c) s += (Y.at(r, c) = std::exp(X.at(r, c) - mx));
        for (int c = 0; c < cols; ++c) Y.at(r, c) /= s;
    }
    return x.tape->record(std::move(Y), {x}, [x, rows, cols](Tape& t, int self) {
        const Tensor& g = t.grad_buffer(self);
        const Tensor& Y = t.value(Var{&t, self});
        Tensor& gx = t.grad_buffer(x.id);
        for (int r = 0; r < rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < cols; ++c) dot += g.at(r, c) * Y.at(r, c);
            for (int c = 0; c < cols; ++c) gx.at(r, c) += Y.at(r, c) * (g.at(r, c) - dot);
        }
    });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
    const Tensor& X = x.value();
    const Tensor& G = gain.value();
    const Tensor& B = bias.value();
    const int rows = X.rows(), d = X.cols();
    require(G.rank() == 1 && G.dim(0) == d && B.same_shape(G), "layer_norm", X, G);
    Tensor Y(X.shape());
    // xhat and 1/std are kept for the backward pass.
    Tensor xhat(X.shape());
    std::vector<double> inv_std(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        double mean = 0.0;
        for (int c = 0; c < d; ++c) mean += X.at(r, c);
        mean /= d;
        double var = 0.0;
        for (int c = 0; c < d; ++c) {
            const double z = X.at(r, c) - mean;
            var += z * z;
        }
        var /= d;
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std[static_cast<std::size_t>(r)] = is;
        for (int c = 0; c < d; ++c) {
            const double xh = (X.at(r, c) - mean) * is;
            xhat.at(r, c) = xh;
            Y.at(r, c) = xh * G[static_cast<std::size_t>(c)] + B[static_cast<std::size_t>(c)];
        }
    }
    return x.tape->record(
        std::move(Y), {x, gain, bias},
        [x, gain, bias, rows, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, int self) {
            const Tensor& g = t.grad_buffer(self);
            const Tensor& G = t.value(gain);
            if (t.requires_grad(gain) || t.requires_grad(bias)) {
                for (int r = 0; r < rows; ++r) {
                    for (int c = 0; c < d; ++c) {
                        if (t.requires_grad(gain)) t.grad_buffer(gain.id)[static_cast<std::size_t>(c)] += g.at(r, c) * xhat.at(r, c);
                        if (t.requires_grad(bias)) t.grad_buffer(bias.id)[static_cast<std::size_t>(c)] += g.at(r, c);
                    }
                }
            }
            if (!t.requires_grad(x)) return;
            Tensor& gx = t.grad_buffer(x.id);
            std::vector<double> dxh(static_cast<std::size_t>(d));
            for (int r = 0; r < rows; ++r) {
                double s1 = 0.0, s2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double v = g.at(r, c) * G[static_cast<std::size_t>(c)];
                    dxh[static_cast<std::size_t>(c)] = v;
                    s1 += v;
                    s2 += v * xhat.at(r, c);
                }
                const double k = inv_std[static_cast<std::size_t>(r)] / d;
                for (int c = 0; c < d; ++c) {
                    gx.at(r, c) += k * (d * dxh[static_cast<std::size_t>(c)] - s1 - xhat.at(r, c) * s2);
                }
            }
        });
}

Var embedding(Var table, std::span<const int> ids) {
    const Tensor& T = table.value();
    require_matrix(T, "embedding");
    const int V = T.dim(0), d = T.dim(1);
    const int n = static_cast<int>(ids.size());
    if (n == 0) throw ShapeError("embedding: empty id list");
    Tensor Y({n, d});
    for (int i = 0; i < n; ++i) {
        const int id = ids[static_cast<std::size_t>(i)];
        if (id < 0 || id >= V) throw RangeError("embedding: id " + std::to_string(id) + " out of range");
        for (int c = 0; c < d; ++c) Y.at(i, c) = T.at(id, c);
    }
    std::vector<int> saved(ids.begin(), ids.end());
    return table.tape->record(std::move(Y), {table}, [table, d, saved = std::move(saved)](Tape& t, int self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& gt = t.grad_buffer(table.id);
        for (std::size_t i = 0; i < saved.size(); ++i)
            for (int c = 0; c < d; ++c) gt.at(saved[i], c) += g.at(static_cast<int>(i), c);
    });
}

Var sum_squares(Var a) {
    double s = 0.0;
    for (double v : a.value().values()) s += v * v;
    return a.tape->record(Tensor({1}, s), {a}, [a](Tape& t, int self) {
        const double g = t.grad_buffer(self)[0];
        const Tensor& X = t.value(a);
        Tensor& ga = t.grad_buffer(a.id);
        for (std::size_t i = 0; i < X.size(); ++i) ga[i] += 2.0 * X[i] * g;
    });
}

Var sum(Var a) {
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    return a.tape->record(Tensor({1}, s), {a}, [a](Tape& t, int self) {
        const double g = t.grad_buffer(self)[0];
        Tensor& ga = t.grad_buffer(a.id);
        for (auto& v : ga.values()) v += g;
    });
}

// ---- attention -----------------------------------------------------------------------------

AttnMask AttnMask::all(int rows, int cols) {
    AttnMask m;
    m.rows = rows;
    m.cols = cols;
    m.allowed.assign(static_cast<std::size_t>(rows) * cols, 1);
    return m;
}

AttnMask AttnMask::causal(int n) {
    AttnMask m = all(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m.allowed[static_cast<std::size_t>(i) * n + j] = 0;
    return m;
}

AttnMask& AttnMask::mask_keys(std::span<const std::uint8_t> key_is_pad) {
    for (int j = 0; j < cols && static_cast<std::size_t>(j) < key_is_pad.size(); ++j) {
        if (!key_is_pad[static_cast<std::size_t>(j)]) continue;
        for (int i = 0; i < rows; ++i) allowed[static_cast<std::size_t>(i) * cols + j] = 0;
    }
    return *this;
}

namespace {

// Copies column block [c0, c0+w) of a [rows, cols] matrix into a contiguous [rows, w] buffer.
void gather_cols(const Tensor& src, int c0, int w, std::vector<double>& dst) {
    const int rows = src.rows();
    dst.resize(static_cast<std::size_t>(rows) * w);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < w; ++c) dst[static_cast<std::size_t>(r) * w + c] = src.at(r, c0 + c);
}

void scatter_add_cols(const std::vector<double>& src, int c0, int w, Tensor& dst) {
    const int rows = dst.rows();
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < w; ++c) dst.at(r, c0 + c) += src[static_cast<std::size_t>(r) * w + c];
}

}  // namespace

Var attention(Var q, Var k, Var v, const AttnMask* mask, int heads, Tensor* weights_out) {
    const Tensor& Q = q.value();
    const Tensor& K = k.value();
    const Tensor& V = v.value();
    require_matrix(Q, "attention");
    require_matrix(K, "attention");
    require_matrix(V, "attention");
    require(Q.dim(1) == K.dim(1), "attention(q,k)", Q, K);
    require(K.dim(0) == V.dim(0), "attention(k,v)", K, V);
    if (heads < 1 || Q.dim(1) % heads != 0 || V.dim(1) % heads != 0) {
        throw ShapeError("attention: feature widths must divide evenly into heads");
    }
    const int m = Q.dim(0), n = K.dim(0), dk = Q.dim(1) / heads, dv = V.dim(1) / heads;
    if (mask != nullptr && (mask->rows != m || mask->cols != n)) {
        throw ShapeError("attention: mask shape does not match scores [" + std::to_string(m) + "," +
                         std::to_string(n) + "]");
    }
    if (mask != nullptr) {
        for (int i = 0; i < m; ++i) {
            bool any = false;
            for (int j = 0; j < n && !any; ++j) any = mask->ok(i, j);
            if (!any) throw MaskError("attention: query row " + std::to_string(i) + " has every key masked");
        }
    }
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
    std::vector<double> P(static_cast<std::size_t>(heads) * m * n);
    Tensor O({m, heads * dv});
    std::vector<double> qh, kh, vh, oh(static_cast<std::size_t>(m) * dv);
    for (int h = 0; h < heads; ++h) {
        gather_cols(Q, h * dk, dk, qh);
        gather_cols(K, h * dk, dk, kh);
        gather_cols(V, h * dv, dv, vh);
        double* S = P.data() + static_cast<std::size_t>(h) * m * n;
        kernels::matmul_nt(qh.data(), kh.data(), S, m, dk, n, false);
        for (int i = 0; i < m; ++i) {
            double* row = S + static_cast<std::size_t>(i) * n;
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                row[j] *= inv_sqrt;
                if (mask == nullptr || mask->ok(i, j)) mx = std::max(mx, row[j]);
            }
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                row[j] = (mask == nullptr || mask->ok(i, j)) ? std::exp(row[j] - mx) : 0.0;
                s += row[j];
            }
            for (int j = 0; j < n; ++j) row[j] /= s;
        }
        kernels::matmul(S, vh.data(), oh.data(), m, n, dv, false);
        for (int i = 0; i < m; ++i)
            for (int c = 0; c < dv; ++c) O.at(i, h * dv + c) = oh[static_cast<std::size_t>(i) * dv + c];
    }
    if (weights_out != nullptr) *weights_out = Tensor({heads * m, n}, P);
    return q.tape->record(std::move(O), {q, k, v}, [q, k, v, m, n, dk, dv, heads, inv_sqrt, P = std::move(P)](Tape& t, int self) {
        const Tensor& G = t.grad_buffer(self);
        const Tensor& Q = t.value(q);
        const Tensor& K = t.value(k);
        const Tensor& V = t.value(v);
        std::vector<double> qh, kh, vh, gh, dP(static_cast<std::size_t>(m) * n), tmp;
        for (int h = 0; h < heads; ++h) {
            const double* Ph = P.data() + static_cast<std::size_t>(h) * m * n;
            gather_cols(G, h * dv, dv, gh);
            if (t.requires_grad(v)) {
                tmp.assign(static_cast<std::size_t>(n) * dv, 0.0);
                kernels::matmul_tn(Ph, gh.data(), tmp.data(), n, m, dv, false);
                scatter_add_cols(tmp, h * dv, dv, t.grad_buffer(v.id));
            }
            if (!t.requires_grad(q) && !t.requires_grad(k)) continue;
            gather_cols(V, h * dv, dv, vh);
            kernels::matmul_nt(gh.data(), vh.data(), dP.data(), m, dv, n, false);
            // dS = P * (dP - rowsum(dP * P)), folded with the 1/sqrt(dk) scale.
            for (int i = 0; i < m; ++i) {
                double* dp = dP.data() + static_cast<std::size_t>(i) * n;
                const double* p = Ph + static_cast<std::size_t>(i) * n;
                double dot = 0.0;
                for (int j = 0; j < n; ++j) dot += dp[j] * p[j];
                for (int j = 0; j < n; ++j) dp[j] = p[j] * (dp[j] - dot) * inv_sqrt;
            }
            if (t.requires_grad(q)) {
                gather_cols(K, h * dk, dk, kh);
                tmp.assign(static_cast<std::size_t>(m) * dk, 0.0);
                kernels::matmul(dP.data(), kh.data(), tmp.data(), m, n, dk, false);
                scatter_add_cols(tmp, h * dk, dk, t.grad_buffer(q.id));
            }
            if (t.requires_grad(k)) {
                gather_cols(Q, h * dk, dk, qh);
                tmp.assign(static_cast<std::size_t>(n) * dk, 0.0);
                kernels::matmul_tn(dP.data(), qh.data(), tmp.data(), n, m, dk, false);
                scatter_add_cols(tmp, h * dk, dk, t.grad_buffer(k.id));
            }
        }
    });
}

// ---- losses --------------------------------------------------------------------------------

Var cross_entropy(Var logits, std::span<const int> targets, std::span<const std::uint8_t> include) {
    const Tensor& L = logits.value();
    require_matrix(L, "cross_entropy");
    const int T = L.dim(0), V = L.dim(1);
    if (static_cast<int>(targets.size()) != T || static_cast<int>(include.size()) != T) {
        throw ShapeError("cross_entropy: targets/include length must equal logits rows");
    }
    int count = 0;
    for (int t = 0; t < T; ++t) {
        if (!include[static_cast<std::size_t>(t)]) continue;
        const int y = targets[static_cast<std::size_t>(t)];
        if (y < 0 || y >= V) throw RangeError("cross_entropy: target " + std::to_string(y) + " outside vocabulary");
        ++count;
    }
    if (count == 0) throw ShapeError("cross_entropy: no non-pad positions");
    // Softmax rows kept for backward.
    std::vector<double> probs(static_cast<std::size_t>(T) * V, 0.0);
    double loss = 0.0;
    for (int t = 0; t < T; ++t) {
        if (!include[static_cast<std::size_t>(t)]) continue;
        const double* row = L.data() + static_cast<std::size_t>(t) * V;
        double mx = row[0];
        for (int j = 1; j < V; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        double* p = probs.data() + static_cast<std::size_t>(t) * V;
        for (int j = 0; j < V; ++j) s += (p[j] = std::exp(row[j] - mx));
        for (int j = 0; j < V; ++j) p[j] /= s;
        loss += -(row[targets[static_cast<std::size_t>(t)]] - mx - std::log(s));
    }
    loss /= count;
    std::vector<int> tg(targets.begin(), targets.end());
    std::vector<std::uint8_t> inc(include.begin(), include.end());
    return logits.tape->record(
        Tensor({1}, loss), {logits},
        [logits, T, V, count, probs = std::move(probs), tg = std::move(tg), inc = std::move(inc)](Tape& t, int self) {
            const double g = t.grad_buffer(self)[0] / count;
            Tensor& gl = t.grad_buffer(logits.id);
            for (int r = 0; r < T; ++r) {
                if (!inc[static_cast<std::size_t>(r)]) continue;
                const double* p = probs.data() + static_cast<std::size_t>(r) * V;
                double* out = gl.data() + static_cast<std::size_t>(r) * V;
                for (int j = 0; j < V; ++j) out[j] += g * p[j];
                out[tg[static_cast<std::size_t>(r)]] -= g;
            }
        });
}

Var masked_log_prob(Var logits, std::span<const int> targets, std::span<const std::vector<std::uint8_t>> masks,
                    double temperature) {
    const Tensor& L = logits.value();
    require_matrix(L, "masked_log_prob");
    const int T = L.dim(0), V = L.dim(1);
    if (static_cast<int>(targets.size()) != T || static_cast<int>(masks.size()) != T) {
        throw ShapeError("masked_log_prob: targets/masks length must equal logits rows");
    }
    if (!(temperature > 0.0)) throw RangeError("masked_log_prob: temperature must be positive");
    const double inv_t = 1.0 / temperature;
    std::vector<double> probs(static_cast<std::size_t>(T) * V, 0.0);
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
        const auto& mask = masks[static_cast<std::size_t>(t)];
        const int y = targets[static_cast<std::size_t>(t)];
        if (static_cast<int>(mask.size()) != V) throw ShapeError("masked_log_prob: mask width must equal vocabulary");
        if (y < 0 || y >= V || !mask[static_cast<std::size_t>(y)]) {
            throw RangeError("masked_log_prob: target at position " + std::to_string(t) + " is not allowed");
        }
        const double* row = L.data() + static_cast<std::size_t>(t) * V;
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < V; ++j)
            if (mask[static_cast<std::size_t>(j)]) mx = std::max(mx, row[j] * inv_t);
        double s = 0.0;
        double* p = probs.data() + static_cast<std::size_t>(t) * V;
        for (int j = 0; j < V; ++j) {
            if (mask[static_cast<std::size_t>(j)]) s += (p[j] = std::exp(row[j] * inv_t - mx));
        }
        for (int j = 0; j < V; ++j) p[j] /= s;
        total += row[y] * inv_t - mx - std::log(s);
    }
    std::vector<int> tg(targets.begin(), targets.end());
    return logits.tape->record(
        Tensor({1}, total), {logits},
        [logits, T, V, inv_t, probs = std::move(probs), tg = std::move(tg)](Tape& t, int self) {
            const double g = t.grad_buffer(self)[0] * inv_t;
            Tensor& gl = t.grad_buffer(logits.id);
            for (int r = 0; r < T; ++r) {
                const double* p = probs.data() + static_cast<std::size_t>(r) * V;
                double* out = gl.data() + static_cast<std::size_t>(r) * V;
                for (int j = 0; j < V; ++j) out[j] -= g * p[j];
                out[tg[static_cast<std::size_t>(r)]] += g;
            }
        });
}

}  // namespace uigen::nk
