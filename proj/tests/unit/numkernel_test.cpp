#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>

#include "uigen/core/error.hpp"
#include "uigen/core/rng.hpp"
#include "uigen/nk/checkpoint.hpp"
#include "uigen/nk/grad_check.hpp"
#include "uigen/nk/kernels.hpp"
#include "uigen/nk/ops.hpp"

using namespace uigen;
using namespace uigen::nk;

namespace {

Tensor random_tensor(Rng& rng, std::vector<int> shape, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = scale * rng.normal();
    return t;
}

Tensor eval(const std::function<Var(Tape&)>& f) {
    Tape tape(false);
    return f(tape).value();
}

// Smooth scalar readout with a non-degenerate gradient: sum((y + c)^2).
Var readout(Tape& tape, Var y, const Tensor& c) { return sum_squares(add(y, tape.constant(c))); }

constexpr int kTrials = 100;
constexpr double kOpTol = 1e-5;

}  // namespace

TEST(Matmul, Examples) {
    const Tensor id = Tensor::matrix({{1, 0}, {0, 1}});
    const Tensor m = Tensor::matrix({{5, 6}, {7, 8}});
    EXPECT_EQ(eval([&](Tape& t) { return matmul(t.constant(id), t.constant(m)); }), m);
    EXPECT_EQ(eval([&](Tape& t) {
                  return matmul(t.constant(Tensor::matrix({{1, 2, 3}})), t.constant(Tensor::matrix({{1}, {1}, {1}})));
              }),
              Tensor::matrix({{6}}));
    EXPECT_EQ(eval([&](Tape& t) {
                  return matmul(t.constant(Tensor::matrix({{1, 2}, {3, 4}})), t.constant(m));
              }),
              Tensor::matrix({{19, 22}, {43, 50}}));
    Tape tape(false);
    EXPECT_THROW(matmul(tape.constant(Tensor({2, 3})), tape.constant(Tensor({2, 3}))), ShapeError);
}

TEST(Softmax, Examples) {
    const Tensor a = eval([](Tape& t) { return softmax_rows(t.constant(Tensor::matrix({{0, 0}}))); });
    EXPECT_EQ(a, Tensor::matrix({{0.5, 0.5}}));
    for (double c : {-1000.0, 0.0, 3.5, 700.0}) {
        const Tensor b = eval([&](Tape& t) { return softmax_rows(t.constant(Tensor::matrix({{c, c, c}}))); });
        for (double v : b.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
    }
    const Tensor s = eval([](Tape& t) { return softmax_rows(t.constant(Tensor::matrix({{1, 2, 3}}))); });
    EXPECT_NEAR(s[0], 0.090031, 1e-6);
    EXPECT_NEAR(s[1], 0.244728, 1e-6);
    EXPECT_NEAR(s[2], 0.665241, 1e-6);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
    Rng rng(1);
    for (int trial = 0; trial < kTrials; ++trial) {
        const Tensor x = random_tensor(rng, {4, 7}, 5.0);
        Tensor shifted = x;
        const double c = 20.0 * rng.normal();
        for (auto& v : shifted.values()) v += c;
        const Tensor a = eval([&](Tape& t) { return softmax_rows(t.constant(x)); });
        const Tensor b = eval([&](Tape& t) { return softmax_rows(t.constant(shifted)); });
        for (int r = 0; r < 4; ++r) {
            double sum = 0.0;
            for (int j = 0; j < 7; ++j) {
                sum += a.at(r, j);
                EXPECT_GE(a.at(r, j), 0.0);
                EXPECT_NEAR(a.at(r, j), b.at(r, j), 1e-12);
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST(LayerNorm, Examples) {
    auto ln = [](const Tensor& x, const Tensor& g, const Tensor& b) {
        return eval([&](Tape& t) { return layer_norm(t.constant(x), t.constant(g), t.constant(b)); });
    };
    EXPECT_EQ(ln(Tensor::matrix({{1, 1, 1}}), Tensor::vector({1, 1, 1}), Tensor::vector({0, 0, 0})),
              Tensor::matrix({{0, 0, 0}}));
    const Tensor y = ln(Tensor::matrix({{-1, 1}}), Tensor::vector({1, 1}), Tensor::vector({0, 0}));
    EXPECT_NEAR(y[0], -1.0, 1e-4);
    EXPECT_NEAR(y[1], 1.0, 1e-4);
    EXPECT_NEAR(y[1], 1.0 / std::sqrt(1.0 + 1e-5), 1e-15);
    const Tensor z = ln(Tensor::matrix({{3, -2, 7}, {0, 1, 5}}), Tensor::vector({0, 0, 0}), Tensor::vector({0.5, -1, 2}));
    EXPECT_EQ(z, Tensor::matrix({{0.5, -1, 2}, {0.5, -1, 2}}));
}

TEST(GradCheck, QuadraticIsExact) {
    const Tensor x = Tensor::vector({1, 2, 3});
    Tape tape;
    Var v = tape.variable(x);
    tape.backward(sum_squares(v));
    EXPECT_EQ(tape.grad(v), Tensor::vector({2, 4, 6}));
    EXPECT_LT(grad_check([](Tape&, Var v) { return sum_squares(v); }, x), 1e-8);
    EXPECT_THROW(grad_check([](Tape&, Var v) { return sum(v); }, x, 1e-2), RangeError);
    EXPECT_THROW(grad_check([](Tape&, Var v) { return sum(v); }, x, 1e-9), RangeError);
}

TEST(GradCheck, TwoLayerCrossEntropy) {
    Rng rng(3);
    const Tensor w1 = random_tensor(rng, {6, 8}, 0.5), w2 = random_tensor(rng, {8, 5}, 0.5);
    const int target[1] = {2};
    const std::uint8_t inc[1] = {1};
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor x = random_tensor(rng, {1, 6});
        const double err = grad_check(
            [&](Tape& t, Var xv) {
                Var h = gelu(matmul(xv, t.constant(w1)));
                return cross_entropy(matmul(h, t.constant(w2)), target, inc);
            },
            x);
        EXPECT_LT(err, 1e-5);
    }
}

// Every op, differentiated with respect to each of its inputs, against central differences.
TEST(OpGradients, MatchFiniteDifferences) {
    Rng rng(7);
    double worst = 0.0;
    for (int trial = 0; trial < kTrials; ++trial) {
        const int m = 1 + static_cast<int>(rng.below(4)), k = 1 + static_cast<int>(rng.below(4)),
                  n = 1 + static_cast<int>(rng.below(4));
        const Tensor A = random_tensor(rng, {m, k}), B = random_tensor(rng, {k, n});
        const Tensor C = random_tensor(rng, {m, n}), row = random_tensor(rng, {n});
        const Tensor Cmk = random_tensor(rng, {m, k});
        const Tensor gain = random_tensor(rng, {k}), bias = random_tensor(rng, {k});
        std::vector<std::pair<const char*, double>> errs = {
            {"matmul/a", grad_check([&](Tape& t, Var x) { return readout(t, matmul(x, t.constant(B)), C); }, A)},
            {"matmul/b", grad_check([&](Tape& t, Var x) { return readout(t, matmul(t.constant(A), x), C); }, B)},
            {"add", grad_check([&](Tape& t, Var x) { return readout(t, add(x, t.constant(C)), C); }, C)},
            {"add_row/a", grad_check([&](Tape& t, Var x) { return readout(t, add_row(x, t.constant(row)), C); }, C)},
            {"add_row/bias", grad_check([&](Tape& t, Var x) { return readout(t, add_row(t.constant(C), x), C); }, row)},
            {"scale", grad_check([&](Tape& t, Var x) { return readout(t, scale(x, -1.7), C); }, C)},
            {"gelu", grad_check([&](Tape& t, Var x) { return readout(t, gelu(x), C); }, C)},
            {"softmax", grad_check([&](Tape& t, Var x) { return readout(t, softmax_rows(x), C); }, C)},
            {"layer_norm/x",
             grad_check([&](Tape& t, Var x) { return readout(t, layer_norm(x, t.constant(gain), t.constant(bias)), Cmk); },
                        A)},
            {"layer_norm/gain",
             grad_check([&](Tape& t, Var x) { return readout(t, layer_norm(t.constant(A), x, t.constant(bias)), Cmk); },
                        gain)},
            {"layer_norm/bias",
             grad_check([&](Tape& t, Var x) { return readout(t, layer_norm(t.constant(A), t.constant(gain), x), Cmk); },
                        bias)},
            {"sum", grad_check([&](Tape&, Var x) { return sum(x); }, C)},
        };
        const std::vector<int> ids = {static_cast<int>(rng.below(static_cast<std::uint64_t>(m))), 0,
                                      static_cast<int>(rng.below(static_cast<std::uint64_t>(m)))};
        const Tensor E = random_tensor(rng, {3, k});
        errs.emplace_back("embedding",
                          grad_check([&](Tape& t, Var x) { return readout(t, embedding(x, ids), E); }, A));
        std::vector<int> targets(static_cast<std::size_t>(m));
        std::vector<std::uint8_t> include(static_cast<std::size_t>(m), 1);
        for (auto& tg : targets) tg = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        include[0] = static_cast<std::uint8_t>(m == 1 ? 1 : rng.below(2));
        errs.emplace_back("cross_entropy",
                          grad_check([&](Tape&, Var x) { return cross_entropy(x, targets, include); }, C));
        std::vector<std::vector<std::uint8_t>> masks(static_cast<std::size_t>(m),
                                                     std::vector<std::uint8_t>(static_cast<std::size_t>(n), 1));
        for (std::size_t r = 0; r < masks.size(); ++r)
            for (int j = 0; j < n; ++j)
                if (j != targets[r] && rng.bernoulli(0.3)) masks[r][static_cast<std::size_t>(j)] = 0;
        errs.emplace_back("masked_log_prob",
                          grad_check([&](Tape&, Var x) { return masked_log_prob(x, targets, masks, 0.7); }, C));
        for (const auto& [name, e] : errs) {
            EXPECT_LT(e, kOpTol) << name << " trial " << trial;
            worst = std::max(worst, e);
        }
    }
    RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(OpGradients, AttentionMatchesFiniteDifferences) {
    Rng rng(9);
    for (int trial = 0; trial < kTrials; ++trial) {
        const int heads = 1 + static_cast<int>(rng.below(2));
        const int dk = heads * (1 + static_cast<int>(rng.below(3)));
        const int m = 1 + static_cast<int>(rng.below(4)), n = 1 + static_cast<int>(rng.below(4));
        const Tensor q = random_tensor(rng, {m, dk}), k = random_tensor(rng, {n, dk}), v = random_tensor(rng, {n, dk});
        const Tensor c = random_tensor(rng, {m, dk});
        AttnMask mask = AttnMask::all(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 1; j < n; ++j)
                if (rng.bernoulli(0.3)) mask.allowed[static_cast<std::size_t>(i * n + j)] = 0;
        auto f = [&](int which) {
            return [&, which](Tape& t, Var x) {
                Var Q = which == 0 ? x : t.constant(q), K = which == 1 ? x : t.constant(k),
                    V = which == 2 ? x : t.constant(v);
                return readout(t, attention(Q, K, V, &mask, heads), c);
            };
        };
        EXPECT_LT(grad_check(f(0), q), kOpTol);
        EXPECT_LT(grad_check(f(1), k), kOpTol);
        EXPECT_LT(grad_check(f(2), v), kOpTol);
    }
}

TEST(Tape, SharedInputAccumulates) {
    Rng rng(11);
    const Tensor x = random_tensor(rng, {3, 3});
    const Tensor w = random_tensor(rng, {3, 3});
    // y = x*w + x*w with the same leaf twice versus 2 * (x*w) computed once.
    Tape t1;
    Var a = t1.variable(x);
    Var wv = t1.constant(w);
    t1.backward(sum_squares(add(matmul(a, wv), matmul(a, wv))));
    Tape t2;
    Var b = t2.variable(x);
    t2.backward(sum_squares(scale(matmul(b, t2.constant(w)), 2.0)));
    const Tensor& g1 = t1.grad(a);
    const Tensor& g2 = t2.grad(b);
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1[i], g2[i], 1e-12);
}

TEST(Tape, DeterministicOutputs) {
    Rng rng(12);
    const Tensor x = random_tensor(rng, {5, 8}), w = random_tensor(rng, {8, 8});
    auto run = [&] {
        Tape t;
        Var v = t.variable(x);
        Var y = softmax_rows(gelu(matmul(v, t.constant(w))));
        t.backward(sum_squares(y));
        return std::make_pair(y.value(), t.grad(v));
    };
    EXPECT_EQ(run(), run());
}

TEST(Tape, MixingTapesIsRejected) {
    Tape a, b;
    Var x = a.variable(Tensor::matrix({{1}}));
    Var y = b.variable(Tensor::matrix({{1}}));
    EXPECT_ANY_THROW(add(x, y));
}

TEST(Kernels, ParallelMatchesSerialBitForBit) {
    Rng rng(13);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + static_cast<int>(rng.below(97)), k = 1 + static_cast<int>(rng.below(67)),
                  n = 1 + static_cast<int>(rng.below(131));
        const Tensor a = random_tensor(rng, {m, k}), b = random_tensor(rng, {k, n});
        const Tensor bt = random_tensor(rng, {n, k}), at = random_tensor(rng, {k, m});
        const Tensor init = random_tensor(rng, {m, n});
        for (bool acc : {false, true}) {
            Tensor s = init, p = init;
            kernels::serial::matmul(a.data(), b.data(), s.data(), m, k, n, acc);
            kernels::parallel::matmul(a.data(), b.data(), p.data(), m, k, n, acc);
            EXPECT_EQ(s, p);
            s = init;
            p = init;
            kernels::serial::matmul_nt(a.data(), bt.data(), s.data(), m, k, n, acc);
            kernels::parallel::matmul_nt(a.data(), bt.data(), p.data(), m, k, n, acc);
            EXPECT_EQ(s, p);
            s = init;
            p = init;
            kernels::serial::matmul_tn(at.data(), b.data(), s.data(), m, k, n, acc);
            kernels::parallel::matmul_tn(at.data(), b.data(), p.data(), m, k, n, acc);
            EXPECT_EQ(s, p);
        }
    }
    omp_set_num_threads(saved);
}

TEST(Kernels, VariantsAgreeWithNaiveProduct) {
    Rng rng(14);
    const int m = 7, k = 5, n = 6;
    const Tensor a = random_tensor(rng, {m, k}), b = random_tensor(rng, {k, n});
    Tensor bt({n, k}), at({k, m});
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) bt.at(j, i) = b.at(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) at.at(j, i) = a.at(i, j);
    Tensor c1({m, n}), c2({m, n}), c3({m, n});
    kernels::matmul(a.data(), b.data(), c1.data(), m, k, n, false);
    kernels::matmul_nt(a.data(), bt.data(), c2.data(), m, k, n, false);
    kernels::matmul_tn(at.data(), b.data(), c3.data(), m, k, n, false);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            long double ref = 0;
            for (int p = 0; p < k; ++p) ref += static_cast<long double>(a.at(i, p)) * b.at(p, j);
            EXPECT_NEAR(c1.at(i, j), static_cast<double>(ref), 1e-12);
            EXPECT_NEAR(c2.at(i, j), static_cast<double>(ref), 1e-12);
            EXPECT_NEAR(c3.at(i, j), static_cast<double>(ref), 1e-12);
        }
    }
}

TEST(Tensor, ShapeContract) {
    EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
    EXPECT_THROW(Tensor(std::vector<int>{}), ShapeError);
    EXPECT_THROW(Tensor({1, 2, 3, 4}), ShapeError);
    EXPECT_THROW(Tensor({0, 2}), ShapeError);
    Tensor t({2, 3, 4});
    EXPECT_EQ(t.rows(), 6);
    EXPECT_EQ(t.cols(), 4);
    EXPECT_TRUE(t.all_finite());
    t[3] = std::nan("");
    EXPECT_FALSE(t.all_finite());
}

TEST(Checkpoint, RoundTripsBitExactly) {
    Rng rng(15);
    ParamMap p;
    p.emplace("a", random_tensor(rng, {3, 4}, 1e-3));
    p.emplace("b", random_tensor(rng, {5}, 1e6));
    Tensor odd({2});
    odd[0] = 0.1;
    odd[1] = 1.0 / 3.0;
    p.emplace("c", odd);
    const ParamMap back = load_params(save_params(p));
    EXPECT_EQ(back, p);
    EXPECT_THROW(load_params("{\"format\":\"other\"}"), ParseError);
    EXPECT_THROW(load_params("not json"), ParseError);
}
