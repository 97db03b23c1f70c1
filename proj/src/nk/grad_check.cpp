#include "uigen/nk/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "uigen/core/error.hpp"

namespace uigen::nk {

double grad_check(const ScalarFn& f, const Tensor& x, double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw RangeError("grad_check: eps must lie in [1e-7, 1e-3]");
    Tensor analytic;
    {
        Tape tape;
        Var xv = tape.variable(x);
        Var out = f(tape, xv);
        tape.backward(out);
        analytic = tape.grad(xv).empty() ? Tensor(x.shape(), 0.0) : tape.grad(xv);
    }
    auto eval = [&](const Tensor& at) {
        Tape tape(false);
        return f(tape, tape.constant(at)).value()[0];
    };
    double worst = 0.0;
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + eps;
        const double up = eval(probe);
        probe[i] = x[i] - eps;
        const double down = eval(probe);
        probe[i] = x[i];
        const double numeric = (up - down) / (2.0 * eps);
        const double a = analytic[i];
        const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace uigen::nk
