#pragma once

#include <functional>

#include "uigen/nk/tape.hpp"

namespace uigen::nk {

/// Scalar function of one tensor, evaluated on the given tape.
using ScalarFn = std::function<Var(Tape&, Var)>;

/// Largest relative disagreement between the tape gradient of f at x and central differences
/// (f(x + eps e_i) - f(x - eps e_i)) / 2 eps, measured as |a - n| / max(1, |a|, |n|).
double grad_check(const ScalarFn& f, const Tensor& x, double eps = 1e-5);

}  // namespace uigen::nk
