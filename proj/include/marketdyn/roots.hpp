#pragma once

#include <cmath>
#include <utility>

#include "marketdyn/errors.hpp"

namespace marketdyn::detail {

// Bisection on a bracket with f(lo) and f(hi) of opposite (non-strict) sign.
// Runs until the bracket width drops below atol + rtol*|mid| or max_iter.
template <class F>
double bisect(F&& f, double lo, double hi, double flo,
              double atol = 0.0, double rtol = 1e-15, int max_iter = 200) {
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < max_iter; ++i) {
        mid = 0.5 * (lo + hi);
        if (hi - lo <= atol + rtol * std::abs(mid)) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return mid;
}

// Grows |x| from |start| by doubling until pred(x) holds; keeps the sign of
// start. Throws if the predicate never becomes true.
template <class P>
double expand_until(P&& pred, double start, const char* what, int max_doublings = 200) {
    double x = start;
    for (int i = 0; i < max_doublings; ++i) {
        if (pred(x)) return x;
        x *= 2.0;
    }
    throw numeric_error(what);
}

}  // namespace marketdyn::detail
