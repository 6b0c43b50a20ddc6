#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "marketdyn/distribution.hpp"
#include "marketdyn/errors.hpp"

namespace marketdyn {

// Full parameterization of the market map: proportion of speculators alpha,
// speculative trend J, price feedback lambda, fundamental value V, and the
// evaluation distribution.
struct MarketParams {
    double alpha;
    double J;
    double lambda;
    EvaluationDistribution dist;
    double V;

    MarketParams(double alpha_, double J_, double lambda_, EvaluationDistribution dist_,
                 double V_ = 0.0)
        : alpha(alpha_), J(J_), lambda(lambda_), dist(std::move(dist_)), V(V_) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw invalid_parameter("alpha must lie in (0,1)");
        if (!(J > 0.0) || !std::isfinite(J))
            throw invalid_parameter("J must be a positive real");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw invalid_parameter("lambda must be a positive real");
        if (!std::isfinite(V)) throw invalid_parameter("V must be finite");
    }
};

// One point of the (price, excess demand) plane. After one map application
// |d| <= 1 always holds: the demand is a convex combination of values in
// [-1, 1].
struct State {
    double p;
    double d;
};

struct Orbit {
    std::vector<State> states;
    MarketParams params;
    bool truncated = false;  // hit a non-finite value and stopped early

    std::size_t size() const { return states.size(); }
};

}  // namespace marketdyn
