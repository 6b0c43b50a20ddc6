#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "marketdyn/errors.hpp"
#include "marketdyn/parallel.hpp"
#include "marketdyn/params.hpp"

namespace marketdyn {

// The two scalars that fully determine local stability of the equilibrium:
// u = 2*alpha*J*pdf(0), w = 2*lambda*pdf(0).
struct UWCoordinates {
    double u;
    double w;
};

inline UWCoordinates uw_of(const MarketParams& mp) {
    const double p0 = mp.dist.pdf(0.0);
    return {2.0 * mp.alpha * mp.J * p0, 2.0 * mp.lambda * p0};
}

// Linearization data at the equilibrium. The characteristic polynomial is
// mu^2 - (1 + u - w) mu + u, so mu1*mu2 = u and mu1 + mu2 = 1 + u - w.
struct EigenData {
    double delta;  // (1 + u - w)^2 - 4u
    std::complex<double> mu1;
    std::complex<double> mu2;
    double spectral_radius;
};

inline EigenData eigen_from_uw(UWCoordinates uw) {
    const double tr = 1.0 + uw.u - uw.w;
    const double delta = tr * tr - 4.0 * uw.u;
    EigenData e;
    e.delta = delta;
    if (delta >= 0.0) {
        const double root = std::sqrt(delta);
        e.mu1 = std::complex<double>(0.5 * (tr + root), 0.0);
        e.mu2 = std::complex<double>(0.5 * (tr - root), 0.0);
    } else {
        const double im = 0.5 * std::sqrt(-delta);
        e.mu1 = std::complex<double>(0.5 * tr, im);
        e.mu2 = std::complex<double>(0.5 * tr, -im);
    }
    e.spectral_radius = std::max(std::abs(e.mu1), std::abs(e.mu2));
    return e;
}

inline EigenData eigen_at_origin(const MarketParams& mp) { return eigen_from_uw(uw_of(mp)); }

// Regions of the (u,w) phase diagram. R1a, R2, R3 are the stable ones.
enum class Region { R1a, R1b, R2, R3, R4, R5, R6, Boundary };

enum class StabilityVerdict { LocallyAsymptoticallyStable, Unstable, Indeterminate };

struct StabilityReport {
    UWCoordinates uw;
    EigenData eigen;
    Region region;
    StabilityVerdict verdict;
};

inline StabilityVerdict verdict_of(Region r) {
    switch (r) {
        case Region::R1a:
        case Region::R2:
        case Region::R3:
            return StabilityVerdict::LocallyAsymptoticallyStable;
        case Region::Boundary:
            return StabilityVerdict::Indeterminate;
        default:
            return StabilityVerdict::Unstable;
    }
}

// Closed-form region classification. Points within boundary_margin of any
// defining curve (u = 1, the discriminant parabola w = (1 +/- sqrt(u))^2,
// w = 1 + u, w = 2 + 2u) are reported as Boundary: the classification
// theorem only covers strict inequalities, so no verdict is guessed there.
// With a zero margin, ties at w = 2 + 2u with u > 1 land in R5 (that case
// carries the non-strict upper bound).
inline StabilityReport classify(UWCoordinates uw, double boundary_margin = 1e-9) {
    if (!(uw.u > 0.0) || !(uw.w > 0.0))
        throw invalid_parameter("classify: u and w must be positive");
    const EigenData eigen = eigen_from_uw(uw);
    const double u = uw.u;
    const double w = uw.w;
    const double su = std::sqrt(u);

    Region region;
    // Strict comparisons: a zero margin disables boundary detection
    // entirely, which lets exact ties fall through to the region
    // predicates.
    const bool near_boundary =
        std::abs(u - 1.0) < boundary_margin ||
        std::abs(w - (2.0 + 2.0 * u)) < boundary_margin ||
        std::abs(w - (1.0 - su) * (1.0 - su)) < boundary_margin ||
        std::abs(w - (1.0 + su) * (1.0 + su)) < boundary_margin ||
        std::abs(eigen.delta) < boundary_margin ||
        // w = 1 + u separates region predicates only where the
        // eigenvalues are real; inside the complex zone it is not a
        // boundary of the diagram.
        (eigen.delta > 0.0 && std::abs(w - (1.0 + u)) < boundary_margin);
    if (near_boundary) {
        region = Region::Boundary;
    } else if (eigen.delta < 0.0) {
        region = (u < 1.0) ? Region::R1a : Region::R1b;
    } else if (w > 2.0 + 2.0 * u) {
        region = Region::R6;
    } else if (u < 1.0) {
        if (w < 1.0 + u)
            region = Region::R2;
        else if (w < 2.0 + 2.0 * u)
            region = Region::R3;
        else
            region = Region::Boundary;  // exact tie at w = 2 + 2u, u < 1
    } else {
        // u > 1, delta > 0: w sits either below u - 1 or above 1 + u (the
        // strip in between has delta < 0); ties at w = 2 + 2u belong to R5.
        region = (w < u - 1.0) ? Region::R4 : Region::R5;
    }
    return StabilityReport{uw, eigen, region, verdict_of(region)};
}

inline StabilityReport classify(const MarketParams& mp, double boundary_margin = 1e-9) {
    return classify(uw_of(mp), boundary_margin);
}

struct PhaseDiagram {
    std::vector<double> u_values;
    std::vector<double> w_values;
    std::vector<StabilityReport> cells;  // row-major: cells[iu * nw + iw]

    const StabilityReport& at(std::size_t iu, std::size_t iw) const {
        return cells[iu * w_values.size() + iw];
    }
};

inline PhaseDiagram phase_diagram(double u_min, double u_max, std::size_t nu, double w_min,
                                  double w_max, std::size_t nw,
                                  double boundary_margin = 1e-9) {
    if (!(u_min > 0.0 && w_min > 0.0) || u_max < u_min || w_max < w_min || nu < 1 || nw < 1)
        throw invalid_parameter("phase_diagram: ranges must be positive and nonempty");
    PhaseDiagram pd;
    pd.u_values.resize(nu);
    pd.w_values.resize(nw);
    for (std::size_t i = 0; i < nu; ++i)
        pd.u_values[i] =
            (nu == 1) ? u_min : u_min + (u_max - u_min) * static_cast<double>(i) /
                                           static_cast<double>(nu - 1);
    for (std::size_t j = 0; j < nw; ++j)
        pd.w_values[j] =
            (nw == 1) ? w_min : w_min + (w_max - w_min) * static_cast<double>(j) /
                                           static_cast<double>(nw - 1);
    // cells are independent: sweep in parallel, each task filling its own slot
    pd.cells.resize(nu * nw);
    parallel_for(nu * nw, [&](std::size_t idx) {
        const std::size_t i = idx / nw;
        const std::size_t j = idx % nw;
        pd.cells[idx] =
            classify(UWCoordinates{pd.u_values[i], pd.w_values[j]}, boundary_margin);
    });
    return pd;
}

inline std::string to_string(Region r) {
    switch (r) {
        case Region::R1a: return "R1a";
        case Region::R1b: return "R1b";
        case Region::R2: return "R2";
        case Region::R3: return "R3";
        case Region::R4: return "R4";
        case Region::R5: return "R5";
        case Region::R6: return "R6";
        case Region::Boundary: return "Boundary";
    }
    return "?";
}

inline std::string to_string(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::LocallyAsymptoticallyStable: return "stable";
        case StabilityVerdict::Unstable: return "unstable";
        case StabilityVerdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

}  // namespace marketdyn
