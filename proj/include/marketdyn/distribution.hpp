#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "marketdyn/errors.hpp"
#include "marketdyn/roots.hpp"

namespace marketdyn {

// Evaluation distribution Phi together with its first three derivatives.
// Instances are immutable after construction and therefore safe to share
// across threads.
//
// Required shape (checked on a fixed grid for custom distributions):
//   - cdf(0) = 1/2,
//   - the density has its maximum at 0,
//   - the density is strictly increasing left of 0 and strictly decreasing
//     right of 0,
//   - the cdf is nondecreasing with values in [0,1].
class EvaluationDistribution {
public:
    enum class Kind { NormalZeroMean, Custom };
    enum class DerivativeSource { Analytic, Synthesized };

    struct CustomEvaluators {
        std::function<double(double)> cdf;   // Phi
        std::function<double(double)> pdf;   // Phi'
        std::function<double(double)> pdf1;  // Phi''
        std::function<double(double)> pdf2;  // Phi'''
    };

    // Zero-mean Normal family; the workhorse for everything downstream.
    static EvaluationDistribution normal_zero_mean(double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw invalid_parameter("normal_zero_mean: sigma must be a positive real");
        EvaluationDistribution d;
        d.kind_ = Kind::NormalZeroMean;
        d.sigma_ = sigma;
        d.scale_ = sigma;
        d.source_ = DerivativeSource::Analytic;
        return d;
    }

    // Custom distribution with all four evaluators supplied analytically.
    // `scale` is the caller's width hint; the validation grid spans
    // [-5*scale, 5*scale].
    static EvaluationDistribution custom(CustomEvaluators ev, double scale = 1.0) {
        if (!ev.cdf || !ev.pdf || !ev.pdf1 || !ev.pdf2)
            throw invalid_parameter("custom: all four evaluators must be supplied");
        EvaluationDistribution d;
        d.kind_ = Kind::Custom;
        d.scale_ = check_scale(scale);
        d.source_ = DerivativeSource::Analytic;
        d.ev_ = std::move(ev);
        d.validate_shape();
        return d;
    }

    // Custom distribution from a cdf alone; the derivatives are synthesized
    // by central differences. The step grows with the derivative order to
    // keep the difference quotients conditioned.
    static EvaluationDistribution custom_from_cdf(std::function<double(double)> cdf,
                                                  double scale = 1.0) {
        if (!cdf) throw invalid_parameter("custom_from_cdf: cdf evaluator must be supplied");
        EvaluationDistribution d;
        d.kind_ = Kind::Custom;
        d.scale_ = check_scale(scale);
        d.source_ = DerivativeSource::Synthesized;
        const double h1 = 1e-6 * d.scale_;
        const double h2 = 1e-4 * d.scale_;
        const double h3 = 1e-3 * d.scale_;
        auto F = std::move(cdf);
        d.ev_.cdf = F;
        d.ev_.pdf = [F, h1](double x) { return (F(x + h1) - F(x - h1)) / (2.0 * h1); };
        d.ev_.pdf1 = [F, h2](double x) {
            return (F(x + h2) - 2.0 * F(x) + F(x - h2)) / (h2 * h2);
        };
        d.ev_.pdf2 = [F, h3](double x) {
            auto third = [&](double h) {
                return (F(x + 2.0 * h) - 2.0 * F(x + h) + 2.0 * F(x - h) - F(x - 2.0 * h)) /
                       (2.0 * h * h * h);
            };
            // one Richardson step: kills the O(h^2) truncation term
            return (4.0 * third(h3 / 2.0) - third(h3)) / 3.0;
        };
        d.validate_shape();
        return d;
    }

    Kind kind() const { return kind_; }
    DerivativeSource derivative_source() const { return source_; }
    double scale() const { return scale_; }

    // Only meaningful for the Normal kind.
    double sigma() const {
        if (kind_ != Kind::NormalZeroMean)
            throw invalid_parameter("sigma() is defined for the Normal kind only");
        return sigma_;
    }

    double cdf(double x) const {
        if (kind_ == Kind::NormalZeroMean)
            return 0.5 * std::erfc(-x / (sigma_ * kSqrt2));
        return ev_.cdf(x);
    }

    // Phi'
    double pdf(double x) const {
        if (kind_ == Kind::NormalZeroMean) {
            const double z = x / sigma_;
            return std::exp(-0.5 * z * z) / (sigma_ * kSqrt2Pi);
        }
        return ev_.pdf(x);
    }

    // Phi''
    double pdf1(double x) const {
        if (kind_ == Kind::NormalZeroMean) return -x / (sigma_ * sigma_) * pdf(x);
        return ev_.pdf1(x);
    }

    // Phi'''
    double pdf2(double x) const {
        if (kind_ == Kind::NormalZeroMean) {
            const double s2 = sigma_ * sigma_;
            return (x * x - s2) / (s2 * s2) * pdf(x);
        }
        return ev_.pdf2(x);
    }

    // Inverse cdf on (0,1). Normal uses the AS 241 rational approximation
    // (full double precision); custom falls back to bracketed bisection.
    double quantile(double u) const {
        if (!(u > 0.0 && u < 1.0))
            throw invalid_parameter("quantile: argument must lie strictly in (0,1)");
        if (kind_ == Kind::NormalZeroMean) return sigma_ * standard_normal_quantile(u);
        const auto& F = ev_.cdf;
        double lo = detail::expand_until([&](double x) { return F(x) < u; }, -scale_,
                                         "quantile: lower bracket search failed");
        double hi = detail::expand_until([&](double x) { return F(x) > u; }, scale_,
                                         "quantile: upper bracket search failed");
        return detail::bisect([&](double x) { return F(x) - u; }, lo, hi, F(lo) - u,
                              1e-15 * scale_);
    }

    // AS 241 algorithm PPND16 (Wichura): inverse of the standard normal cdf.
    static double standard_normal_quantile(double p) {
        const double q = p - 0.5;
        if (std::abs(q) <= 0.425) {
            const double r = 0.180625 - q * q;
            return q *
                   (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                         6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                       1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                     1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
                   (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                         3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                       5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                     4.2313330701600911252e+1) * r + 1.0);
        }
        double r = (q < 0.0) ? p : 1.0 - p;
        r = std::sqrt(-std::log(r));
        double v;
        if (r <= 5.0) {
            r -= 1.6;
            v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                    3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                  4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                  2.05319162663775882187e0) * r + 1.0);
        } else {
            r -= 5.0;
            v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                  5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
        }
        return (q < 0.0) ? -v : v;
    }

private:
    EvaluationDistribution() = default;

    static double check_scale(double scale) {
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw invalid_parameter("distribution scale must be a positive real");
        return scale;
    }

    // Shape validation for custom distributions on a fixed 1001-point
    // symmetric grid over [-5*scale, 5*scale]. Rejecting here keeps every
    // later theorem-driven computation honest.
    void validate_shape() const {
        constexpr int kHalf = 500;
        const double h = scale_ / 100.0;  // 1001 points, x_500 == 0 exactly
        const double p0 = ev_.pdf(0.0);
        if (!(p0 > 0.0) || !std::isfinite(p0))
            throw invalid_parameter("custom distribution: pdf(0) must be positive");
        if (std::abs(ev_.cdf(0.0) - 0.5) > 1e-12)
            throw invalid_parameter("custom distribution: cdf(0) must equal 1/2");

        double prev_cdf = -std::numeric_limits<double>::infinity();
        double prev_pdf = 0.0;
        for (int i = 0; i <= 2 * kHalf; ++i) {
            const double x = (i - kHalf) * h;
            const double c = ev_.cdf(x);
            const double p = ev_.pdf(x);
            if (!(c >= -1e-12 && c <= 1.0 + 1e-12))
                throw invalid_parameter("custom distribution: cdf must map into [0,1]");
            if (c < prev_cdf - 1e-12)
                throw invalid_parameter("custom distribution: cdf must be nondecreasing");
            if (p < -1e-12)
                throw invalid_parameter("custom distribution: pdf must be nonnegative");
            if (p > p0 * (1.0 + 1e-12))
                throw invalid_parameter(
                    "custom distribution: pdf must attain its maximum at 0");
            if (i > 0) {
                if (x <= 0.0 && !(p > prev_pdf))
                    throw invalid_parameter(
                        "custom distribution: pdf must be strictly increasing left of 0");
                if (x > h / 2.0 && !(p < prev_pdf))
                    throw invalid_parameter(
                        "custom distribution: pdf must be strictly decreasing right of 0");
            }
            prev_cdf = c;
            prev_pdf = p;
        }
    }

    static constexpr double kSqrt2 = 1.4142135623730950488;
    static constexpr double kSqrt2Pi = 2.5066282746310005024;

    Kind kind_ = Kind::NormalZeroMean;
    DerivativeSource source_ = DerivativeSource::Analytic;
    double sigma_ = 1.0;
    double scale_ = 1.0;
    CustomEvaluators ev_;
};

// Heterogeneity of the evaluation distribution: the reciprocal peak density.
// Wider spread of individual evaluations means larger heterogeneity.
inline double heterogeneity(const EvaluationDistribution& dist) {
    const double p0 = dist.pdf(0.0);
    if (!(p0 > 0.0) || !std::isfinite(p0))
        throw invalid_parameter("heterogeneity: degenerate distribution, pdf(0) is not positive");
    return 1.0 / p0;
}

}  // namespace marketdyn
