#include "ctp/volume_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctp {
namespace {

constexpr double kCdfTopTol = 1e-12;
constexpr double kTailQuantile = 1e-12;  // Pareto truncation: keep 1 - 1e-12 of the mass

bool finite(double x) { return std::isfinite(x); }

/// int_a^b v^p dv, a >= 0, b > a.  Infinite when the endpoint singularity at
/// zero is non-integrable.
double power_integral(double p, double a, double b) {
    if (a == 0.0 && p <= -1.0) return std::numeric_limits<double>::infinity();
    if (p == -1.0) return std::log(b / a);
    return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
}

}  // namespace

std::string to_string(DistKind k) {
    switch (k) {
        case DistKind::dirac: return "dirac";
        case DistKind::uniform: return "uniform";
        case DistKind::truncated_pareto: return "truncated_pareto";
        case DistKind::tabulated: return "tabulated";
    }
    return "?";
}

VolumeDistribution VolumeDistribution::dirac(double v0) {
    if (!finite(v0) || v0 <= 0.0)
        throw ValidationError("dist.v0", "dirac volume must be finite and positive");
    VolumeDistribution d;
    d.kind_ = DistKind::dirac;
    d.v0_ = v0;
    d.v_min_ = d.v_max_ = v0;
    d.v_max_requested_ = v0;
    return d;
}

VolumeDistribution VolumeDistribution::uniform(double a, double b) {
    if (!finite(a) || !finite(b) || a < 0.0 || b <= a)
        throw ValidationError("dist.a/dist.b", "uniform support needs 0 <= a < b, finite");
    VolumeDistribution d;
    d.kind_ = DistKind::uniform;
    d.a_ = a;
    d.b_ = b;
    d.v_min_ = a;
    d.v_max_ = b;
    d.v_max_requested_ = b;
    return d;
}

VolumeDistribution VolumeDistribution::truncated_pareto(double exponent, double v_min,
                                                        double v_max) {
    if (!finite(exponent) || !finite(v_min) || v_min <= 0.0)
        throw ValidationError("dist.v_min", "pareto needs finite exponent and v_min > 0");
    const bool unbounded = std::isinf(v_max);
    if (!unbounded && (!finite(v_max) || v_max <= v_min))
        throw ValidationError("dist.v_max", "pareto needs v_max > v_min (or +inf)");
    if (unbounded && exponent <= 1.0)
        throw ValidationError("dist.exponent",
                              "pareto with unbounded support needs exponent > 1");

    VolumeDistribution d;
    d.kind_ = DistKind::truncated_pareto;
    d.exponent_ = exponent;
    d.pareto_v_min_ = v_min;
    d.v_max_requested_ = v_max;
    d.truncated_from_unbounded_ = unbounded;
    d.v_min_ = v_min;
    if (unbounded) {
        // Quantile of the untruncated law: F(v) = 1 - (v_min/v)^(exponent-1).
        d.v_max_ = v_min * std::pow(kTailQuantile, -1.0 / (exponent - 1.0));
    } else {
        d.v_max_ = v_max;
    }
    const double mass = power_integral(-exponent, v_min, d.v_max_);
    d.pareto_norm_ = 1.0 / mass;
    // A mean must exist for the law to be usable at all.
    d.moment(1.0);
    return d;
}

VolumeDistribution VolumeDistribution::tabulated(std::vector<double> grid,
                                                 std::vector<double> cdf) {
    if (grid.size() < 2 || grid.size() != cdf.size())
        throw ValidationError("dist.grid", "tabulated law needs matching grid/cdf, size >= 2");
    if (grid.front() < 0.0)
        throw ValidationError("dist.grid", "tabulated support must be nonnegative");
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(grid[i] < grid[i + 1]))
            throw ValidationError("dist.grid", "tabulated grid must be strictly increasing");
        if (cdf[i + 1] < cdf[i])
            throw ValidationError("dist.cdf", "tabulated cdf must be nondecreasing");
    }
    if (std::abs(cdf.front()) > kCdfTopTol)
        throw ValidationError("dist.cdf", "tabulated cdf must start at 0");
    if (std::abs(cdf.back() - 1.0) > kCdfTopTol)
        throw ValidationError("dist.cdf", "tabulated cdf must reach 1 within 1e-12");
    // Renormalize so the top is exactly 1 and the bottom exactly 0.
    cdf.front() = 0.0;
    const double top = cdf.back();
    for (auto& c : cdf) c /= top;
    cdf.back() = 1.0;

    VolumeDistribution d;
    d.kind_ = DistKind::tabulated;
    d.grid_ = std::move(grid);
    d.cdf_ = std::move(cdf);
    d.v_min_ = d.grid_.front();
    d.v_max_ = d.grid_.back();
    d.v_max_requested_ = d.v_max_;
    const double m1 = d.moment(1.0);
    if (!(m1 > 0.0))
        throw ValidationError("dist.cdf", "tabulated law must have positive mean");
    return d;
}

double VolumeDistribution::sample(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    switch (kind_) {
        case DistKind::dirac:
            return v0_;
        case DistKind::uniform:
            return a_ + (b_ - a_) * u;
        case DistKind::truncated_pareto: {
            const double p = 1.0 - exponent_;
            if (p == 0.0) {
                return pareto_v_min_ * std::pow(v_max_ / pareto_v_min_, u);
            }
            const double lo = std::pow(pareto_v_min_, p);
            const double hi = std::pow(v_max_, p);
            return std::pow(lo + u * (hi - lo), 1.0 / p);
        }
        case DistKind::tabulated: {
            // First node with cdf > u; u < 1 guarantees it exists past index 0.
            auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
            if (it == cdf_.end()) return grid_.back();
            size_t j = static_cast<size_t>(it - cdf_.begin());
            if (j == 0) return grid_.front();
            const double f0 = cdf_[j - 1], f1 = cdf_[j];
            const double g0 = grid_[j - 1], g1 = grid_[j];
            return g0 + (g1 - g0) * ((u - f0) / (f1 - f0));
        }
    }
    return 0.0;
}

double VolumeDistribution::cdf(double v) const {
    if (v < v_min_) return 0.0;
    if (v >= v_max_) return 1.0;
    switch (kind_) {
        case DistKind::dirac:
            return v >= v0_ ? 1.0 : 0.0;
        case DistKind::uniform:
            return (v - a_) / (b_ - a_);
        case DistKind::truncated_pareto:
            return pareto_norm_ * power_integral(-exponent_, pareto_v_min_, v);
        case DistKind::tabulated: {
            auto it = std::upper_bound(grid_.begin(), grid_.end(), v);
            size_t j = static_cast<size_t>(it - grid_.begin());
            if (j == 0) return 0.0;
            if (j == grid_.size()) return 1.0;
            const double g0 = grid_[j - 1], g1 = grid_[j];
            return cdf_[j - 1] + (cdf_[j] - cdf_[j - 1]) * ((v - g0) / (g1 - g0));
        }
    }
    return 0.0;
}

double VolumeDistribution::density(double v) const {
    if (v < v_min_ || v > v_max_) return 0.0;
    switch (kind_) {
        case DistKind::dirac:
            throw Error("density undefined for a point mass; integrate the atom exactly");
        case DistKind::uniform:
            return 1.0 / (b_ - a_);
        case DistKind::truncated_pareto:
            return pareto_norm_ * std::pow(v, -exponent_);
        case DistKind::tabulated: {
            auto it = std::upper_bound(grid_.begin(), grid_.end(), v);
            size_t j = static_cast<size_t>(it - grid_.begin());
            if (j == 0) j = 1;
            if (j == grid_.size()) j = grid_.size() - 1;
            return (cdf_[j] - cdf_[j - 1]) / (grid_[j] - grid_[j - 1]);
        }
    }
    return 0.0;
}

std::vector<double> VolumeDistribution::density_breakpoints() const {
    if (kind_ == DistKind::tabulated) return grid_;
    return {v_min_, v_max_};
}

double VolumeDistribution::moment(double gamma) const {
    switch (kind_) {
        case DistKind::dirac:
            return std::pow(v0_, gamma);
        case DistKind::uniform: {
            const double integral = power_integral(gamma, a_, b_);
            if (!finite(integral))
                throw DivergentMoment("uniform moment diverges at the lower endpoint");
            return integral / (b_ - a_);
        }
        case DistKind::truncated_pareto: {
            if (truncated_from_unbounded_ && gamma >= exponent_ - 1.0)
                throw DivergentMoment("pareto moment of order " + std::to_string(gamma) +
                                      " diverges for unbounded support");
            return pareto_norm_ * power_integral(gamma - exponent_, pareto_v_min_, v_max_);
        }
        case DistKind::tabulated: {
            double acc = 0.0;
            for (size_t i = 0; i + 1 < grid_.size(); ++i) {
                const double pm = cdf_[i + 1] - cdf_[i];
                if (pm == 0.0) continue;
                const double density = pm / (grid_[i + 1] - grid_[i]);
                const double seg = power_integral(gamma, grid_[i], grid_[i + 1]);
                if (!finite(seg))
                    throw DivergentMoment("tabulated moment diverges at the lower endpoint");
                acc += density * seg;
            }
            return acc;
        }
    }
    return 0.0;
}

}  // namespace ctp
