#pragma once

#include <string>
#include <vector>

#include "ctp/errors.hpp"

namespace ctp {

enum class DistKind { dirac, uniform, truncated_pareto, tabulated };

std::string to_string(DistKind k);

/// Immutable law of the obstacle volume marks.  All support is contained in
/// [v_min(), v_max()] with v_max() finite: a Pareto tail requested with
/// unbounded support is truncated at its 1 - 1e-12 quantile at construction.
///
/// sample() is the inverse CDF, a deterministic monotone function of the
/// uniform input, so identical uniform streams reproduce identical volume
/// streams.  moment() integrates the density in closed form per piece.
class VolumeDistribution {
public:
    static VolumeDistribution dirac(double v0);
    static VolumeDistribution uniform(double a, double b);
    /// Density proportional to v^-exponent on [v_min, v_max].  v_max may be
    /// +infinity, in which case exponent must exceed 1 and the law is
    /// truncated at the 1 - 1e-12 quantile; moments that diverge for the
    /// untruncated law are reported as DivergentMoment rather than returning
    /// a truncation-dominated number.
    static VolumeDistribution truncated_pareto(double exponent, double v_min, double v_max);
    /// Piecewise-linear CDF through (grid[i], cdf[i]).  grid must be strictly
    /// increasing and nonnegative, cdf nondecreasing from 0 to 1 (within
    /// 1e-12 at the top; renormalized exactly).
    static VolumeDistribution tabulated(std::vector<double> grid, std::vector<double> cdf);

    DistKind kind() const { return kind_; }
    double v_min() const { return v_min_; }
    /// Essential supremum of the support (finite).
    double v_max() const { return v_max_; }

    /// Inverse CDF at u in [0, 1).
    double sample(double u) const;
    double cdf(double v) const;
    /// Lebesgue density at v for the continuous kinds; throws for a point
    /// mass (callers integrate atoms exactly instead).
    double density(double v) const;
    /// Points where the density is discontinuous: support endpoints plus the
    /// tabulated grid nodes.  Quadratures split segments here.
    std::vector<double> density_breakpoints() const;
    bool is_atomic() const { return kind_ == DistKind::dirac; }
    /// E[v^gamma]; throws DivergentMoment when the integral does not exist.
    double moment(double gamma) const;
    double mean() const { return moment(1.0); }

    // Parameter accessors used by config echo; meaningful per kind.
    double param_v0() const { return v0_; }
    double param_a() const { return a_; }
    double param_b() const { return b_; }
    double param_exponent() const { return exponent_; }
    double param_v_min() const { return pareto_v_min_; }
    /// The v_max the caller asked for (may be +infinity for a Pareto tail).
    double param_v_max_requested() const { return v_max_requested_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& cdf_values() const { return cdf_; }

    bool operator==(const VolumeDistribution& other) const = default;

private:
    VolumeDistribution() = default;

    DistKind kind_ = DistKind::dirac;
    double v_min_ = 0.0;
    double v_max_ = 0.0;
    double v0_ = 0.0;
    double a_ = 0.0;
    double b_ = 0.0;
    double exponent_ = 0.0;
    double pareto_v_min_ = 0.0;
    double v_max_requested_ = 0.0;
    bool truncated_from_unbounded_ = false;
    double pareto_norm_ = 0.0;  // density = pareto_norm_ * v^-exponent on support
    std::vector<double> grid_;
    std::vector<double> cdf_;
};

}  // namespace ctp
