#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctp/math.hpp"
#include "ctp/rng.hpp"
#include "ctp/volume_dist.hpp"

namespace ctp {

struct JumpParams {
    double U = 1.0;
    double T = 1.0;
    double V0 = 1.0;
    Vec3 Y0{};
    uint64_t seed = 0;
    uint64_t max_jumps = 10000000;

    void validate() const;
};

struct Jump {
    double v = 0.0;      // absorbed volume
    double theta = 0.0;  // polar contact angle in [0, pi/2]
    double phi = 0.0;    // azimuth in [0, 2pi)
};

/// Collision kernel of the limiting jump process.  Rates use the exact
/// moment expansion E[(V^{1/3}+v^{1/3})^2] = V^{2/3} + 2 m_{1/3} V^{1/3} +
/// m_{2/3}, so no rate quadrature or interpolation error enters the paths.
class JumpKernel {
public:
    explicit JumpKernel(VolumeDistribution dist);

    /// E[(V^{1/3} + v^{1/3})^2] under the volume law.
    double mean_radius_sum_sq(double V) const {
        const double c = std::cbrt(V);
        return c * c + 2.0 * m13_ * c + m23_;
    }

    /// Total jump intensity at unit speed: pi * sigma^2 * E[(V^{1/3}+v^{1/3})^2].
    double lambda(double V) const { return kAngularWeight * kSigma * kSigma * mean_radius_sum_sq(V); }

    /// Draws (v, theta, phi) from the normalized kernel at volume V.
    /// Volumes come from the law by rejection with acceptance
    /// (V^{1/3}+v^{1/3})^2 / (V^{1/3}+v_max^{1/3})^2; the angles satisfy
    /// sin^2(theta) ~ U(0,1) and phi ~ U(0, 2pi).
    Jump sample_jump(Rng& rng, double V) const;

    const VolumeDistribution& dist() const { return dist_; }

private:
    VolumeDistribution dist_;
    double m13_ = 0.0;
    double m23_ = 0.0;
};

/// Center displacement of a merge event in rescaled units:
/// l = v/(V+v) * sigma * (V^{1/3}+v^{1/3}) * (cos t, sin t cos p, sin t sin p).
Vec3 jump_displacement(double V, const Jump& j);

struct JumpPathPoint {
    double t = 0.0;
    double v = 0.0;
    Vec3 y{};
};

struct JumpPathResult {
    Vec3 y{};
    double v = 0.0;
    uint64_t n_jumps = 0;
    std::vector<JumpPathPoint> path;  // filled only on request
};

/// Exact event-driven simulation: holding times Exp(U * lambda(V)), then one
/// kernel draw.  Deterministic in the seed.
JumpPathResult simulate_path(const JumpKernel& kernel, const JumpParams& params,
                             bool record_path = false);

struct JumpEnsembleResult {
    std::vector<double> v_final;
    std::vector<Vec3> y_final;
    std::vector<uint64_t> n_jumps;
    size_t n_failed = 0;
    std::vector<std::string> errors;  // indexed like v_final; empty = completed
};

/// Runs n_paths independent paths with seeds derive_seed(params.seed, i).
/// Results are indexed by path; failures recorded, not rethrown.
JumpEnsembleResult run_jump_ensemble(const JumpKernel& kernel, const JumpParams& params,
                                     size_t n_paths, int threads = 1);

}  // namespace ctp
