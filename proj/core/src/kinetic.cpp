#include "ctp/kinetic.hpp"

#include <cmath>
#include <stdexcept>

#include "ctp/errors.hpp"
#include "ctp/parallel.hpp"

namespace ctp {

void JumpParams::validate() const {
    if (!(U > 0.0) || !std::isfinite(U)) throw ValidationError("U", "must be finite and positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T", "must be finite and positive");
    if (!(V0 >= 0.0) || !std::isfinite(V0)) throw ValidationError("V0", "must be finite and nonnegative");
    if (max_jumps == 0) throw ValidationError("max_jumps", "must be positive");
}

JumpKernel::JumpKernel(VolumeDistribution dist) : dist_(std::move(dist)) {
    m13_ = dist_.moment(1.0 / 3.0);
    m23_ = dist_.moment(2.0 / 3.0);
}

Jump JumpKernel::sample_jump(Rng& rng, double V) const {
    const double c = std::cbrt(V);
    const double top = c + std::cbrt(dist_.v_max());
    const double top_sq = top * top;
    Jump j;
    // Rejection on the volume factor.  Acceptance is bounded below by
    // ((V^{1/3}+v_min^{1/3})/(V^{1/3}+v_max^{1/3}))^2 > 0, so this terminates.
    for (;;) {
        const double v = dist_.sample(rng.uniform());
        const double s = c + std::cbrt(v);
        if (rng.uniform() * top_sq <= s * s) {
            j.v = v;
            break;
        }
    }
    j.theta = std::asin(std::sqrt(rng.uniform()));
    j.phi = 2.0 * kPi * rng.uniform();
    return j;
}

Vec3 jump_displacement(double V, const Jump& j) {
    const double scale = j.v / (V + j.v) * kSigma * (std::cbrt(V) + std::cbrt(j.v));
    return scale * contact_direction(j.theta, j.phi);
}

JumpPathResult simulate_path(const JumpKernel& kernel, const JumpParams& params, bool record_path) {
    params.validate();
    Rng rng(params.seed);
    JumpPathResult res;
    res.y = params.Y0;
    res.v = params.V0;
    double t = 0.0;
    if (record_path) res.path.push_back({0.0, res.v, res.y});
    for (;;) {
        const double rate = params.U * kernel.lambda(res.v);
        const double dt = rng.exponential() / rate;
        if (t + dt >= params.T) break;
        t += dt;
        if (res.n_jumps >= params.max_jumps)
            throw JumpBudgetExceeded("jump count exceeded max_jumps = " + std::to_string(params.max_jumps));
        const Jump j = kernel.sample_jump(rng, res.v);
        res.y = res.y + jump_displacement(res.v, j);
        res.v += j.v;
        ++res.n_jumps;
        if (record_path) res.path.push_back({t, res.v, res.y});
    }
    return res;
}

JumpEnsembleResult run_jump_ensemble(const JumpKernel& kernel, const JumpParams& params,
                                     size_t n_paths, int threads) {
    params.validate();
    JumpEnsembleResult out;
    out.v_final.assign(n_paths, 0.0);
    out.y_final.assign(n_paths, Vec3{});
    out.n_jumps.assign(n_paths, 0);
    out.errors.assign(n_paths, std::string());
    parallel_for(n_paths, threads, [&](size_t i) {
        JumpParams p = params;
        p.seed = derive_seed(params.seed, static_cast<int64_t>(i));
        try {
            JumpPathResult r = simulate_path(kernel, p);
            out.v_final[i] = r.v;
            out.y_final[i] = r.y;
            out.n_jumps[i] = r.n_jumps;
        } catch (const Error& e) {
            out.errors[i] = e.what();
        }
    });
    for (const auto& e : out.errors)
        if (!e.empty()) ++out.n_failed;
    return out;
}

}  // namespace ctp
