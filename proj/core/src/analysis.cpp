#include "ctp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "ctp/errors.hpp"
#include "ctp/kinetic.hpp"
#include "ctp/rng.hpp"

namespace ctp {
namespace {

constexpr double kWeightSumTol = 1e-12;

double mean_of(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

EmpiricalMeasure EmpiricalMeasure::from_scalars(std::vector<double> v) {
    EmpiricalMeasure m;
    m.tag = "V";
    const double w = 1.0 / static_cast<double>(v.size());
    m.values.reserve(v.size());
    for (double x : v) m.values.push_back({x});
    m.weights.assign(v.size(), w);
    m.validate();
    return m;
}

EmpiricalMeasure EmpiricalMeasure::from_weighted_scalars(std::vector<double> v,
                                                         std::vector<double> w) {
    EmpiricalMeasure m;
    m.tag = "V";
    m.values.reserve(v.size());
    for (double x : v) m.values.push_back({x});
    m.weights = std::move(w);
    m.validate();
    return m;
}

void EmpiricalMeasure::validate() const {
    if (tag != "V" && tag != "YV") throw ValidationError("measure.tag", "must be V or YV");
    const size_t dim = tag == "V" ? 1 : 4;
    if (values.size() != weights.size())
        throw ValidationError("measure", "values/weights size mismatch");
    if (values.empty()) throw ValidationError("measure", "needs at least one sample");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("measure.weights", "must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kWeightSumTol)
        throw ValidationError("measure.weights", "must sum to 1 within 1e-12");
    for (const auto& v : values)
        if (v.size() != dim) throw ValidationError("measure.values", "dimension mismatch");
}

namespace {

/// W1 between two weighted scalar measures: sort the signed support and
/// integrate |F_a - F_b| between consecutive points.
double w1_weighted(const std::vector<std::pair<double, double>>& signed_atoms) {
    std::vector<std::pair<double, double>> atoms = signed_atoms;
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double dist = 0.0, cdf_gap = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        cdf_gap += atoms[i].second;
        if (i + 1 < atoms.size()) dist += std::abs(cdf_gap) * (atoms[i + 1].first - atoms[i].first);
    }
    return dist;
}

}  // namespace

double wasserstein1_v(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    a.validate();
    b.validate();
    if (a.tag != "V" || b.tag != "V")
        throw ValidationError("measure.tag", "wasserstein1_v needs V-marginals");
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(a.values.size() + b.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) atoms.emplace_back(a.values[i][0], a.weights[i]);
    for (size_t i = 0; i < b.values.size(); ++i) atoms.emplace_back(b.values[i][0], -b.weights[i]);
    return w1_weighted(atoms);
}

double wasserstein1_scalar(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("samples", "need nonempty samples");
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(a.size() + b.size());
    const double wa = 1.0 / static_cast<double>(a.size());
    const double wb = 1.0 / static_cast<double>(b.size());
    for (double x : a) atoms.emplace_back(x, wa);
    for (double x : b) atoms.emplace_back(x, -wb);
    return w1_weighted(atoms);
}

BootstrapEstimate wasserstein1_bootstrap(const std::vector<double>& a,
                                         const std::vector<double>& b, size_t n_resamples,
                                         uint64_t seed) {
    BootstrapEstimate est;
    est.value = wasserstein1_scalar(a, b);
    est.n_resamples = n_resamples;
    if (n_resamples < 2) return est;
    Rng rng(derive_seed(seed, 0x0b007));
    std::vector<double> ra(a.size()), rb(b.size()), dist(n_resamples);
    for (size_t r = 0; r < n_resamples; ++r) {
        for (auto& x : ra) x = a[static_cast<size_t>(rng.uniform() * static_cast<double>(a.size()))];
        for (auto& x : rb) x = b[static_cast<size_t>(rng.uniform() * static_cast<double>(b.size()))];
        dist[r] = wasserstein1_scalar(ra, rb);
    }
    const double m = mean_of(dist);
    double var = 0.0;
    for (double d : dist) var += (d - m) * (d - m);
    est.se = std::sqrt(var / static_cast<double>(n_resamples - 1));
    return est;
}

ConvergenceReport convergence_study(const ConvergenceParams& params,
                                    const VolumeDistribution& dist) {
    if (params.phi_list.size() < 2)
        throw ValidationError("phi_list", "need at least two volume fractions to compare");
    for (size_t i = 0; i + 1 < params.phi_list.size(); ++i)
        if (!(params.phi_list[i] > params.phi_list[i + 1]))
            throw ValidationError("phi_list", "must be strictly decreasing");
    if (params.n_traj < 2) throw ValidationError("n_traj", "need at least 2 trajectories");

    // Single drift-free kinetic reference ensemble.
    JumpKernel kernel(dist);
    JumpParams jp;
    jp.U = params.U;
    jp.T = params.T;
    jp.V0 = params.V0;
    jp.Y0 = params.Y0;
    jp.seed = derive_seed(params.seed, 1000003);
    JumpEnsembleResult kin = run_jump_ensemble(kernel, jp, params.n_traj, params.threads);

    std::vector<double> kin_v;
    double kin_v2 = 0.0, kin_y1 = 0.0, kin_yn2 = 0.0;
    for (size_t i = 0; i < kin.v_final.size(); ++i) {
        if (!kin.errors[i].empty()) continue;
        kin_v.push_back(kin.v_final[i]);
        const Vec3 d = kin.y_final[i] - params.Y0;
        kin_v2 += kin.v_final[i] * kin.v_final[i];
        kin_y1 += d[0];
        kin_yn2 += norm2(d);
    }
    if (kin_v.empty()) throw Error("kinetic reference ensemble produced no complete paths");
    const double nk = static_cast<double>(kin_v.size());
    const double kin_mean_v = mean_of(kin_v);
    kin_v2 /= nk;
    kin_y1 /= nk;
    kin_yn2 /= nk;

    ConvergenceReport rep;
    rep.kin_mean_v = kin_mean_v;
    rep.kin_mean_v2 = kin_v2;

    for (size_t pi = 0; pi < params.phi_list.size(); ++pi) {
        SimParams sp;
        sp.phi = params.phi_list[pi];
        sp.U = params.U;
        sp.T = params.T;
        sp.V0 = params.V0;
        sp.Y0 = params.Y0;
        sp.seed = derive_seed(params.seed, static_cast<int64_t>(pi) + 1);
        sp.merge_rule = params.merge_rule;
        EnsembleResult ens = run_ensemble(sp, dist, params.n_traj, params.threads);

        ConvergenceRow row;
        row.phi = sp.phi;
        row.n_traj = params.n_traj;
        row.n_failed = ens.n_failed;

        std::vector<double> part_v;
        double part_v2 = 0.0, part_y1 = 0.0, part_yn2 = 0.0;
        size_t n_binary = 0, n_cascade = 0, flights = 0, n_ok = 0;
        for (size_t i = 0; i < ens.records.size(); ++i) {
            const TrajectoryRecord& rec = ens.records[i];
            if (!rec.ok) continue;
            ++n_ok;
            part_v.push_back(rec.v_final);
            part_v2 += rec.v_final * rec.v_final;
            // Merge-increment sum: the ballistic drift cancels exactly.
            Vec3 disp{};
            bool cascade = false;
            for (const Event& e : ens.logs[i].events) {
                if (const auto* c = std::get_if<CoalescenceEvent>(&e)) {
                    disp = disp + c->d_y;
                    if (c->steps.size() > 1) cascade = true;
                }
            }
            part_y1 += disp[0];
            part_yn2 += norm2(disp);
            if (ens.logs[i].binary_only()) ++n_binary;
            if (cascade) ++n_cascade;
            flights += ens.logs[i].n_flights();
        }
        if (n_ok == 0) throw Error("particle ensemble produced no complete trajectories");
        const double np = static_cast<double>(n_ok);
        row.gap_v = std::abs(mean_of(part_v) - kin_mean_v);
        row.gap_v2 = std::abs(part_v2 / np - kin_v2);
        row.gap_y1 = std::abs(part_y1 / np - kin_y1);
        row.gap_ynorm2 = std::abs(part_yn2 / np - kin_yn2);
        BootstrapEstimate w1 = wasserstein1_bootstrap(
            part_v, kin_v, params.n_boot, derive_seed(params.seed, 31337, static_cast<int64_t>(pi)));
        row.w1_v = w1.value;
        row.w1_se = w1.se;
        row.binary_fraction = static_cast<double>(n_binary) / np;
        row.cascade_fraction = static_cast<double>(n_cascade) / np;
        row.mean_flights = static_cast<double>(flights) / np;
        rep.rows.push_back(row);
    }

    // Noise diagnosis: if the full spread of W1 over the ladder sits inside
    // the combined 2 sigma band, nothing can be concluded at this n_traj.
    size_t imax = 0, imin = 0;
    for (size_t i = 1; i < rep.rows.size(); ++i) {
        if (rep.rows[i].w1_v > rep.rows[imax].w1_v) imax = i;
        if (rep.rows[i].w1_v < rep.rows[imin].w1_v) imin = i;
    }
    const double spread = rep.rows[imax].w1_v - rep.rows[imin].w1_v;
    if (rep.rows.size() > 1 && spread <= 2.0 * (rep.rows[imax].w1_se + rep.rows[imin].w1_se))
        throw InconclusiveNoise("W1 spread " + std::to_string(spread) +
                                " is within the combined 2 sigma Monte Carlo band; "
                                "increase n_traj");

    rep.w1_strictly_decreasing = true;
    rep.binary_fraction_monotone = true;
    for (size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        if (!(rep.rows[i + 1].w1_v < rep.rows[i].w1_v)) rep.w1_strictly_decreasing = false;
        if (rep.rows[i + 1].binary_fraction < rep.rows[i].binary_fraction)
            rep.binary_fraction_monotone = false;
    }
    if (rep.rows.size() > 1) {
        const ConvergenceRow& f = rep.rows.front();
        const ConvergenceRow& l = rep.rows.back();
        rep.w1_significant_decrease =
            f.w1_v - l.w1_v > 2.0 * std::sqrt(f.w1_se * f.w1_se + l.w1_se * l.w1_se);
    }
    return rep;
}

DisplacementAuditResult displacement_audit(const std::vector<EventLog>& logs, double V0,
                                           double coeff) {
    DisplacementAuditResult res;
    res.coeff = coeff;
    res.n_logs = logs.size();
    const double c0 = std::cbrt(V0);
    for (const EventLog& log : logs) {
        if (!log.binary_only()) continue;
        ++res.n_binary_logs;
        Vec3 disp{};
        double v = V0;
        for (const Event& e : log.events) {
            const auto* c = std::get_if<CoalescenceEvent>(&e);
            if (!c) continue;
            disp = disp + c->d_y;
            v += c->d_volume;
            const double growth = std::cbrt(v) - c0;
            const double r = norm(disp);
            ++res.n_merges_checked;
            if (growth > 0.0) res.max_ratio = std::max(res.max_ratio, r / growth);
            if (r > coeff * growth) ++res.violations;
        }
    }
    return res;
}

std::vector<PoissonTailRow> poisson_tail_check(const std::vector<double>& xi_star_list,
                                               const std::vector<uint64_t>& n_list) {
    const double e_sq_inv = std::exp(-2.0);
    std::vector<PoissonTailRow> table;
    for (double xi : xi_star_list) {
        if (!(xi > 0.0) || !(xi < e_sq_inv))
            throw ValidationError("xi_star", "must lie in (0, e^-2)");
        for (uint64_t n : n_list) {
            if (n < 1) throw ValidationError("N", "must be >= 1");
            PoissonTailRow row;
            row.xi_star = xi;
            row.n = n;
            row.zeta = xi * static_cast<double>(n);
            // Upward summation of sum_{k>=n} zeta^k e^-zeta / k!, first term
            // through logs to dodge overflow of zeta^n and n!.
            const double nd = static_cast<double>(n);
            double term = std::exp(nd * std::log(row.zeta) - row.zeta - std::lgamma(nd + 1.0));
            double sum = 0.0;
            double k = nd;
            while (term > 0.0 && term > sum * 1e-18) {
                sum += term;
                k += 1.0;
                term *= row.zeta / k;
            }
            row.psi = sum;
            row.psi_gamma = boost::math::gamma_p(nd, row.zeta);
            if (std::abs(row.psi - row.psi_gamma) > 1e-12 * std::max(row.psi, 1e-280))
                throw Error("poisson tail cross-check mismatch at N=" + std::to_string(n));
            row.bound = std::exp(1.0) / (std::exp(1.0) - 1.0) *
                        std::exp(-0.5 * nd * std::abs(std::log(xi)));
            row.ratio = row.psi / row.bound;
            table.push_back(row);
        }
    }
    return table;
}

BlowupResult blowup_demo(const BlowupParams& params) {
    if (params.n_obstacles < 1) throw ValidationError("n_obstacles", "need at least 1");
    if (!(params.v_target > 1.0)) throw ValidationError("v_target", "must exceed V0 = 1");

    // Recursion frame: unit speed, radii sigma * V^{1/3}.
    const size_t n = params.n_obstacles;
    std::vector<double> xi(n + 1, 0.0);
    for (size_t k = 0; k + 1 <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double l_next = std::ldexp(1.0, -static_cast<int>(k + 1));
        xi[k + 1] = xi[k] - kSigma * (1.0 + std::cbrt(kd)) * kd / (kd + 1.0) +
                    kSigma * std::cbrt(kd + 1.0) + l_next + kSigma;
    }
    if (std::abs(xi[1] - (0.5 + 2.0 * kSigma)) > 1e-12)
        throw ConstructionMismatch("first obstacle off its closed-form position");

    // phi = 1/8 makes phi^{1/3} = 1/2 exactly; with U = phi the effective
    // speed is 1/2, so physical = recursion frame scaled by 1/2 and the
    // collision times coincide with the recursion's.
    const double scale = 0.5;
    // Beyond index ~50 the ideal spacing 2^{-j} is far below the rounding of
    // the accumulated center of mass, so an exactly-touching tail can round
    // to a positive gap whose crossing time outlives the horizon.  A relative
    // inward nudge keeps that tail in strict overlap -- absorbed within the
    // merge cascade at the frozen time -- without touching any flight long
    // enough to resolve in double precision (2^{-50} << nudge << tolerance).
    const double tail_snug = 1e-10;
    std::vector<Vec3> centers(n);
    std::vector<double> vols(n, 1.0);
    for (size_t k = 1; k <= n; ++k) {
        double cx = scale * xi[k];
        if (k > 50) cx *= 1.0 - tail_snug;
        centers[k - 1] = {cx, 0.0, 0.0};
        if (params.perturb_index == k) centers[k - 1][1] += params.perturb_offset;
    }
    ScriptedField field =
        ScriptedField::from_points(centers, vols, VolumeDistribution::dirac(1.0));

    SimParams sp;
    sp.phi = 0.125;
    sp.U = 0.125;
    sp.T = params.horizon;
    sp.V0 = 1.0;
    sp.max_cascade = params.max_cascade;
    sp.v_budget = params.v_target + static_cast<double>(n) + 2.0;
    TrajectoryResult traj = run_trajectory(sp, field);

    BlowupResult res;
    res.final_volume = traj.state.v;
    res.final_time = traj.state.t;
    double volume = 1.0;
    for (const Event& e : traj.log.events) {
        const auto* c = std::get_if<CoalescenceEvent>(&e);
        if (!c) continue;
        for (const auto& step : c->steps) {
            for (const CascadeHit& hit : step) {
                (void)hit;
                ++res.n_absorbed;
                volume += 1.0;
                // 2^{-j} underflows to 0 past j ~ 1074, where tau_j = 1 to
                // double precision anyway.
                const double tau =
                    1.0 - std::ldexp(1.0, -static_cast<int>(std::min<size_t>(res.n_absorbed, 2000)));
                res.tau_sim.push_back(c->t);
                res.tau_expected.push_back(tau);
                const double abs_err = std::abs(c->t - tau);
                res.max_abs_tau_error = std::max(res.max_abs_tau_error, abs_err);
                res.max_rel_tau_error = std::max(res.max_rel_tau_error, abs_err / tau);
                if (!res.reached_target && volume >= params.v_target) {
                    res.reached_target = c->t < params.horizon;
                    res.escape_time = c->t;
                }
            }
        }
    }
    if (params.perturb_index == 0 && res.max_rel_tau_error > 1e-9)
        throw ConstructionMismatch("absorption times deviate from the geometric series by " +
                                   std::to_string(res.max_rel_tau_error) + " relative");
    return res;
}

FlightStatsReport flight_stats(const std::vector<EventLog>& logs, double phi, double delta) {
    if (!(phi > 0.0 && phi < 1.0)) throw ValidationError("phi", "must lie in (0,1)");
    if (!(delta > 0.0)) throw ValidationError("delta", "must be positive");
    const double inv_phi13 = 1.0 / std::cbrt(phi);
    FlightStatsReport rep;
    rep.delta = delta;
    size_t half_logs = 0;
    for (const EventLog& log : logs) {
        FlightLogRow row;
        size_t small = 0;
        for (const Event& e : log.events) {
            const auto* f = std::get_if<FlightEvent>(&e);
            if (!f) continue;
            ++row.n_flights;
            const double len = f->length * inv_phi13;
            row.total_length += len;
            const double r = kSigma * std::cbrt(f->volume);
            if (len <= delta / (r * r + 1.0)) ++small;
        }
        row.small_fraction =
            row.n_flights ? static_cast<double>(small) / static_cast<double>(row.n_flights) : 0.0;
        if (row.n_flights && row.small_fraction >= 0.5) ++half_logs;
        rep.mean_small_fraction += row.small_fraction;
        rep.mean_total_length += row.total_length;
        rep.rows.push_back(row);
    }
    if (!rep.rows.empty()) {
        rep.mean_small_fraction /= static_cast<double>(rep.rows.size());
        rep.mean_total_length /= static_cast<double>(rep.rows.size());
        rep.frac_logs_half_small =
            static_cast<double>(half_logs) / static_cast<double>(rep.rows.size());
    }
    return rep;
}

}  // namespace ctp
