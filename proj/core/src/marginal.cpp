#include "ctp/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctp/errors.hpp"
#include "ctp/math.hpp"

namespace ctp {
namespace {

/// Trapezoid weights for an arbitrary strictly increasing node set.
std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
    const size_t n = nodes.size();
    std::vector<double> w(n, 0.0);
    for (size_t i = 0; i + 1 < n; ++i) {
        const double h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

constexpr double kNodeSnapTol = 1e-12;  // relative: landing volumes this close to a node lump onto it

}  // namespace

MarginalGrid MarginalGrid::uniform(double lo, double hi, size_t n_nodes) {
    if (!(lo >= 0.0) || !(hi > lo) || n_nodes < 2)
        throw ValidationError("grid", "uniform grid needs 0 <= lo < hi and >= 2 nodes");
    MarginalGrid g;
    g.nodes.resize(n_nodes);
    const double h = (hi - lo) / static_cast<double>(n_nodes - 1);
    for (size_t i = 0; i < n_nodes; ++i) g.nodes[i] = lo + h * static_cast<double>(i);
    g.nodes.back() = hi;
    g.weights = trapezoid_weights(g.nodes);
    g.f.assign(n_nodes, 0.0);
    return g;
}

MarginalGrid MarginalGrid::geometric(double lo, double hi, size_t n_nodes) {
    if (!(lo > 0.0) || !(hi > lo) || n_nodes < 2)
        throw ValidationError("grid", "geometric grid needs 0 < lo < hi and >= 2 nodes");
    MarginalGrid g;
    g.nodes.resize(n_nodes);
    const double r = std::log(hi / lo) / static_cast<double>(n_nodes - 1);
    for (size_t i = 0; i < n_nodes; ++i) g.nodes[i] = lo * std::exp(r * static_cast<double>(i));
    g.nodes.back() = hi;
    g.weights = trapezoid_weights(g.nodes);
    g.f.assign(n_nodes, 0.0);
    return g;
}

void MarginalGrid::place_spike(double V0) {
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < nodes.size(); ++i) {
        const double d = std::abs(nodes[i] - V0);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    std::fill(f.begin(), f.end(), 0.0);
    f[best] = 1.0 / weights[best];
}

double MarginalGrid::moment(double k) const {
    double acc = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i)
        acc += weights[i] * f[i] * (k == 0.0 ? 1.0 : std::pow(nodes[i], k));
    return acc;
}

MarginalOperator::MarginalOperator(std::vector<double> nodes, std::vector<double> weights,
                                   const VolumeDistribution& dist, double U)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), u_(U) {
    const size_t n = nodes_.size();
    if (n < 2) throw ValidationError("grid", "marginal operator needs at least 2 nodes");
    if (weights_.size() != n) throw ValidationError("grid", "weights/nodes size mismatch");
    for (size_t i = 0; i + 1 < n; ++i)
        if (!(nodes_[i] < nodes_[i + 1]))
            throw ValidationError("grid", "nodes must be strictly increasing");
    if (!(U > 0.0)) throw ValidationError("U", "must be positive");

    row_begin_.assign(n + 1, 0);
    loss_.assign(n, 0.0);
    overflow_.assign(n, 0.0);

    const double top = nodes_.back();
    const double pref = u_ * kRatePrefactor;

    // Landing cell of a volume p, by binary search; n-1 means "past the top".
    auto cell_of = [&](double p) -> size_t {
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), p);
        size_t k = static_cast<size_t>(it - nodes_.begin());
        return k == 0 ? 0 : k - 1;
    };

    // Accumulate one landing: rate c arriving at volume p from source j.
    std::vector<double> row(n, 0.0);
    auto land = [&](size_t j, double p, double c) {
        loss_[j] += c;
        if (p > top) {
            overflow_[j] += c;
            return;
        }
        size_t k = cell_of(p);
        if (k >= n - 1) k = n - 2;
        const double h = nodes_[k + 1] - nodes_[k];
        double alpha = (nodes_[k + 1] - p) / h;
        if (std::abs(p - nodes_[k]) <= kNodeSnapTol * std::max(1.0, std::abs(p))) alpha = 1.0;
        if (std::abs(p - nodes_[k + 1]) <= kNodeSnapTol * std::max(1.0, std::abs(p))) alpha = 0.0;
        row[k] += c * alpha;
        row[k + 1] += c * (1.0 - alpha);
    };

    const bool atomic = dist.is_atomic();
    std::vector<double> brk;
    if (!atomic) brk = dist.density_breakpoints();

    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);

    for (size_t j = 0; j < n; ++j) {
        const double vj = nodes_[j];
        const double cj = std::cbrt(vj);
        if (atomic) {
            const double v0 = dist.v_min();
            const double s = cj + std::cbrt(v0);
            land(j, vj + v0, pref * s * s);
        } else {
            // Split [v_min, v_max] at density breakpoints and at node
            // differences so each segment lies in one landing cell and one
            // smooth density piece; two-point Gauss per segment.
            std::vector<double> cuts;
            for (double b : brk)
                if (b > dist.v_min() && b < dist.v_max()) cuts.push_back(b);
            for (size_t k = 0; k < n; ++k) {
                const double d = nodes_[k] - vj;
                if (d > dist.v_min() && d < dist.v_max()) cuts.push_back(d);
            }
            cuts.push_back(dist.v_min());
            cuts.push_back(dist.v_max());
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            for (size_t s = 0; s + 1 < cuts.size(); ++s) {
                const double a = cuts[s], b = cuts[s + 1];
                const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                if (!(half > 0.0)) continue;
                for (int q = 0; q < 2; ++q) {
                    const double v = mid + (q == 0 ? -1.0 : 1.0) * half * inv_sqrt3;
                    const double rs = cj + std::cbrt(v);
                    const double c = pref * dist.density(v) * rs * rs * half;
                    land(j, vj + v, c);
                }
            }
        }
        // Compact the dense row.
        for (size_t i = 0; i < n; ++i) {
            if (row[i] != 0.0) {
                col_.push_back(static_cast<uint32_t>(i));
                coef_.push_back(row[i]);
                row[i] = 0.0;
            }
        }
        row_begin_[j + 1] = col_.size();
    }
}

double MarginalOperator::max_loss_rate() const {
    double m = 0.0;
    for (double r : loss_) m = std::max(m, r);
    return m;
}

double MarginalOperator::apply(const std::vector<double>& f, std::vector<double>& out) const {
    const size_t n = nodes_.size();
    out.assign(n, 0.0);
    double overflow_rate = 0.0;
    for (size_t j = 0; j < n; ++j) {
        const double mj = weights_[j] * f[j];
        if (mj == 0.0) continue;
        for (size_t e = row_begin_[j]; e < row_begin_[j + 1]; ++e) out[col_[e]] += coef_[e] * mj;
        overflow_rate += overflow_[j] * mj;
    }
    for (size_t i = 0; i < n; ++i) out[i] = out[i] / weights_[i] - loss_[i] * f[i];
    return overflow_rate;
}

void MarginalOperator::apply_adjoint(const std::vector<double>& psi, std::vector<double>& out) const {
    const size_t n = nodes_.size();
    out.assign(n, 0.0);
    for (size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (size_t e = row_begin_[j]; e < row_begin_[j + 1]; ++e) acc += coef_[e] * psi[col_[e]];
        out[j] = acc - loss_[j] * psi[j];
    }
}

namespace {

/// One classical RK4 step of f' = op(f); also advances the overflow
/// accumulator through the same stages.
void rk4_step(const MarginalOperator& op, std::vector<double>& f, double& overflow, double dt,
              std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& tmp) {
    const size_t n = f.size();
    const double o1 = op.apply(f, k1);
    tmp.resize(n);
    for (size_t i = 0; i < n; ++i) tmp[i] = f[i] + 0.5 * dt * k1[i];
    const double o2 = op.apply(tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = f[i] + 0.5 * dt * k2[i];
    const double o3 = op.apply(tmp, k3);
    for (size_t i = 0; i < n; ++i) tmp[i] = f[i] + dt * k3[i];
    const double o4 = op.apply(tmp, k4);
    for (size_t i = 0; i < n; ++i)
        f[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    overflow += dt / 6.0 * (o1 + 2.0 * o2 + 2.0 * o3 + o4);
}

double grid_moment(const std::vector<double>& nodes, const std::vector<double>& w,
                   const std::vector<double>& f, double k) {
    double acc = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i)
        acc += w[i] * f[i] * (k == 0.0 ? 1.0 : std::pow(nodes[i], k));
    return acc;
}

}  // namespace

MarginalSolveResult solve_marginal(const MarginalOperator& op, MarginalGrid& grid,
                                   const MarginalSolveOptions& opt) {
    if (grid.size() != op.size()) throw ValidationError("grid", "grid/operator size mismatch");
    if (!(opt.T > 0.0)) throw ValidationError("T", "must be positive");
    if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw ValidationError("cfl", "must lie in (0, 1]");

    std::vector<double> times = opt.checkpoints;
    std::sort(times.begin(), times.end());
    if (times.empty() || times.back() < opt.T) times.push_back(opt.T);
    for (double t : times)
        if (!(t > 0.0) || t > opt.T) throw ValidationError("checkpoints", "need 0 < t <= T");

    const double dt_max = opt.cfl / op.max_loss_rate();
    const double mass0 = grid.mass();

    MarginalSolveResult res;
    std::vector<double> k1, k2, k3, k4, tmp;
    double overflow = 0.0;
    double t = 0.0;
    for (double target : times) {
        const double span = target - t;
        if (span > 0.0) {
            const size_t steps = static_cast<size_t>(std::ceil(span / dt_max));
            const double dt = span / static_cast<double>(steps);
            for (size_t s = 0; s < steps; ++s) {
                rk4_step(op, grid.f, overflow, dt, k1, k2, k3, k4, tmp);
                ++res.n_steps;
                const double drift = std::abs(grid.mass() + overflow - mass0);
                res.max_mass_drift = std::max(res.max_mass_drift, drift);
                if (drift > opt.mass_tol)
                    throw MassDrift("marginal solve mass drift " + std::to_string(drift) +
                                    " exceeds tolerance");
                if (overflow > opt.overflow_tol)
                    throw GridOverflow("mass beyond the top node reached " +
                                       std::to_string(overflow) + "; enlarge the grid");
            }
            t = target;
        }
        MarginalCheckpoint cp;
        cp.t = t;
        cp.mass = grid.mass();
        cp.mean = grid.moment(1.0) / cp.mass;
        cp.second_moment = grid.moment(2.0) / cp.mass;
        cp.overflow = overflow;
        res.checkpoints.push_back(cp);
    }
    res.overflow_mass = overflow;
    return res;
}

DualityReport duality_check(const MarginalOperator& op, const MarginalGrid& grid0,
                            const std::vector<double>& psi0, double T, double cfl) {
    if (grid0.size() != op.size() || psi0.size() != op.size())
        throw ValidationError("grid", "size mismatch in duality check");
    const double dt_max = cfl / op.max_loss_rate();
    const size_t steps = static_cast<size_t>(std::ceil(T / dt_max));
    const double dt = T / static_cast<double>(steps);

    std::vector<double> f = grid0.f;
    std::vector<double> k1, k2, k3, k4, tmp;
    double overflow = 0.0;
    for (size_t s = 0; s < steps; ++s) rk4_step(op, f, overflow, dt, k1, k2, k3, k4, tmp);

    std::vector<double> psi = psi0;
    const size_t n = op.size();
    auto adjoint_step = [&](std::vector<double>& x) {
        op.apply_adjoint(x, k1);
        tmp.resize(n);
        for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
        op.apply_adjoint(tmp, k2);
        for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
        op.apply_adjoint(tmp, k3);
        for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
        op.apply_adjoint(tmp, k4);
        for (size_t i = 0; i < n; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };
    for (size_t s = 0; s < steps; ++s) adjoint_step(psi);

    auto pair = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += a[i] * op.weights()[i] * b[i];
        return acc;
    };
    DualityReport rep;
    rep.forward_value = pair(psi0, f);
    rep.backward_value = pair(psi, grid0.f);
    rep.gap = std::abs(rep.forward_value - rep.backward_value);
    rep.n_steps = steps;
    return rep;
}

namespace {

struct ChainWork {
    std::vector<double> rate;  // r_n, grown together with p
    double u_pref = 0.0;
    double V0 = 0.0, v0 = 1.0;

    void ensure(size_t n) {
        const size_t old = rate.size();
        if (n <= old) return;
        rate.resize(n);
        const double c0 = std::cbrt(v0);
        for (size_t i = old; i < n; ++i) {
            const double s = std::cbrt(V0 + static_cast<double>(i) * v0) + c0;
            rate[i] = u_pref * s * s;
        }
    }
};

}  // namespace

DiracChainResult solve_dirac_chain(const DiracChainParams& params,
                                   std::vector<double> checkpoints) {
    if (!(params.U > 0.0)) throw ValidationError("U", "must be positive");
    if (!(params.v0 > 0.0)) throw ValidationError("v0", "must be positive");
    if (!(params.V0 >= 0.0)) throw ValidationError("V0", "must be nonnegative");
    if (!(params.dt_factor > 0.0 && params.dt_factor <= 1.0))
        throw ValidationError("dt_factor", "must lie in (0, 1]");
    if (checkpoints.empty()) throw ValidationError("checkpoints", "need at least one time");
    std::sort(checkpoints.begin(), checkpoints.end());
    if (!(checkpoints.front() > 0.0)) throw ValidationError("checkpoints", "times must be positive");

    ChainWork work;
    work.u_pref = params.U * kRatePrefactor;
    work.V0 = params.V0;
    work.v0 = params.v0;

    size_t cap = 4096;
    std::vector<double> p(cap, 0.0), k1(cap), k2(cap), k3(cap), k4(cap), tmp(cap);
    work.ensure(cap);
    p[0] = 1.0;
    size_t lo = 0, hi = 1;

    // Guard level at the top of the window, plus a buffer of guard-level
    // states above the last one exceeding it.  Flux truncated at the top is
    // then damped by (r dt)^B / B! <= 0.5^16/16! per step, so the leak stays
    // orders below tail_tol even while the wavefront is the bulk.
    const double hi_guard = params.tail_tol * 1e-4;
    const size_t top_buffer = 16;
    auto grow_window = [&]() {
        size_t h = hi;
        while (h > lo && p[h] <= hi_guard) --h;
        const size_t want = h + top_buffer;
        if (want <= hi) return;
        while (want + 1 >= cap) {
            cap *= 2;
            p.resize(cap, 0.0);
            k1.resize(cap);
            k2.resize(cap);
            k3.resize(cap);
            k4.resize(cap);
            tmp.resize(cap);
            work.ensure(cap);
        }
        hi = want;
    };
    grow_window();

    DiracChainResult res;
    res.V0 = params.V0;
    res.v0 = params.v0;

    // d p_n = r_{n-1} p_{n-1} - r_n p_n on [lo, hi]; entries below lo are
    // frozen and do not feed the window.
    auto rhs = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (size_t i = lo; i <= hi; ++i) {
            const double gain = (i > lo) ? work.rate[i - 1] * x[i - 1] : 0.0;
            out[i] = gain - work.rate[i] * x[i];
        }
    };

    double t = 0.0;
    for (double target : checkpoints) {
        while (t < target) {
            double dt = params.dt_factor / work.rate[hi];
            if (t + dt > target) dt = target - t;
            rhs(p, k1);
            for (size_t i = lo; i <= hi; ++i) tmp[i] = p[i] + 0.5 * dt * k1[i];
            rhs(tmp, k2);
            for (size_t i = lo; i <= hi; ++i) tmp[i] = p[i] + 0.5 * dt * k2[i];
            rhs(tmp, k3);
            for (size_t i = lo; i <= hi; ++i) tmp[i] = p[i] + dt * k3[i];
            rhs(tmp, k4);
            size_t mode = lo;
            for (size_t i = lo; i <= hi; ++i) {
                p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if (p[i] > p[mode]) mode = i;
            }
            t += dt;
            ++res.n_steps;
            // Window maintenance: grow the top before probability escapes,
            // freeze the decayed bottom.
            grow_window();
            while (lo < mode && p[lo] < params.freeze_tol) ++lo;
        }
        ChainMoments m;
        m.t = t;
        for (size_t i = 0; i <= hi; ++i) {
            const double vi = params.V0 + static_cast<double>(i) * params.v0;
            m.mass += p[i];
            m.mean_v += p[i] * vi;
            m.var_v += p[i] * vi * vi;
        }
        m.mean_v /= m.mass;
        m.var_v = m.var_v / m.mass - m.mean_v * m.mean_v;
        m.p0 = p[0];
        m.window_lo = lo;
        m.window_hi = hi;
        res.checkpoints.push_back(m);
        if (std::abs(m.mass - 1.0) > params.tail_tol * 1e4 + 1e-10)
            throw MassDrift("chain mass " + std::to_string(m.mass) + " drifted from 1");
    }
    p.resize(hi + 1);
    res.p = std::move(p);
    return res;
}

double mean_growth_ode(const VolumeDistribution& dist, double U, double V0, double T,
                       bool leading_only, size_t n_steps) {
    if (!(U > 0.0)) throw ValidationError("U", "must be positive");
    if (!(V0 >= 0.0)) throw ValidationError("V0", "must be nonnegative");
    if (!(T > 0.0)) throw ValidationError("T", "must be positive");
    if (n_steps == 0) throw ValidationError("n_steps", "must be positive");
    const double m1 = dist.moment(1.0);
    const double m43 = leading_only ? 0.0 : dist.moment(4.0 / 3.0);
    const double m53 = leading_only ? 0.0 : dist.moment(5.0 / 3.0);
    const double pref = U * kRatePrefactor;
    auto rhs = [&](double v) {
        const double c = std::cbrt(std::max(v, 0.0));
        return pref * (m1 * c * c + 2.0 * m43 * c + m53);
    };
    double v = V0;
    const double dt = T / static_cast<double>(n_steps);
    for (size_t s = 0; s < n_steps; ++s) {
        const double a1 = rhs(v);
        const double a2 = rhs(v + 0.5 * dt * a1);
        const double a3 = rhs(v + 0.5 * dt * a2);
        const double a4 = rhs(v + dt * a3);
        v += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    }
    return v;
}

ScalingReport asymptotic_scaling_check(double U, double v0, double V0,
                                       std::vector<double> times) {
    std::sort(times.begin(), times.end());
    DiracChainParams cp;
    cp.U = U;
    cp.v0 = v0;
    cp.V0 = V0;
    DiracChainResult chain = solve_dirac_chain(cp, times);

    const VolumeDistribution dist = VolumeDistribution::dirac(v0);
    const double lam = U * kRatePrefactor * v0;  // leading mean-ODE rate: lambda * m1

    ScalingReport rep;
    rep.coeff_rate_over3_cubed = std::pow(lam / 3.0, 3.0);
    rep.coeff_rate_over27 = U * kRatePrefactor * v0 * v0 * v0 / 27.0;
    for (const ChainMoments& m : chain.checkpoints) {
        ScalingRow row;
        row.t = m.t;
        row.mean_v = m.mean_v;
        row.var_v = m.var_v;
        row.mean_over_t3 = m.mean_v / (m.t * m.t * m.t);
        row.cbrt_mean_over_t = std::cbrt(m.mean_v) / m.t;
        row.mean_ode = mean_growth_ode(dist, U, V0, m.t, false,
                                       std::max<size_t>(20000, static_cast<size_t>(m.t) * 2000));
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace ctp
