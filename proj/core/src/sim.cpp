#include "ctp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctp/parallel.hpp"

namespace ctp {

namespace {

double contact_radius(double phi13, double volume, double vol_obstacle) {
    return phi13 * kSigma * (std::cbrt(volume) + std::cbrt(vol_obstacle));
}

/// Obstacles whose centers strictly overlap the tagged sphere at frozen time
/// (overlap depth beyond the relative geometric tolerance).
std::vector<Obstacle> strictly_overlapping(const SimParams& params, const FieldView& view,
                                           const Vec3& y_phys, double volume, double t) {
    const double phi13 = std::cbrt(params.phi);
    const Vec3 drift = {params.u_eff() * t, 0.0, 0.0};
    const double rho_max = contact_radius(phi13, volume, view.source().volume_law().v_max());
    const Capsule ball{y_phys + drift, y_phys + drift, rho_max};
    std::vector<Obstacle> cluster;
    for (const Obstacle& o : view.unconsumed_in(ball)) {
        const double rho = contact_radius(phi13, volume, o.vol);
        if (norm(o.pos - drift - y_phys) < rho * (1.0 - params.eps_geom)) cluster.push_back(o);
    }
    return cluster;
}

}  // namespace

std::string to_string(MergeRule r) {
    return r == MergeRule::center_of_mass ? "center_of_mass" : "pre_merge_normalized";
}

void SimParams::validate() const {
    if (!(phi > 0.0) || !(phi < 1.0))
        throw ValidationError("particle.phi", "packing fraction must lie in (0, 1)");
    if (!(U > 0.0) || !std::isfinite(U))
        throw ValidationError("particle.U", "speed must be positive and finite");
    if (!(T > 0.0) || !std::isfinite(T))
        throw ValidationError("particle.T", "horizon must be positive and finite");
    if (!(V0 >= 0.0) || !std::isfinite(V0))
        throw ValidationError("particle.V0", "initial volume must be nonnegative");
    if (!(eps_geom > 0.0) || eps_geom > 1e-3)
        throw ValidationError("particle.eps_geom", "geometric tolerance must lie in (0, 1e-3]");
    if (max_cascade == 0)
        throw ValidationError("particle.max_cascade", "cascade bound must be positive");
}

double SimParams::u_eff() const { return U * std::pow(phi, -2.0 / 3.0); }

double default_v_budget(const SimParams& params, const VolumeDistribution& dist) {
    // Leading-order growth of the mean volume, then generous headroom for
    // fluctuations and the neglected lower-order terms.
    const double lam = params.U * kPi * kSigma * kSigma;
    const double w = std::cbrt(params.V0) + lam * dist.mean() * params.T / 3.0;
    const double predicted = w * w * w + params.V0 + 8.0 * dist.v_max() + 1.0;
    return 64.0 * predicted;
}

double default_cell_side(const SimParams& params, const VolumeDistribution& dist) {
    const double budget = params.v_budget > 0.0 ? params.v_budget
                                                : default_v_budget(params, dist);
    const double reach =
        4.0 * std::cbrt(params.phi) * kSigma * (std::cbrt(budget) + std::cbrt(dist.v_max()));
    return std::max(1.0, reach);
}

size_t EventLog::n_flights() const {
    size_t n = 0;
    for (const auto& e : events) n += std::holds_alternative<FlightEvent>(e) ? 1 : 0;
    return n;
}

size_t EventLog::n_coalescences() const {
    size_t n = 0;
    for (const auto& e : events) n += std::holds_alternative<CoalescenceEvent>(e) ? 1 : 0;
    return n;
}

size_t EventLog::n_absorbed() const {
    size_t n = 0;
    for (const auto& e : events)
        if (const auto* c = std::get_if<CoalescenceEvent>(&e)) n += c->absorbed();
    return n;
}

size_t EventLog::n_cascade_steps() const {
    size_t n = 0;
    for (const auto& e : events)
        if (const auto* c = std::get_if<CoalescenceEvent>(&e)) n += c->steps.size();
    return n;
}

bool EventLog::binary_only() const {
    for (const auto& e : events)
        if (const auto* c = std::get_if<CoalescenceEvent>(&e))
            if (!c->is_binary()) return false;
    return true;
}

double EventLog::total_flight_duration() const {
    double s = 0.0;
    for (const auto& e : events)
        if (const auto* f = std::get_if<FlightEvent>(&e)) s += f->duration;
    return s;
}

double EventLog::total_flight_length() const {
    double s = 0.0;
    for (const auto& e : events)
        if (const auto* f = std::get_if<FlightEvent>(&e)) s += f->length;
    return s;
}

std::optional<CollisionQuery> next_collision(const SimParams& params, const FieldView& view,
                                             const Vec3& y_phys, double volume, double t) {
    const double remaining = params.T - t;
    if (!(remaining > 0.0)) return std::nullopt;
    const double u_eff = params.u_eff();
    const double phi13 = std::cbrt(params.phi);
    const double v_max = view.source().volume_law().v_max();
    const double rho_max = contact_radius(phi13, volume, v_max);

    const Vec3 base = y_phys + Vec3{u_eff * t, 0.0, 0.0};
    const Capsule sweep{base, base + Vec3{u_eff * remaining, 0.0, 0.0}, rho_max};

    // Events closer in time than tol_t are indistinguishable at the geometric
    // tolerance; it doubles as the immediacy window for touching contacts.
    const double tol_t = params.eps_geom * std::max(1.0, remaining);

    struct TimedHit {
        double s;
        Obstacle o;
    };
    std::vector<TimedHit> hits;
    double best = std::numeric_limits<double>::infinity();
    for (const Obstacle& o : view.unconsumed_in(sweep)) {
        const double rho = contact_radius(phi13, volume, o.vol);
        const Vec3 d = o.pos - base;
        const double b = d[0];
        const double disc = b * b - (norm2(d) - rho * rho);
        // Tangential tolerance: grazing contacts (discriminant at roundoff
        // scale relative to the contact radius) are treated as misses.
        if (disc <= params.eps_geom * rho * rho) continue;
        double s = (b - std::sqrt(disc)) / u_eff;
        if (s > remaining) continue;
        if (s <= tol_t) {
            // Touching or marginally overlapping now: contact happens
            // immediately if the obstacle is on the approaching side,
            // otherwise it grazes past.
            if (b <= 0.0) continue;
            s = 0.0;
        }
        hits.push_back({s, o});
        best = std::min(best, s);
    }
    if (hits.empty()) return std::nullopt;

    CollisionQuery q;
    q.t_hit = t + best;
    for (const TimedHit& h : hits)
        if (h.s - best <= tol_t) q.cluster.push_back(h.o);
    return q;
}

CoalescenceEvent merge_cluster(const SimParams& params, FieldView& view, Vec3& y_phys,
                               double& volume, double t, std::vector<Obstacle> cluster) {
    const double phi13 = std::cbrt(params.phi);
    const double inv_phi13 = 1.0 / phi13;
    const Vec3 drift = {params.u_eff() * t, 0.0, 0.0};
    const Vec3 y_before = y_phys;
    const double v_before = volume;

    CoalescenceEvent ev;
    ev.t = t;
    while (!cluster.empty()) {
        if (ev.steps.size() >= params.max_cascade)
            throw CascadeOverflow("cascade exceeded " + std::to_string(params.max_cascade) +
                                  " steps at t=" + std::to_string(t));
        std::vector<CascadeHit> step;
        step.reserve(cluster.size());
        double sum_v = 0.0;
        Vec3 sum_vx{};
        for (const Obstacle& o : cluster) {
            const Vec3 x_eff = o.pos - drift;
            step.push_back(CascadeHit{o.id, o.vol, inv_phi13 * (x_eff - y_phys)});
            view.consume(o.id);
            sum_v += o.vol;
            sum_vx = sum_vx + o.vol * x_eff;
        }
        const double v_new = volume + sum_v;
        if (params.merge_rule == MergeRule::center_of_mass || volume <= 0.0) {
            if (v_new > 0.0) y_phys = (1.0 / v_new) * (volume * y_phys + sum_vx);
        } else {
            y_phys = (1.0 / volume) * (volume * y_phys + sum_vx);
        }
        volume = v_new;
        ev.steps.push_back(std::move(step));
        if (params.v_budget > 0.0 && volume > params.v_budget)
            throw BudgetExceeded("tagged volume " + std::to_string(volume) +
                                 " exceeded ceiling " + std::to_string(params.v_budget));
        cluster = strictly_overlapping(params, view, y_phys, volume, t);
    }
    ev.d_volume = volume - v_before;
    ev.d_y = inv_phi13 * (y_phys - y_before);
    return ev;
}

TrajectoryResult run_trajectory(const SimParams& params_in, const ObstacleSource& source) {
    params_in.validate();
    SimParams params = params_in;
    if (params.v_budget <= 0.0) params.v_budget = default_v_budget(params, source.volume_law());

    const double phi13 = std::cbrt(params.phi);
    const double u_eff = params.u_eff();
    FieldView view(&source);
    Vec3 y_phys = phi13 * params.Y0;
    double volume = params.V0;
    double t = 0.0;
    EventLog log;

    if (volume > params.v_budget)
        throw BudgetExceeded("initial volume exceeds ceiling");

    // The initial datum may already overlap obstacles; resolve before flying.
    if (auto cluster = strictly_overlapping(params, view, y_phys, volume, 0.0);
        !cluster.empty()) {
        log.events.push_back(merge_cluster(params, view, y_phys, volume, 0.0, std::move(cluster)));
    }

    while (t < params.T) {
        auto hit = next_collision(params, view, y_phys, volume, t);
        if (!hit) {
            log.events.push_back(FlightEvent{t, params.T - t, u_eff * (params.T - t), volume});
            t = params.T;
            break;
        }
        log.events.push_back(FlightEvent{t, hit->t_hit - t, u_eff * (hit->t_hit - t), volume});
        t = hit->t_hit;
        log.events.push_back(
            merge_cluster(params, view, y_phys, volume, t, std::move(hit->cluster)));
    }

    TaggedState final_state{(1.0 / phi13) * y_phys, volume, t};
    return TrajectoryResult{final_state, std::move(log)};
}

TrajectoryResult run_trajectory(const SimParams& params_in, const VolumeDistribution& dist) {
    SimParams params = params_in;
    params.validate();
    if (params.v_budget <= 0.0) params.v_budget = default_v_budget(params, dist);
    if (params.cell_side <= 0.0) params.cell_side = default_cell_side(params, dist);
    PoissonField field(FieldParams{params.seed, params.cell_side, dist, 1.0});
    return run_trajectory(params, field);
}

EnsembleResult run_ensemble(const SimParams& params, const VolumeDistribution& dist,
                            size_t n_traj, int threads) {
    EnsembleResult res;
    res.records.resize(n_traj);
    res.logs.resize(n_traj);
    res.states.resize(n_traj);
    parallel_for(n_traj, threads, [&](size_t i) {
        SimParams p = params;
        p.seed = derive_seed(params.seed, static_cast<int64_t>(i));
        TrajectoryRecord rec;
        rec.seed = p.seed;
        try {
            TrajectoryResult tr = run_trajectory(p, dist);
            rec.ok = true;
            rec.n_collisions = tr.log.n_absorbed();
            rec.n_cascade_steps = tr.log.n_cascade_steps();
            rec.n_coalescences = tr.log.n_coalescences();
            rec.n_flights = tr.log.n_flights();
            rec.v_final = tr.state.v;
            rec.y_final = tr.state.y;
            res.states[i] = tr.state;
            res.logs[i] = std::move(tr.log);
        } catch (const Error& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        res.records[i] = std::move(rec);
    });
    for (const auto& r : res.records)
        if (!r.ok) ++res.n_failed;
    return res;
}

}  // namespace ctp
