#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ctp/math.hpp"
#include "ctp/obstacle_field.hpp"
#include "ctp/volume_dist.hpp"

namespace ctp {

/// How a coalescence relocates the tagged center.
///   center_of_mass      : Y' = (V*Y + sum v_k x_k) / (V + sum v_k)
///   pre_merge_normalized: Y' = (V*Y + sum v_k x_k) / V
/// The second rule divides by the pre-merge volume only; it is not a convex
/// combination and exists so tests can demonstrate how the dynamics degrade
/// without conservation of the volume-weighted center.
enum class MergeRule { center_of_mass, pre_merge_normalized };

std::string to_string(MergeRule r);

struct SimParams {
    double phi = 1e-3;   // packing fraction, in (0,1)
    double U = 1.0;      // drift speed before rescaling, > 0
    double T = 1.0;      // horizon, > 0
    double V0 = 1.0;     // initial tagged volume, >= 0
    Vec3 Y0{};           // initial deviation (rescaled units)
    uint64_t seed = 0;
    double eps_geom = 1e-12;
    uint64_t max_cascade = 1000000;
    /// Hard ceiling on the tagged volume; 0 selects an automatic value well
    /// above the predicted growth.  Also sizes the default field cells.
    double v_budget = 0.0;
    /// Field cell side; 0 selects the automatic size.
    double cell_side = 0.0;
    MergeRule merge_rule = MergeRule::center_of_mass;

    void validate() const;  // throws ValidationError
    double u_eff() const;   // effective speed U * phi^(-2/3)
};

/// Growth-aware defaults derived from the parameters only (never from field
/// realizations), so sizing is deterministic.
double default_v_budget(const SimParams& params, const VolumeDistribution& dist);
double default_cell_side(const SimParams& params, const VolumeDistribution& dist);

struct TaggedState {
    Vec3 y{};       // deviation from the drift line, rescaled units
    double v = 0.0; // volume, rescaled units
    double t = 0.0;
};

/// One absorbed obstacle within a cascade step.  contact_offset is the
/// obstacle center relative to the tagged center at absorption time, in
/// rescaled units.
struct CascadeHit {
    ObstacleId id;
    double vol = 0.0;
    Vec3 contact_offset{};
};

struct FlightEvent {
    double t0 = 0.0;        // start time
    double duration = 0.0;  // rescaled time
    double length = 0.0;    // physical length = u_eff * duration
    double volume = 0.0;    // tagged volume during the flight
};

struct CoalescenceEvent {
    double t = 0.0;
    /// Each inner vector is one application of the merging rule; cascades
    /// append further steps until no overlap remains.
    std::vector<std::vector<CascadeHit>> steps;
    double d_volume = 0.0;
    Vec3 d_y{};  // rescaled displacement of the tagged center

    size_t absorbed() const {
        size_t n = 0;
        for (const auto& s : steps) n += s.size();
        return n;
    }
    bool is_binary() const { return steps.size() == 1 && steps[0].size() == 1; }
};

using Event = std::variant<FlightEvent, CoalescenceEvent>;

struct EventLog {
    std::vector<Event> events;

    size_t n_flights() const;
    size_t n_coalescences() const;
    size_t n_absorbed() const;
    size_t n_cascade_steps() const;
    /// True when every coalescence is a single-step, single-obstacle merge.
    bool binary_only() const;
    double total_flight_duration() const;
    double total_flight_length() const;
};

struct TrajectoryResult {
    TaggedState state;  // at the horizon
    EventLog log;
};

struct CollisionQuery {
    double t_hit = 0.0;
    /// All obstacles reaching contact within the simultaneity tolerance of
    /// t_hit; they seed the first cascade step.
    std::vector<Obstacle> cluster;
};

/// Earliest contact strictly after state.t and at or before params.T, or
/// nullopt for a collision-free remaining flight.  Touching configurations
/// (entry time within the geometric tolerance, approaching) count as
/// immediate contacts at the current time.
std::optional<CollisionQuery> next_collision(const SimParams& params, const FieldView& view,
                                             const Vec3& y_phys, double volume, double t);

/// Applies the merging rule to the cluster, then repeatedly absorbs obstacles
/// that strictly overlap the enlarged particle, all at frozen time t.
/// Updates y_phys / volume in place and returns the logged event.
CoalescenceEvent merge_cluster(const SimParams& params, FieldView& view, Vec3& y_phys,
                               double& volume, double t, std::vector<Obstacle> cluster);

TrajectoryResult run_trajectory(const SimParams& params, const ObstacleSource& source);
/// Convenience: builds the Poisson field for the params and runs.
TrajectoryResult run_trajectory(const SimParams& params, const VolumeDistribution& dist);

struct TrajectoryRecord {
    uint64_t seed = 0;
    bool ok = false;
    std::string error;  // empty when ok
    uint64_t n_collisions = 0;     // obstacles absorbed
    uint64_t n_cascade_steps = 0;  // merging-rule applications
    uint64_t n_coalescences = 0;   // contact events
    uint64_t n_flights = 0;
    double v_final = 0.0;
    Vec3 y_final{};
};

struct EnsembleResult {
    std::vector<TrajectoryRecord> records;
    /// Event logs for trajectories that completed, same indexing as records.
    std::vector<EventLog> logs;
    std::vector<TaggedState> states;
    size_t n_failed = 0;
};

/// Runs n_traj independent trajectories; trajectory i uses the field seed
/// derive_seed(params.seed, i).  Per-trajectory failures are recorded, not
/// rethrown.  Results are indexed by trajectory, independent of scheduling.
EnsembleResult run_ensemble(const SimParams& params, const VolumeDistribution& dist,
                            size_t n_traj, int threads = 1);

}  // namespace ctp
