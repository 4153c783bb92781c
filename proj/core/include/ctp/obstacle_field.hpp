#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ctp/errors.hpp"
#include "ctp/math.hpp"
#include "ctp/rng.hpp"
#include "ctp/volume_dist.hpp"

namespace ctp {

struct CellIndex {
    int64_t x = 0, y = 0, z = 0;
    bool operator==(const CellIndex&) const = default;
};

struct CellIndexHash {
    size_t operator()(const CellIndex& c) const {
        return static_cast<size_t>(derive_seed(0x632d6669656c64ULL, c.x, c.y, c.z));
    }
};

/// Stable obstacle identity: owning cell plus the index within that cell's
/// materialization order.  Scripted fields use cell (0,0,0) and a running
/// local index.
struct ObstacleId {
    CellIndex cell;
    uint32_t local = 0;
    bool operator==(const ObstacleId&) const = default;
};

struct ObstacleIdHash {
    size_t operator()(const ObstacleId& id) const {
        return static_cast<size_t>(
            derive_seed(CellIndexHash{}(id.cell), static_cast<int64_t>(id.local)));
    }
};

struct Obstacle {
    ObstacleId id;
    Vec3 pos{};    // center, physical coordinates
    double vol = 0.0;  // rescaled volume mark
};

/// Swept-sphere query region: all points within `radius` of the segment
/// [p0, p1].  A degenerate segment (p0 == p1) is a ball.
struct Capsule {
    Vec3 p0{}, p1{};
    double radius = 0.0;
};

double distance_to_segment(const Vec3& q, const Vec3& p0, const Vec3& p1);
bool capsule_contains(const Capsule& c, const Vec3& q);

struct FieldParams {
    uint64_t seed = 0;
    double cell_side = 1.0;           // > 0
    VolumeDistribution dist = VolumeDistribution::dirac(1.0);
    double intensity = 1.0;           // expected obstacle count per unit volume
};

/// Materializes one cell of the Poisson field: count ~ Poisson(intensity *
/// cell_side^3), centers uniform in the cell, volumes i.i.d. from the law.
/// Pure function of (params, cell): every call yields the identical list, in
/// a fixed draw order (count, then per obstacle x, y, z, volume).
std::vector<Obstacle> materialize_cell(const FieldParams& params, const CellIndex& cell);

/// Source of obstacles for a trajectory.  Implementations must be
/// deterministic: the set returned for a region depends only on construction
/// parameters and the region, never on query history or thread interleaving.
class ObstacleSource {
public:
    virtual ~ObstacleSource() = default;
    /// All obstacles whose centers lie in the region, in a fixed canonical
    /// order (lexicographic cell, then local index).
    virtual std::vector<Obstacle> obstacles_in(const Capsule& region) const = 0;
    virtual const VolumeDistribution& volume_law() const = 0;
};

/// Homogeneous Poisson obstacle field materialized lazily cell by cell.
/// The cell cache is shared and guarded; first writer wins, and since
/// materialize_cell is pure, concurrent fills agree bit for bit.
class PoissonField : public ObstacleSource {
public:
    explicit PoissonField(FieldParams params);

    std::vector<Obstacle> obstacles_in(const Capsule& region) const override;
    const VolumeDistribution& volume_law() const override { return params_.dist; }
    const FieldParams& params() const { return params_; }

    /// Cells already materialized (for reporting / memory accounting).
    size_t cells_materialized() const;

private:
    const std::vector<Obstacle>& cell(const CellIndex& c) const;

    FieldParams params_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<CellIndex, std::vector<Obstacle>, CellIndexHash> cache_;
};

/// Fixed, explicit obstacle list; used for scripted scenes and tests.
class ScriptedField : public ObstacleSource {
public:
    ScriptedField(std::vector<Obstacle> obstacles, VolumeDistribution law);
    /// Convenience: assigns ids (cell {0,0,0}, running local index).
    static ScriptedField from_points(const std::vector<Vec3>& centers,
                                     const std::vector<double>& volumes,
                                     VolumeDistribution law);

    std::vector<Obstacle> obstacles_in(const Capsule& region) const override;
    const VolumeDistribution& volume_law() const override { return law_; }

private:
    std::vector<Obstacle> obstacles_;
    VolumeDistribution law_;
};

/// Per-trajectory view over a source: filters out already-absorbed obstacles
/// and owns the consumed set.
class FieldView {
public:
    explicit FieldView(const ObstacleSource* source) : source_(source) {}

    std::vector<Obstacle> unconsumed_in(const Capsule& region) const;
    void consume(const ObstacleId& id);
    bool is_consumed(const ObstacleId& id) const { return consumed_.count(id) != 0; }
    size_t consumed_count() const { return consumed_.size(); }
    const ObstacleSource& source() const { return *source_; }

private:
    const ObstacleSource* source_;
    std::unordered_set<ObstacleId, ObstacleIdHash> consumed_;
};

}  // namespace ctp
