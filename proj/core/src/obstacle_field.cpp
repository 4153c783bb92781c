#include "ctp/obstacle_field.hpp"

#include <algorithm>
#include <cmath>

namespace ctp {

double distance_to_segment(const Vec3& q, const Vec3& p0, const Vec3& p1) {
    const Vec3 d = p1 - p0;
    const double len2 = norm2(d);
    if (len2 == 0.0) return norm(q - p0);
    const double t = std::clamp(dot(q - p0, d) / len2, 0.0, 1.0);
    return norm(q - (p0 + t * d));
}

bool capsule_contains(const Capsule& c, const Vec3& q) {
    return distance_to_segment(q, c.p0, c.p1) <= c.radius;
}

std::vector<Obstacle> materialize_cell(const FieldParams& params, const CellIndex& cell) {
    const double side = params.cell_side;
    Rng rng(derive_seed(params.seed, cell.x, cell.y, cell.z));
    const double mean = params.intensity * side * side * side;
    const uint64_t count = rng.poisson(mean);
    std::vector<Obstacle> out;
    out.reserve(count);
    const Vec3 origin = {static_cast<double>(cell.x) * side, static_cast<double>(cell.y) * side,
                         static_cast<double>(cell.z) * side};
    for (uint64_t i = 0; i < count; ++i) {
        Obstacle o;
        o.id = ObstacleId{cell, static_cast<uint32_t>(i)};
        o.pos = {origin[0] + side * rng.uniform(), origin[1] + side * rng.uniform(),
                 origin[2] + side * rng.uniform()};
        o.vol = params.dist.sample(rng.uniform());
        out.push_back(o);
    }
    return out;
}

PoissonField::PoissonField(FieldParams params) : params_(std::move(params)) {
    if (!(params_.cell_side > 0.0))
        throw ValidationError("field.cell_side", "cell side must be positive");
    if (!(params_.intensity > 0.0))
        throw ValidationError("field.intensity", "intensity must be positive");
}

const std::vector<Obstacle>& PoissonField::cell(const CellIndex& c) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(c);
        if (it != cache_.end()) return it->second;
    }
    // Materialize outside the lock; first writer wins and all writers agree.
    std::vector<Obstacle> fresh = materialize_cell(params_, c);
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = cache_.emplace(c, std::move(fresh));
    return it->second;
}

size_t PoissonField::cells_materialized() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

std::vector<Obstacle> PoissonField::obstacles_in(const Capsule& region) const {
    const double side = params_.cell_side;
    const double pad = region.radius;
    const Vec3 lo = {std::min(region.p0[0], region.p1[0]) - pad,
                     std::min(region.p0[1], region.p1[1]) - pad,
                     std::min(region.p0[2], region.p1[2]) - pad};
    const Vec3 hi = {std::max(region.p0[0], region.p1[0]) + pad,
                     std::max(region.p0[1], region.p1[1]) + pad,
                     std::max(region.p0[2], region.p1[2]) + pad};
    const auto cell_floor = [side](double v) {
        return static_cast<int64_t>(std::floor(v / side));
    };
    std::vector<Obstacle> out;
    // Fixed lexicographic cell scan makes the output order canonical
    // regardless of how the caller decomposes its queries.
    for (int64_t cx = cell_floor(lo[0]); cx <= cell_floor(hi[0]); ++cx) {
        for (int64_t cy = cell_floor(lo[1]); cy <= cell_floor(hi[1]); ++cy) {
            for (int64_t cz = cell_floor(lo[2]); cz <= cell_floor(hi[2]); ++cz) {
                for (const Obstacle& o : cell(CellIndex{cx, cy, cz})) {
                    if (capsule_contains(region, o.pos)) out.push_back(o);
                }
            }
        }
    }
    return out;
}

ScriptedField::ScriptedField(std::vector<Obstacle> obstacles, VolumeDistribution law)
    : obstacles_(std::move(obstacles)), law_(std::move(law)) {}

ScriptedField ScriptedField::from_points(const std::vector<Vec3>& centers,
                                         const std::vector<double>& volumes,
                                         VolumeDistribution law) {
    if (centers.size() != volumes.size())
        throw ValidationError("field.scripted", "centers/volumes size mismatch");
    std::vector<Obstacle> obs(centers.size());
    for (size_t i = 0; i < centers.size(); ++i) {
        obs[i].id = ObstacleId{CellIndex{0, 0, 0}, static_cast<uint32_t>(i)};
        obs[i].pos = centers[i];
        obs[i].vol = volumes[i];
    }
    return ScriptedField(std::move(obs), std::move(law));
}

std::vector<Obstacle> ScriptedField::obstacles_in(const Capsule& region) const {
    std::vector<Obstacle> out;
    for (const Obstacle& o : obstacles_) {
        if (capsule_contains(region, o.pos)) out.push_back(o);
    }
    return out;
}

std::vector<Obstacle> FieldView::unconsumed_in(const Capsule& region) const {
    std::vector<Obstacle> all = source_->obstacles_in(region);
    std::erase_if(all, [this](const Obstacle& o) { return consumed_.count(o.id) != 0; });
    return all;
}

void FieldView::consume(const ObstacleId& id) {
    if (!consumed_.insert(id).second)
        throw DoubleConsume("obstacle consumed twice (cell " + std::to_string(id.cell.x) + "," +
                            std::to_string(id.cell.y) + "," + std::to_string(id.cell.z) +
                            " local " + std::to_string(id.local) + ")");
}

}  // namespace ctp
