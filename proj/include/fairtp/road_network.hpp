#pragma once

#include "fairtp/types.hpp"

#include <utility>
#include <vector>

namespace fairtp {

/// Sensor graph plus the city partition. Sensor and region ids are dense
/// 0-based integers assigned at ingestion in file order; immutable after
/// construction.
class RoadNetwork {
public:
    using Edge = std::pair<SensorId, SensorId>;

    /// Validates: region ids contiguous from 0 with no empty region, edges
    /// reference existing sensors and contain no self-loops.
    RoadNetwork(int sensor_count, std::vector<Edge> edges, std::vector<RegionId> region_of);

    int sensor_count() const { return sensor_count_; }
    int region_count() const { return region_count_; }

    RegionId region_of(SensorId v) const { return region_of_[static_cast<size_t>(v)]; }
    const std::vector<RegionId>& regions() const { return region_of_; }

    /// Member sensors of region r, ascending by id.
    const std::vector<SensorId>& members(RegionId r) const {
        return members_[static_cast<size_t>(r)];
    }
    int region_size(RegionId r) const {
        return static_cast<int>(members_[static_cast<size_t>(r)].size());
    }

    const std::vector<Edge>& edges() const { return edges_; }

private:
    int sensor_count_ = 0;
    int region_count_ = 0;
    std::vector<RegionId> region_of_;
    std::vector<std::vector<SensorId>> members_;
    std::vector<Edge> edges_;
};

}  // namespace fairtp
