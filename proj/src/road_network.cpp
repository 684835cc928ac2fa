#include "fairtp/road_network.hpp"

#include <algorithm>

namespace fairtp {

RoadNetwork::RoadNetwork(int sensor_count, std::vector<Edge> edges,
                         std::vector<RegionId> region_of)
    : sensor_count_(sensor_count),
      region_of_(std::move(region_of)),
      edges_(std::move(edges)) {
    if (sensor_count_ <= 0) throw invalid_input("RoadNetwork: sensor_count must be positive");
    if (static_cast<int>(region_of_.size()) != sensor_count_)
        throw invalid_input("RoadNetwork: region_of must map every sensor exactly once");

    RegionId max_region = -1;
    for (RegionId r : region_of_) {
        if (r < 0) throw invalid_input("RoadNetwork: negative region id");
        max_region = std::max(max_region, r);
    }
    region_count_ = max_region + 1;

    members_.assign(static_cast<size_t>(region_count_), {});
    for (SensorId v = 0; v < sensor_count_; ++v)
        members_[static_cast<size_t>(region_of_[static_cast<size_t>(v)])].push_back(v);
    for (RegionId r = 0; r < region_count_; ++r)
        if (members_[static_cast<size_t>(r)].empty())
            throw invalid_input("RoadNetwork: region " + std::to_string(r) + " has no sensors");

    for (const Edge& e : edges_) {
        if (e.first < 0 || e.first >= sensor_count_ || e.second < 0 || e.second >= sensor_count_)
            throw invalid_input("RoadNetwork: edge references unknown sensor");
        if (e.first == e.second) throw invalid_input("RoadNetwork: self-loop edge");
    }
}

}  // namespace fairtp
