#pragma once

#include "fairtp/road_network.hpp"
#include "fairtp/types.hpp"

#include <vector>

namespace fairtp {

/// Per-sensor traffic observations over discrete time steps.
/// Row t holds the observation of every sensor at step t.
class TrafficSeries {
public:
    TrafficSeries(Matrix values, int lookback, int horizon);

    const Matrix& values() const { return values_; }
    int step_count() const { return static_cast<int>(values_.rows()); }
    int sensor_count() const { return static_cast<int>(values_.cols()); }
    int lookback() const { return lookback_; }
    int horizon() const { return horizon_; }

    /// Same observations with a different window shape.
    TrafficSeries with_windows(int lookback, int horizon) const {
        return TrafficSeries(values_, lookback, horizon);
    }

    /// Contiguous chronological slice [first, first + count).
    TrafficSeries slice(int first, int count) const;

private:
    Matrix values_;  // step_count x sensor_count
    int lookback_ = 0;
    int horizon_ = 0;
};

/// Region traffic conditions: row t holds the per-region mean at step t.
struct RegionSeries {
    Matrix values;  // step_count x region_count
};

/// Per-region mean over a block whose columns are the sensors listed in
/// `column_ids`. Compensated summation keeps the mean within 1e-12 relative
/// of the exact value. Throws if a region owns none of the columns.
Matrix region_means(const Matrix& block, const RoadNetwork& network,
                    const std::vector<SensorId>& column_ids);

/// Region means over all sensors at every time step.
RegionSeries regionalize(const TrafficSeries& series, const RoadNetwork& network);

/// Region means restricted to the sampled subset; every region must contain
/// at least one sampled sensor.
RegionSeries regionalize_subset(const TrafficSeries& series, const RoadNetwork& network,
                                const std::vector<SensorId>& sampled);

}  // namespace fairtp
