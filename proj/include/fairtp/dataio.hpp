#pragma once

#include "fairtp/road_network.hpp"
#include "fairtp/series.hpp"
#include "fairtp/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fairtp {

/// One region of a synthetic city: a daily sinusoid around an offset, plus
/// Gaussian noise, shared by `size` sensors. `tier` 1 marks dense urban
/// regions, 2 marks sparse outskirts; evaluation groups report by tier.
struct RegionSpec {
    int size = 0;
    Scalar offset = 50.0;
    Scalar amplitude = 15.0;
    Scalar period = 288.0;
    Scalar phase = 0.0;
    Scalar noise_sigma = 2.0;
    int tier = 1;
};

struct SyntheticSpec {
    std::vector<RegionSpec> regions;
    int steps = 2016;
    /// Each sensor scales its region's curve by a fixed gain drawn uniformly
    /// from [gain_low, gain_high].
    Scalar gain_low = 0.8;
    Scalar gain_high = 1.2;
    std::uint64_t seed = 7;

    /// Two dense regions and two sparse, noisier ones; 84 sensors over a
    /// week of 5-minute steps.
    static SyntheticSpec default_city();
};

struct Dataset {
    RoadNetwork network;
    TrafficSeries series;
};

/// Deterministic synthetic city: per-sensor gains are drawn first in sensor
/// order, then noise row-major over (step, sensor). Values are floored at 0.
Dataset generate(const SyntheticSpec& spec, int lookback, int horizon);

/// Regions with tier >= 2, ascending.
std::vector<RegionId> sparse_regions(const SyntheticSpec& spec);

struct SplitSeries {
    TrafficSeries train;
    TrafficSeries validation;
    TrafficSeries test;
};

/// Chronological split; train and validation lengths are floored, the test
/// segment takes the remainder. Every segment must fit at least one window.
SplitSeries split(const TrafficSeries& series, Scalar train_ratio, Scalar validation_ratio);

/// Series CSV: headerless wide matrix, rows = time steps, columns = sensors
/// in id order. Values are written shortest-round-trip so ingest reproduces
/// them bit-exactly.
void write_series_csv(const std::string& path, const Matrix& values);

/// Partition CSV: "sensor_id,region_id" header plus one row per sensor.
void write_partition_csv(const std::string& path, const RoadNetwork& network);

/// Load a series/partition CSV pair. Malformed input raises data_error with
/// the file, line, and offending cell.
Dataset ingest_csv(const std::string& series_path, const std::string& partition_path,
                   int lookback, int horizon);

}  // namespace fairtp
