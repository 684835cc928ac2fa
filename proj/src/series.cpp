#include "fairtp/series.hpp"

#include "fairtp/numeric.hpp"

#include <numeric>

namespace fairtp {

TrafficSeries::TrafficSeries(Matrix values, int lookback, int horizon)
    : values_(std::move(values)), lookback_(lookback), horizon_(horizon) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw invalid_input("TrafficSeries: values must be non-empty");
    if (!values_.allFinite()) throw invalid_input("TrafficSeries: non-finite observation");
    if (lookback_ < 1 || horizon_ < 1)
        throw invalid_input("TrafficSeries: lookback and horizon must be positive");
    if (lookback_ + horizon_ > step_count())
        throw invalid_input("TrafficSeries: lookback + horizon exceeds step count");
}

TrafficSeries TrafficSeries::slice(int first, int count) const {
    if (first < 0 || count < 1 || first + count > step_count())
        throw invalid_input("TrafficSeries::slice: range out of bounds");
    return TrafficSeries(values_.middleRows(first, count), lookback_, horizon_);
}

Matrix region_means(const Matrix& block, const RoadNetwork& network,
                    const std::vector<SensorId>& column_ids) {
    if (static_cast<int>(column_ids.size()) != block.cols())
        throw invalid_input("region_means: column_ids does not match block width");

    const int m = network.region_count();
    std::vector<std::vector<int>> region_columns(static_cast<size_t>(m));
    for (int c = 0; c < block.cols(); ++c) {
        const SensorId v = column_ids[static_cast<size_t>(c)];
        if (v < 0 || v >= network.sensor_count())
            throw invalid_input("region_means: unknown sensor id " + std::to_string(v));
        region_columns[static_cast<size_t>(network.region_of(v))].push_back(c);
    }
    for (RegionId r = 0; r < m; ++r)
        if (region_columns[static_cast<size_t>(r)].empty())
            throw invalid_input("region_means: region " + std::to_string(r) +
                                " has no sampled sensor");

    Matrix out(block.rows(), m);
    for (RegionId r = 0; r < m; ++r) {
        const auto& cols = region_columns[static_cast<size_t>(r)];
        const Scalar inv = Scalar(1) / static_cast<Scalar>(cols.size());
        for (Eigen::Index t = 0; t < block.rows(); ++t) {
            const Scalar sum = compensated_sum(
                static_cast<Eigen::Index>(cols.size()),
                [&](Eigen::Index k) { return block(t, cols[static_cast<size_t>(k)]); });
            out(t, r) = sum * inv;
        }
    }
    return out;
}

RegionSeries regionalize(const TrafficSeries& series, const RoadNetwork& network) {
    std::vector<SensorId> all(static_cast<size_t>(series.sensor_count()));
    std::iota(all.begin(), all.end(), 0);
    return regionalize_subset(series, network, all);
}

RegionSeries regionalize_subset(const TrafficSeries& series, const RoadNetwork& network,
                                const std::vector<SensorId>& sampled) {
    if (series.sensor_count() != network.sensor_count())
        throw invalid_input("regionalize: series and network disagree on sensor count");
    Matrix sub(series.step_count(), static_cast<Eigen::Index>(sampled.size()));
    for (size_t c = 0; c < sampled.size(); ++c) {
        const SensorId v = sampled[c];
        if (v < 0 || v >= series.sensor_count())
            throw invalid_input("regionalize_subset: unknown sensor id " + std::to_string(v));
        sub.col(static_cast<Eigen::Index>(c)) = series.values().col(v);
    }
    return RegionSeries{region_means(sub, network, sampled)};
}

}  // namespace fairtp
