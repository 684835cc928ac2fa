#include "fairtp/dataio.hpp"

#include "fairtp/numeric.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string_view>
#include <system_error>

namespace fairtp {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error(path + ": cannot open");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw data_error(path + ": empty file");
    return lines;
}

std::vector<std::string_view> split_cells(const std::string& line) {
    std::vector<std::string_view> cells;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.emplace_back(line.data() + start, line.size() - start);
            return cells;
        }
        cells.emplace_back(line.data() + start, comma - start);
        start = comma + 1;
    }
}

std::string cell_context(const std::string& path, size_t line_no, size_t cell_no) {
    return path + " line " + std::to_string(line_no) + " cell " + std::to_string(cell_no);
}

long parse_int(std::string_view cell, const std::string& where) {
    long value = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw data_error(where + ": not an integer: '" + std::string(cell) + "'");
    return value;
}

Scalar parse_number(std::string_view cell, const std::string& where) {
    Scalar value = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw data_error(where + ": not a number: '" + std::string(cell) + "'");
    if (!std::isfinite(value)) throw data_error(where + ": non-finite value");
    return value;
}

void append_number(std::string& out, Scalar v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw data_error("cannot format value");
    out.append(buf, ptr);
}

}  // namespace

SyntheticSpec SyntheticSpec::default_city() {
    SyntheticSpec spec;
    spec.regions = {
        {40, 55.0, 20.0, 288.0, 0.0, 2.0, 1},
        {30, 50.0, 25.0, 288.0, 1.3, 2.0, 1},
        {8, 40.0, 12.0, 144.0, 2.1, 4.0, 2},
        {6, 35.0, 10.0, 336.0, 4.0, 4.0, 2},
    };
    spec.steps = 2016;
    spec.seed = 7;
    return spec;
}

Dataset generate(const SyntheticSpec& spec, int lookback, int horizon) {
    if (spec.regions.empty()) throw invalid_input("generate: no regions");
    if (spec.steps < 1) throw invalid_input("generate: steps must be positive");
    if (!(spec.gain_low > 0.0) || spec.gain_high < spec.gain_low)
        throw invalid_input("generate: need 0 < gain_low <= gain_high");
    int total = 0;
    for (const RegionSpec& r : spec.regions) {
        if (r.size < 1) throw invalid_input("generate: region size must be positive");
        if (!(r.period > 0.0)) throw invalid_input("generate: period must be positive");
        if (r.noise_sigma < 0.0) throw invalid_input("generate: negative noise");
        if (r.tier < 1) throw invalid_input("generate: tier must be at least 1");
        total += r.size;
    }

    std::vector<RegionId> region_of(static_cast<size_t>(total));
    std::vector<RoadNetwork::Edge> edges;
    int v = 0;
    for (size_t r = 0; r < spec.regions.size(); ++r) {
        for (int k = 0; k < spec.regions[r].size; ++k, ++v) {
            region_of[static_cast<size_t>(v)] = static_cast<RegionId>(r);
            if (k > 0) edges.push_back({v - 1, v});
        }
    }

    std::mt19937_64 rng(spec.seed);
    Vector gains(total);
    for (int s = 0; s < total; ++s)
        gains(s) = spec.gain_low + uniform01(rng) * (spec.gain_high - spec.gain_low);

    GaussianSource gauss;
    Matrix values(spec.steps, total);
    for (int t = 0; t < spec.steps; ++t) {
        for (int s = 0; s < total; ++s) {
            const RegionSpec& r = spec.regions[static_cast<size_t>(region_of[static_cast<size_t>(s)])];
            const Scalar curve =
                r.offset + r.amplitude * std::sin(2.0 * std::numbers::pi_v<Scalar> *
                                                      static_cast<Scalar>(t) / r.period +
                                                  r.phase);
            const Scalar noise = r.noise_sigma * gauss.next(rng);
            values(t, s) = std::max<Scalar>(0.0, gains(s) * curve + noise);
        }
    }

    return Dataset{RoadNetwork(total, std::move(edges), std::move(region_of)),
                   TrafficSeries(std::move(values), lookback, horizon)};
}

std::vector<RegionId> sparse_regions(const SyntheticSpec& spec) {
    std::vector<RegionId> out;
    for (size_t r = 0; r < spec.regions.size(); ++r)
        if (spec.regions[r].tier >= 2) out.push_back(static_cast<RegionId>(r));
    return out;
}

SplitSeries split(const TrafficSeries& series, Scalar train_ratio, Scalar validation_ratio) {
    if (!(train_ratio > 0.0) || !(validation_ratio > 0.0) ||
        !(train_ratio + validation_ratio < 1.0))
        throw invalid_input("split: ratios must be positive and sum below 1");
    const int n = series.step_count();
    const int n_train = static_cast<int>(std::floor(train_ratio * n));
    const int n_val = static_cast<int>(std::floor(validation_ratio * n));
    const int n_test = n - n_train - n_val;
    const int min_steps = series.lookback() + series.horizon();
    if (n_train < min_steps || n_val < min_steps || n_test < min_steps)
        throw data_error("split: a segment is too short for one window");
    return SplitSeries{series.slice(0, n_train), series.slice(n_train, n_val),
                       series.slice(n_train + n_val, n_test)};
}

void write_series_csv(const std::string& path, const Matrix& values) {
    if (values.rows() < 1 || values.cols() < 1) throw invalid_input("write_series_csv: empty");
    std::string out;
    for (Eigen::Index t = 0; t < values.rows(); ++t) {
        for (Eigen::Index s = 0; s < values.cols(); ++s) {
            if (s > 0) out.push_back(',');
            append_number(out, values(t, s));
        }
        out.push_back('\n');
    }
    std::ofstream file(path);
    if (!file) throw data_error(path + ": cannot open for writing");
    file << out;
    if (!file) throw data_error(path + ": write failed");
}

void write_partition_csv(const std::string& path, const RoadNetwork& network) {
    std::ofstream file(path);
    if (!file) throw data_error(path + ": cannot open for writing");
    file << "sensor_id,region_id\n";
    for (SensorId v = 0; v < network.sensor_count(); ++v)
        file << v << ',' << network.region_of(v) << '\n';
    if (!file) throw data_error(path + ": write failed");
}

Dataset ingest_csv(const std::string& series_path, const std::string& partition_path,
                   int lookback, int horizon) {
    // Series: headerless wide matrix, one row per time step.
    const std::vector<std::string> series_lines = read_lines(series_path);
    const size_t sensor_total = split_cells(series_lines[0]).size();
    Matrix values(static_cast<Eigen::Index>(series_lines.size()),
                  static_cast<Eigen::Index>(sensor_total));
    for (size_t ln = 0; ln < series_lines.size(); ++ln) {
        const auto cells = split_cells(series_lines[ln]);
        if (cells.size() != sensor_total)
            throw data_error(series_path + " line " + std::to_string(ln + 1) + ": expected " +
                             std::to_string(sensor_total) + " cells, got " +
                             std::to_string(cells.size()));
        for (size_t j = 0; j < cells.size(); ++j)
            values(static_cast<Eigen::Index>(ln), static_cast<Eigen::Index>(j)) =
                parse_number(cells[j], cell_context(series_path, ln + 1, j + 1));
    }

    const std::vector<std::string> part_lines = read_lines(partition_path);
    if (part_lines[0] != "sensor_id,region_id")
        throw data_error(partition_path + " line 1: expected header sensor_id,region_id");
    std::vector<RegionId> region_of(sensor_total, -1);
    for (size_t ln = 1; ln < part_lines.size(); ++ln) {
        const auto cells = split_cells(part_lines[ln]);
        if (cells.size() != 2)
            throw data_error(partition_path + " line " + std::to_string(ln + 1) +
                             ": expected sensor_id,region_id");
        const long id = parse_int(cells[0], cell_context(partition_path, ln + 1, 1));
        const long region = parse_int(cells[1], cell_context(partition_path, ln + 1, 2));
        if (id < 0 || id >= static_cast<long>(sensor_total))
            throw data_error(partition_path + " line " + std::to_string(ln + 1) + ": sensor " +
                             std::to_string(id) + " is not a series column (the series has " +
                             std::to_string(sensor_total) + ")");
        if (region_of[static_cast<size_t>(id)] != -1)
            throw data_error(partition_path + " line " + std::to_string(ln + 1) +
                             ": duplicate sensor " + std::to_string(id));
        region_of[static_cast<size_t>(id)] = static_cast<RegionId>(region);
    }
    for (size_t v = 0; v < sensor_total; ++v)
        if (region_of[v] == -1)
            throw data_error(partition_path + ": sensor " + std::to_string(v) +
                             " is missing from the partition");

    try {
        return Dataset{RoadNetwork(static_cast<int>(sensor_total), {}, std::move(region_of)),
                       TrafficSeries(std::move(values), lookback, horizon)};
    } catch (const invalid_input& e) {
        throw data_error(series_path + ": " + e.what());
    }
}

}  // namespace fairtp
