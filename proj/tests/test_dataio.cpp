#include "fairtp/dataio.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace fairtp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "fairtp_dataio_test";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.regions = {{3, 50.0, 10.0, 12.0, 0.0, 1.0, 1}, {2, 30.0, 5.0, 12.0, 1.0, 2.0, 2}};
    spec.steps = 40;
    spec.seed = 3;
    return spec;
}

}  // namespace

TEST_SUITE("dataio") {
    TEST_CASE("the default city is two dense and two sparse regions") {
        const SyntheticSpec spec = SyntheticSpec::default_city();
        REQUIRE(spec.regions.size() == 4);
        CHECK(spec.steps == 2016);
        int total = 0;
        for (const RegionSpec& r : spec.regions) total += r.size;
        CHECK(total == 84);
        CHECK(sparse_regions(spec) == std::vector<RegionId>{2, 3});
    }

    TEST_CASE("generation is deterministic and shaped by its SyntheticSpec") {
        const SyntheticSpec spec = small_spec();
        const Dataset a = generate(spec, 4, 2);
        const Dataset b = generate(spec, 4, 2);
        CHECK(a.series.step_count() == 40);
        CHECK(a.series.sensor_count() == 5);
        CHECK(a.network.region_count() == 2);
        CHECK(a.network.region_size(0) == 3);
        CHECK((a.series.values() - b.series.values()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.series.values().minCoeff() >= 0.0);
        // chain edges inside each region
        CHECK(a.network.edges().size() == 3);

        SyntheticSpec other = spec;
        other.seed = 4;
        const Dataset c = generate(other, 4, 2);
        CHECK((a.series.values() - c.series.values()).cwiseAbs().maxCoeff() > 0.0);

        SyntheticSpec bad = spec;
        bad.regions[0].size = 0;
        CHECK_THROWS_AS(generate(bad, 4, 2), invalid_input);
    }

    TEST_CASE("chronological split floors train and validation") {
        Matrix values = Matrix::Constant(100, 2, 1.0);
        const TrafficSeries series(values, 3, 2);
        const SplitSeries parts = split(series, 0.6, 0.2);
        CHECK(parts.train.step_count() == 60);
        CHECK(parts.validation.step_count() == 20);
        CHECK(parts.test.step_count() == 20);

        Matrix longer = Matrix::Constant(101, 2, 1.0);
        const SplitSeries odd = split(TrafficSeries(longer, 3, 2), 0.6, 0.2);
        CHECK(odd.train.step_count() == 60);
        CHECK(odd.validation.step_count() == 20);
        CHECK(odd.test.step_count() == 21);

        Matrix tiny = Matrix::Constant(12, 2, 1.0);
        CHECK_THROWS_AS(split(TrafficSeries(tiny, 3, 2), 0.6, 0.2), data_error);
        CHECK_THROWS_AS(split(series, 0.8, 0.2), invalid_input);
    }

    TEST_CASE("split keeps the chronology") {
        Matrix values(20, 1);
        for (int t = 0; t < 20; ++t) values(t, 0) = t;
        const SplitSeries parts = split(TrafficSeries(values, 2, 2), 0.6, 0.2);
        CHECK(parts.train.values()(0, 0) == 0.0);
        CHECK(parts.validation.values()(0, 0) == 12.0);
        CHECK(parts.test.values()(0, 0) == 16.0);
    }

    TEST_CASE("csv round trip preserves every value") {
        const fs::path dir = temp_dir();
        const Dataset original = generate(small_spec(), 4, 2);
        const std::string series_path = (dir / "series.csv").string();
        const std::string partition_path = (dir / "partition.csv").string();
        write_series_csv(series_path, original.series.values());
        write_partition_csv(partition_path, original.network);

        const Dataset loaded = ingest_csv(series_path, partition_path, 4, 2);
        CHECK(loaded.series.step_count() == original.series.step_count());
        CHECK((loaded.series.values() - original.series.values()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(loaded.network.regions() == original.network.regions());
    }

    TEST_CASE("series errors carry the line and cell") {
        const fs::path dir = temp_dir();
        const std::string partition = (dir / "ok_partition.csv").string();
        write_file(partition, "sensor_id,region_id\n0,0\n1,0\n");

        const std::string ragged = (dir / "ragged.csv").string();
        write_file(ragged, "1.0,2.0\n3.0\n");
        CHECK_THROWS_WITH_AS(ingest_csv(ragged, partition, 1, 1),
                             doctest::Contains("line 2"), data_error);

        const std::string alpha = (dir / "alpha.csv").string();
        write_file(alpha, "1.0,2.0\n3.0,x\n");
        CHECK_THROWS_WITH_AS(ingest_csv(alpha, partition, 1, 1),
                             doctest::Contains("line 2 cell 2"), data_error);

        CHECK_THROWS_AS(ingest_csv((dir / "absent.csv").string(), partition, 1, 1), data_error);
    }

    TEST_CASE("partition errors name the sensor") {
        const fs::path dir = temp_dir();
        const std::string series = (dir / "two_sensors.csv").string();
        write_file(series, "1.0,2.0\n3.0,4.0\n5.0,6.0\n");

        const std::string missing = (dir / "missing.csv").string();
        write_file(missing, "sensor_id,region_id\n0,0\n");
        CHECK_THROWS_WITH_AS(ingest_csv(series, missing, 1, 1),
                             doctest::Contains("sensor 1 is missing"), data_error);

        const std::string duplicate = (dir / "duplicate.csv").string();
        write_file(duplicate, "sensor_id,region_id\n0,0\n0,1\n1,0\n");
        CHECK_THROWS_WITH_AS(ingest_csv(series, duplicate, 1, 1),
                             doctest::Contains("duplicate sensor 0"), data_error);

        const std::string unknown = (dir / "unknown.csv").string();
        write_file(unknown, "sensor_id,region_id\n0,0\n7,1\n");
        CHECK_THROWS_WITH_AS(ingest_csv(series, unknown, 1, 1),
                             doctest::Contains("sensor 7"), data_error);

        const std::string headerless = (dir / "headerless.csv").string();
        write_file(headerless, "0,0\n1,0\n");
        CHECK_THROWS_WITH_AS(ingest_csv(series, headerless, 1, 1),
                             doctest::Contains("header"), data_error);

        const std::string gap = (dir / "gap.csv").string();
        write_file(gap, "sensor_id,region_id\n0,0\n1,2\n");
        CHECK_THROWS_AS(ingest_csv(series, gap, 1, 1), data_error);  // region 1 empty
    }
}
