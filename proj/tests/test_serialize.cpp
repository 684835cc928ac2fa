#include "fairtp/serialize.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

using namespace fairtp;

TEST_SUITE("serialize") {
    TEST_CASE("training config round trip") {
        TrainingConfig config;
        config.n_sam = 48;
        config.t_d = 4;
        config.lambda1 = 0.02;
        config.no_static = true;
        config.counts_source = RegionCountsSource::previous_round;
        config.seed = 99;
        const TrainingConfig back = training_config_from_json(to_json(config));
        CHECK(back.n_sam == 48);
        CHECK(back.t_d == 4);
        CHECK(back.lambda1 == doctest::Approx(0.02));
        CHECK(back.no_static);
        CHECK_FALSE(back.no_dynamic);
        CHECK(back.counts_source == RegionCountsSource::previous_round);
        CHECK(back.seed == 99);
    }

    TEST_CASE("unknown config fields are named in the error") {
        Json doc;
        doc["N_sam"] = 10;
        doc["n_sam"] = 10;  // wrong spelling must be rejected, not ignored
        CHECK_THROWS_WITH_AS(training_config_from_json(doc), doctest::Contains("'n_sam'"),
                             config_error);

        Json typed;
        typed["epochs"] = "twenty";
        CHECK_THROWS_WITH_AS(training_config_from_json(typed), doctest::Contains("epochs"),
                             config_error);

        Json bad_source;
        bad_source["region_counts_source"] = "latest";
        CHECK_THROWS_AS(training_config_from_json(bad_source), config_error);
    }

    TEST_CASE("missing fields keep their defaults") {
        Json doc;
        doc["T_d"] = 5;
        const TrainingConfig config = training_config_from_json(doc);
        CHECK(config.t_d == 5);
        CHECK(config.n_sam == 200);
        CHECK(config.lambda2 == doctest::Approx(0.1));
    }

    TEST_CASE("invalid values fail validation with the field name") {
        Json doc;
        doc["T_d"] = 0;
        CHECK_THROWS_WITH_AS(training_config_from_json(doc), doctest::Contains("T_d"),
                             config_error);
    }

    TEST_CASE("synthetic spec round trip") {
        const SyntheticSpec spec = SyntheticSpec::default_city();
        const SyntheticSpec back = synthetic_spec_from_json(to_json(spec));
        REQUIRE(back.regions.size() == spec.regions.size());
        CHECK(back.regions[2].tier == 2);
        CHECK(back.regions[1].phase == doctest::Approx(spec.regions[1].phase));
        CHECK(back.steps == spec.steps);
        CHECK(back.seed == spec.seed);

        Json doc = to_json(spec);
        doc["regions"][0]["sigma"] = 1.0;
        CHECK_THROWS_WITH_AS(synthetic_spec_from_json(doc), doctest::Contains("'sigma'"),
                             config_error);
    }

    TEST_CASE("schedule serialization is a bare array") {
        const ThresholdSchedule schedule({0.5, 0.25});
        const Json doc = to_json(schedule);
        REQUIRE(doc.is_array());
        CHECK(doc.size() == 2);
        const ThresholdSchedule back = schedule_from_json(doc);
        CHECK(back.at(1) == doctest::Approx(0.25));
        CHECK_THROWS_AS(schedule_from_json(Json::object()), config_error);
        CHECK_THROWS_AS(schedule_from_json(Json::array()), config_error);
    }

    TEST_CASE("checkpoint round trip is exact") {
        ReferencePredictor model = ReferencePredictor::seeded(4, 3, 5, 11);
        Discriminator disc = Discriminator::zeros(5, 0.25);
        disc.weights << 0.1, -0.2, 0.3, -0.4, 0.5;
        disc.bias = 0.125;
        Normalization norm{42.5, 7.25};
        const Json doc = checkpoint_to_json(model, disc, {1, 4, 6}, norm);
        const Checkpoint back = checkpoint_from_json(doc);
        CHECK((back.predictor.w_in - model.w_in).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.predictor.b_out - model.b_out).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.discriminator.weights - disc.weights).cwiseAbs().maxCoeff() == 0.0);
        CHECK(back.discriminator.bias == disc.bias);
        CHECK(back.discriminator.learning_rate == 0.25);
        CHECK(back.sampled == std::vector<SensorId>{1, 4, 6});
        CHECK(back.normalization.mean == 42.5);
        CHECK(back.normalization.std == 7.25);

        Json broken = doc;
        broken["predictor"].erase("w_in");
        CHECK_THROWS_AS(checkpoint_from_json(broken), data_error);
        Json wrong_version = doc;
        wrong_version["format_version"] = 2;
        CHECK_THROWS_AS(checkpoint_from_json(wrong_version), data_error);
    }

    TEST_CASE("reports and csv tables are shaped for plotting") {
        FairnessReport report;
        AccuracySummary r0{1.0, 2.0, 0.1, 3};
        AccuracySummary r1{2.0, 3.0, 0.3, 0};
        report.per_region[0] = r0;
        report.per_region[1] = r1;
        report.per_sensor[4] = r0;
        report.rsf_loss = 0.2;
        report.sdf_loss = 0.5;
        report.loss_components = {1.5, 0.2, 0.5, 0.7, 1.552};

        const Json doc = to_json(report);
        CHECK(doc["per_region"]["1"]["mape"] == 0.3);
        CHECK(doc["per_sensor"]["4"]["masked"] == 3);
        CHECK(doc["loss"]["total"] == 1.552);

        const std::string csv = regions_csv(report);
        CHECK(csv.find("region,mae,rmse,mape,masked\n") == 0);
        CHECK(csv.find("\n0,1,2,0.1,3\n") != std::string::npos);

        SweepRow row;
        row.value = 3;
        row.seed = 11;
        row.test = report;
        const std::string table = sweep_csv({row});
        CHECK(table.find("value,seed,") == 0);
        CHECK(table.find("\n3,11,1.5,0.2,0.5,1.552\n") != std::string::npos);
        const Json sweep_doc = sweep_table({row});
        REQUIRE(sweep_doc["rows"].size() == 1);
        CHECK(sweep_doc["rows"][0]["value"] == 3);
    }

    TEST_CASE("write and read json round trip through disk") {
        const auto path =
            (std::filesystem::temp_directory_path() / "fairtp_serialize_test.json").string();
        Json doc;
        doc["alpha"] = 1;
        doc["beta"] = {1, 2, 3};
        write_json(path, doc);
        const Json back = read_json(path);
        CHECK(back == doc);
        CHECK_THROWS_AS(read_json(path + ".absent"), data_error);
    }
}
