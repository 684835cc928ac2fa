#include "fairtp/sampler.hpp"

#include "fairtp/numeric.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace fairtp;

namespace {

Vector constant_states(size_t n, Scalar value) { return Vector::Constant(static_cast<Eigen::Index>(n), value); }

std::vector<SensorId> all_ids(int n) {
    std::vector<SensorId> ids(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) ids[static_cast<size_t>(v)] = v;
    return ids;
}

}  // namespace

TEST_SUITE("ledger") {
    TEST_CASE("accumulates centered states and evicts beyond the window") {
        StateLedger ledger(2, 3);
        CHECK_FALSE(ledger.window_full());
        Vector s1(2);
        s1 << 1.0, 0.0;
        accumulate(ledger, {0, 2}, s1);  // contributions +0.5 at 0, -0.5 at 2
        Vector s2(1);
        s2 << 1.0;
        accumulate(ledger, {0}, s2);
        CHECK(ledger.window_full());
        Vector d = ledger.accumulated();
        CHECK(d(0) == doctest::Approx(1.0));
        CHECK(d(1) == doctest::Approx(0.0));
        CHECK(d(2) == doctest::Approx(-0.5));
        CHECK(ledger.sampled_union() == std::vector<SensorId>{0, 2});

        Vector s3(1);
        s3 << 0.0;
        accumulate(ledger, {1}, s3);  // evicts the first entry
        CHECK(ledger.entry_count() == 2);
        d = ledger.accumulated();
        CHECK(d(0) == doctest::Approx(0.5));
        CHECK(d(1) == doctest::Approx(-0.5));
        CHECK(d(2) == doctest::Approx(0.0));
        CHECK(ledger.sampled_union() == std::vector<SensorId>{0, 1});

        ledger.clear();
        CHECK(ledger.entry_count() == 0);
    }

    TEST_CASE("rejects malformed batches") {
        StateLedger ledger(2, 3);
        Vector two = constant_states(2, 0.5);
        CHECK_THROWS_AS(accumulate(ledger, {2, 0}, two), invalid_input);   // not ascending
        CHECK_THROWS_AS(accumulate(ledger, {0, 0}, two), invalid_input);   // duplicate
        CHECK_THROWS_AS(accumulate(ledger, {0, 3}, two), invalid_input);   // out of range
        CHECK_THROWS_AS(accumulate(ledger, {0}, two), invalid_input);      // size mismatch
        Vector bad(1);
        bad << 1.5;
        CHECK_THROWS_AS(accumulate(ledger, {0}, bad), invalid_input);      // outside [0,1]
        CHECK_THROWS_AS(StateLedger(0, 3), invalid_input);
    }
}

TEST_SUITE("sampler") {
    TEST_CASE("quotas are proportional with largest remainders") {
        std::vector<RegionId> assignment;
        auto fill = [&](RegionId r, int n) { assignment.insert(assignment.end(), static_cast<size_t>(n), r); };
        fill(0, 50);
        fill(1, 30);
        fill(2, 20);
        const RoadNetwork net(100, {}, assignment);
        CHECK(stratified_quotas(net, 10) == std::vector<int>{5, 3, 2});
        CHECK_THROWS_AS(stratified_quotas(net, 2), invalid_input);    // below region count
        CHECK_THROWS_AS(stratified_quotas(net, 101), invalid_input);  // above sensor count
    }

    TEST_CASE("remainder ties go to the earlier region") {
        std::vector<RegionId> assignment;
        assignment.insert(assignment.end(), 25, 0);
        assignment.insert(assignment.end(), 25, 1);
        assignment.insert(assignment.end(), 50, 2);
        const RoadNetwork net(100, {}, assignment);
        // raw quotas 1.5, 1.5, 3.0: the leftover seat goes to region 0
        CHECK(stratified_quotas(net, 6) == std::vector<int>{2, 1, 3});
    }

    TEST_CASE("largest remainder wins the leftover seat") {
        std::vector<RegionId> assignment;
        assignment.insert(assignment.end(), 30, 0);
        assignment.insert(assignment.end(), 30, 1);
        assignment.insert(assignment.end(), 40, 2);
        const RoadNetwork net(100, {}, assignment);
        // raw quotas 2.1, 2.1, 2.8
        CHECK(stratified_quotas(net, 7) == std::vector<int>{2, 2, 3});
    }

    TEST_CASE("every region keeps at least one seat") {
        std::vector<RegionId> assignment(1, 0);
        assignment.insert(assignment.end(), 99, 1);
        const RoadNetwork net(100, {}, assignment);
        // raw quotas 0.02, 1.98: repair pulls a seat back for region 0
        CHECK(stratified_quotas(net, 2) == std::vector<int>{1, 1});
    }

    TEST_CASE("seats skip regions already at capacity") {
        std::vector<RegionId> assignment{0, 1};
        assignment.insert(assignment.end(), 8, 2);
        const RoadNetwork net(10, {}, assignment);
        // raw 0.6, 0.6, 4.8: remainders place seats on region 2 then 0,
        // repair restores region 1
        CHECK(stratified_quotas(net, 6) == std::vector<int>{1, 1, 4});
    }

    TEST_CASE("stratified init honors quotas and is seed-deterministic") {
        std::vector<RegionId> assignment;
        assignment.insert(assignment.end(), 6, 0);
        assignment.insert(assignment.end(), 3, 1);
        const RoadNetwork net(9, {}, assignment);
        const SamplingRound round = stratified_init(net, 6, 42);
        REQUIRE(round.sampled.size() == 6);
        CHECK(round.region_counts(0) == 4);
        CHECK(round.region_counts(1) == 2);
        CHECK(std::is_sorted(round.sampled.begin(), round.sampled.end()));
        CHECK(std::set<SensorId>(round.sampled.begin(), round.sampled.end()).size() == 6);
        for (SensorId v : round.sampled) CHECK(v < 9);
        CHECK(round.sensor_probs.minCoeff() == doctest::Approx(0.5));
        CHECK(round.sensor_probs.maxCoeff() == doctest::Approx(0.5));
        CHECK(round.target_per_region == doctest::Approx(3.0));

        const SamplingRound again = stratified_init(net, 6, 42);
        CHECK(again.sampled == round.sampled);
    }

    TEST_CASE("sensor probabilities are the logistic of the accumulated state") {
        StateLedger ledger(2, 3);
        Vector s(3);
        s << 1.0, 0.0, 0.5;
        accumulate(ledger, {0, 1, 2}, s);
        accumulate(ledger, {0, 1, 2}, s);
        const Vector p = sensor_probs(ledger);
        CHECK(p(0) == doctest::Approx(logistic(1.0)));
        CHECK(p(1) == doctest::Approx(logistic(-1.0)));
        CHECK(p(2) == doctest::Approx(0.5));
        StateLedger empty(2, 3);
        CHECK_THROWS_AS(sensor_probs(empty), invalid_input);
    }

    TEST_CASE("region probabilities form a softmax over centered counts") {
        IntVector even(2);
        even << 3, 3;
        const Vector uniform = region_probs(even, 6, 2);
        CHECK(uniform(0) == doctest::Approx(0.5));
        CHECK(uniform(1) == doctest::Approx(0.5));

        IntVector skewed(2);
        skewed << 2, 0;
        const Vector p = region_probs(skewed, 2, 2);  // centered logits +1, -1
        CHECK(p(0) == doctest::Approx(0.8807970779778823).epsilon(1e-9));
        CHECK(p(1) == doctest::Approx(0.11920292202211755).epsilon(1e-9));
        CHECK(p.sum() == doctest::Approx(1.0));

        IntVector bad(2);
        bad << -1, 3;
        CHECK_THROWS_AS(region_probs(bad, 2, 2), invalid_input);
    }

    TEST_CASE("fused probabilities broadcast the region factor") {
        const RoadNetwork net(3, {}, {0, 0, 1});
        Vector region_p(2), sensor_p(3);
        region_p << 0.8, 0.2;
        sensor_p << 0.5, 0.25, 0.5;
        const Vector fused = fuse_probs(region_p, sensor_p, net);
        CHECK(fused(0) == doctest::Approx(0.4));
        CHECK(fused(1) == doctest::Approx(0.2));
        CHECK(fused(2) == doctest::Approx(0.1));
    }

    TEST_CASE("greedy keeps sacrificed sensors and drops benefited ones") {
        const RoadNetwork net(6, {}, {0, 0, 0, 0, 0, 0});
        StateLedger ledger(1, 6);
        Vector states(6);
        states << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0;  // sacrificed: 1, 3, 4
        accumulate(ledger, all_ids(6), states);
        const SamplingRound round = greedy_select(ledger, net, 3);
        CHECK(round.sampled == std::vector<SensorId>{1, 3, 4});
        CHECK(round.region_counts(0) == 3);
        CHECK(round.region_probs(0) == doctest::Approx(1.0));
    }

    TEST_CASE("neutral states spread the budget evenly across equal regions") {
        const RoadNetwork net(6, {}, {0, 0, 1, 1, 2, 2});
        StateLedger ledger(1, 6);
        accumulate(ledger, all_ids(6), constant_states(6, 0.5));
        const SamplingRound round = greedy_select(ledger, net, 3);
        CHECK(round.region_counts(0) == 1);
        CHECK(round.region_counts(1) == 1);
        CHECK(round.region_counts(2) == 1);
    }

    TEST_CASE("fixed region probabilities can force the coverage repair") {
        const RoadNetwork net(4, {}, {0, 0, 1, 1});
        StateLedger ledger(1, 4);
        Vector states(4);
        states << 0.0, 0.0, 1.0, 1.0;
        accumulate(ledger, all_ids(4), states);
        IntVector prior(2);
        prior << 2, 0;  // makes region 1 look cheap for the whole loop
        GreedyOptions options;
        options.counts_source = RegionCountsSource::previous_round;
        options.previous_counts = &prior;
        const SamplingRound round = greedy_select(ledger, net, 2, options);
        // the loop takes 2 and 3, repair swaps the worse of them for sensor 0
        CHECK(round.sampled == std::vector<SensorId>{0, 3});
        CHECK(round.region_counts(0) == 1);
        CHECK(round.region_counts(1) == 1);
    }

    TEST_CASE("greedy preconditions") {
        const RoadNetwork net(4, {}, {0, 0, 1, 1});
        StateLedger ledger(2, 4);
        accumulate(ledger, all_ids(4), constant_states(4, 0.5));
        CHECK_THROWS_AS(greedy_select(ledger, net, 2), invalid_input);  // window not full
        accumulate(ledger, all_ids(4), constant_states(4, 0.5));
        CHECK_THROWS_AS(greedy_select(ledger, net, 1), invalid_input);  // below region count
        CHECK_THROWS_AS(greedy_select(ledger, net, 5), invalid_input);  // above sensor count
        GreedyOptions options;
        options.counts_source = RegionCountsSource::previous_round;
        CHECK_THROWS_AS(greedy_select(ledger, net, 2, options), invalid_input);  // counts missing
        StateLedger other(2, 3);
        accumulate(other, all_ids(3), constant_states(3, 0.5));
        accumulate(other, all_ids(3), constant_states(3, 0.5));
        CHECK_THROWS_AS(greedy_select(other, net, 2), invalid_input);  // network mismatch
    }
}
