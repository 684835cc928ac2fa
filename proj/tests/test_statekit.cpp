#include "fairtp/statekit.hpp"

#include "fairtp/numeric.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fairtp;

TEST_SUITE("statekit") {
    TEST_CASE("threshold schedule clamps to its last entry") {
        const ThresholdSchedule schedule({0.5, 0.4, 0.3});
        CHECK(schedule.at(0) == doctest::Approx(0.5));
        CHECK(schedule.at(2) == doctest::Approx(0.3));
        CHECK(schedule.at(9) == doctest::Approx(0.3));
        CHECK_THROWS_AS(schedule.at(-1), invalid_input);
        CHECK_THROWS_AS(ThresholdSchedule(std::vector<Scalar>{}), invalid_input);
        CHECK_THROWS_AS(ThresholdSchedule({0.2, 0.0}), invalid_input);
    }

    TEST_CASE("labels are strict: a tie is a sacrifice") {
        Vector mapes(4);
        mapes << 0.1, 0.3, 0.3001, 0.29;
        CHECK(label_states(mapes, 0.3) == std::vector<int>{1, 0, 0, 1});
    }

    TEST_CASE("discriminate closed forms") {
        Discriminator disc = Discriminator::zeros(3, 0.1);
        Vector h = Vector::Ones(3);
        CHECK(discriminate(disc, h) == doctest::Approx(0.5));  // zero logit
        disc.weights << 1.0, 0.5, -0.5;
        disc.bias = -0.5;
        // logit = 1 + 0.5 - 0.5 - 0.5 = 0.5
        CHECK(discriminate(disc, h) == doctest::Approx(1.0 / (1.0 + std::exp(-0.5))));
        CHECK_THROWS_AS(discriminate(disc, Vector::Ones(2)), invalid_input);
    }

    TEST_CASE("bce closed forms and clipping") {
        CHECK(discriminator_loss(0.5, 1, 1e-7) == doctest::Approx(std::log(2.0)));
        CHECK(discriminator_loss(0.5, 0, 1e-7) == doctest::Approx(std::log(2.0)));
        CHECK(discriminator_loss(0.9, 1, 1e-7) == doctest::Approx(-std::log(0.9)));
        // the clip keeps a confident miss finite
        CHECK(discriminator_loss(1.0, 0, 1e-7) == doctest::Approx(-std::log(1e-7)));
        CHECK(std::isfinite(discriminator_loss(0.0, 1, 1e-7)));
    }

    TEST_CASE("one step moves along the analytic gradient") {
        Discriminator disc = Discriminator::zeros(2, 0.5);
        Matrix rows(2, 2);
        rows << 1.0, 0.0, 0.0, 1.0;
        const std::vector<int> labels{1, 0};
        // at zero weights both outputs are 0.5; residuals (-0.5, 0.5)
        discriminator_step(disc, rows, labels);
        CHECK(disc.weights(0) == doctest::Approx(0.5 * 0.5 / 2.0));
        CHECK(disc.weights(1) == doctest::Approx(-0.5 * 0.5 / 2.0));
        CHECK(disc.bias == doctest::Approx(0.0));
    }

    TEST_CASE("step gradient matches finite differences of the mean bce") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<Scalar> dist(-1.0, 1.0);
        Matrix rows(6, 4);
        std::vector<int> labels;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = dist(rng);
            labels.push_back(static_cast<int>(rng() % 2));
        }
        Discriminator disc = Discriminator::zeros(4, 1.0);
        disc.weights << 0.3, -0.2, 0.1, 0.4;
        disc.bias = 0.05;

        const auto mean_loss = [&] {
            Scalar sum = 0.0;
            const Vector d = discriminate_batch(disc, rows);
            for (Eigen::Index i = 0; i < rows.rows(); ++i)
                sum += discriminator_loss(d(i), labels[static_cast<size_t>(i)], 1e-12);
            return sum / static_cast<Scalar>(rows.rows());
        };
        Vector fd(4);
        for (int k = 0; k < 4; ++k)
            fd(k) = oracle::central_difference(
                mean_loss, [&] { return disc.weights(k); },
                [&](Scalar x) { disc.weights(k) = x; }, 1e-6);
        const Scalar fd_bias = oracle::central_difference(
            mean_loss, [&] { return disc.bias; }, [&](Scalar x) { disc.bias = x; }, 1e-6);

        const Discriminator before = disc;
        discriminator_step(disc, rows, labels);
        for (int k = 0; k < 4; ++k) {
            const Scalar applied = (before.weights(k) - disc.weights(k)) / before.learning_rate;
            CHECK(std::abs(applied - fd(k)) < 1e-6);
        }
        const Scalar applied_bias = (before.bias - disc.bias) / before.learning_rate;
        CHECK(std::abs(applied_bias - fd_bias) < 1e-6);
    }

    TEST_CASE("separable hidden states are learned quickly") {
        std::mt19937_64 rng(17);
        GaussianSource gauss;
        const int n = 40;
        Matrix rows(n, 3);
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) {
            const int y = i % 2;
            for (int j = 0; j < 3; ++j)
                rows(i, j) = (y == 1 ? 2.0 : -2.0) + 0.3 * gauss.next(rng);
            labels.push_back(y);
        }
        Discriminator disc = Discriminator::zeros(3, 0.5);
        for (int step = 0; step < 120; ++step) discriminator_step(disc, rows, labels);
        const Vector d = discriminate_batch(disc, rows);
        int correct = 0;
        for (int i = 0; i < n; ++i)
            if ((d(i) >= 0.5) == (labels[static_cast<size_t>(i)] == 1)) ++correct;
        CHECK(correct >= n * 95 / 100);
    }
}
