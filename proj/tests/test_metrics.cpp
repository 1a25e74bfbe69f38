#include <doctest.h>

#include <cmath>

#include "kandy/metrics.hpp"
#include "kandy/rng.hpp"

using namespace kandy;

namespace {

// Independent oracles: plain nested loops transcribing the definitions,
// sharing nothing with the library implementations.

double oracle_average_accuracy(const AccuracyMatrix& m, size_t z, bool strict) {
    double s = 0;
    for (size_t j = 0; j <= z; ++j) s += *m.at(j, z);
    return s / double(strict ? z : z + 1);
}

double oracle_forgetting(const AccuracyMatrix& m, size_t z, bool strict) {
    double s = 0;
    for (size_t j = 0; j < z; ++j) {
        double best = -1e18;
        if (strict) {
            for (size_t k = 1; k <= z - 1; ++k) best = std::max(best, *m.at(j, k));
        } else {
            for (size_t k = j; k <= z - 1; ++k) best = std::max(best, *m.at(j, k));
        }
        s += best - *m.at(j, z);
    }
    return s / double(strict ? z - 1 : z);
}

double oracle_backward(const AccuracyMatrix& m, size_t z) {
    double s = 0;
    for (size_t j = 1; j <= z; ++j) {
        for (size_t h = 0; h + 1 <= j; ++h) s += *m.at(j, h) - *m.at(j, j);
    }
    double v = 2.0 / (double(z) * double(z - 1)) * s;
    return v < 0 ? 0 : v;
}

double oracle_forward(const AccuracyMatrix& m, size_t z) {
    double s = 0;
    for (size_t j = 0; j + 1 <= z; ++j) {
        for (size_t h = j + 1; h <= z; ++h) s += *m.at(j, h) - 0.5;
    }
    return 2.0 / (double(z) * double(z - 1)) * s;
}

AccuracyMatrix random_matrix(size_t n, Rng& rng) {
    AccuracyMatrix m(n);
    for (size_t j = 0; j < n; ++j) {
        for (size_t z = 0; z < n; ++z) m.set(j, z, rng.real());
    }
    return m;
}

}  // namespace

TEST_CASE("micro accuracy basics") {
    CHECK(micro_accuracy({25, 25, 0, 0}) == 1.0);
    CHECK(micro_accuracy({5, 3, 2, 0}) == doctest::Approx(0.8).epsilon(1e-15));
    // All-positive predictor on balanced data: TPR 1, TNR 0.
    CHECK(micro_accuracy({50, 0, 50, 0}) == 0.5);
    CHECK_THROWS_AS(micro_accuracy({0, 10, 0, 0}), MetricError);   // no positives seen
    CHECK_THROWS_AS(micro_accuracy({10, 0, 0, 0}), MetricError);   // no negatives seen
    CHECK_THROWS_AS(micro_accuracy({-1, 1, 1, 1}), MetricError);
}

TEST_CASE("micro accuracy is invariant under scaling the counts") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        ConfusionCounts c{static_cast<long long>(rng.index(50)) + 1,
                          static_cast<long long>(rng.index(50)) + 1,
                          static_cast<long long>(rng.index(50)),
                          static_cast<long long>(rng.index(50))};
        double base = micro_accuracy(c);
        long long k = static_cast<long long>(rng.index(9)) + 2;
        double scaled = micro_accuracy({c.tp * k, c.tn * k, c.fp * k, c.fn * k});
        CHECK(std::fabs(base - scaled) < 1e-15);
        // Formula restated directly.
        double tpr = double(c.tp) / double(c.tp + c.fn);
        double tnr = double(c.tn) / double(c.tn + c.fp);
        CHECK(base == 0.5 * tpr + 0.5 * tnr);
    }
}

TEST_CASE("average accuracy") {
    AccuracyMatrix m(3);
    m.set(0, 2, 0.9);
    m.set(1, 2, 0.7);
    m.set(2, 2, 0.8);
    m.set(0, 0, 0.6);
    CHECK(average_accuracy(m, 2) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(average_accuracy(m, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(average_accuracy(m, 2, true) == doctest::Approx((0.9 + 0.7 + 0.8) / 2).epsilon(1e-15));
    CHECK_THROWS_AS(average_accuracy(m, 0, true), MetricError);
    CHECK_THROWS_AS(average_accuracy(m, 3), MetricError);
    CHECK_THROWS_AS(average_accuracy(m, 1), MetricError);  // column 1 never measured
}

TEST_CASE("average accuracy is permutation invariant over measured tasks") {
    AccuracyMatrix m(3);
    m.set(0, 2, 0.9);
    m.set(1, 2, 0.7);
    m.set(2, 2, 0.8);
    AccuracyMatrix p(3);
    p.set(0, 2, 0.8);
    p.set(1, 2, 0.9);
    p.set(2, 2, 0.7);
    CHECK(average_accuracy(m, 2) == doctest::Approx(average_accuracy(p, 2)).epsilon(1e-15));
}

TEST_CASE("forgetting") {
    SUBCASE("two-task drop") {
        AccuracyMatrix m(2);
        m.set(0, 0, 0.9);
        m.set(0, 1, 0.7);
        m.set(1, 1, 0.5);
        CHECK(average_forgetting(m, 1) == doctest::Approx(0.2).epsilon(1e-15));
    }
    SUBCASE("constant matrix forgets nothing") {
        AccuracyMatrix m(4);
        for (size_t j = 0; j < 4; ++j) {
            for (size_t z = 0; z < 4; ++z) m.set(j, z, 0.66);
        }
        CHECK(average_forgetting(m, 3) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("monotone improvement gives non-positive forgetting") {
        AccuracyMatrix m(3);
        for (size_t j = 0; j < 3; ++j) {
            for (size_t z = 0; z < 3; ++z) m.set(j, z, 0.5 + 0.1 * double(z));
        }
        CHECK(average_forgetting(m, 2) <= 0.0);
    }
    SUBCASE("domain") {
        AccuracyMatrix m(3);
        CHECK_THROWS_AS(average_forgetting(m, 0), MetricError);
        CHECK_THROWS_AS(average_forgetting(m, 1, true), MetricError);
    }
}

TEST_CASE("transfer metrics") {
    SUBCASE("constant 0.5 matrix transfers nothing forward") {
        AccuracyMatrix m(4);
        for (size_t j = 0; j < 4; ++j) {
            for (size_t z = 0; z < 4; ++z) m.set(j, z, 0.5);
        }
        CHECK(forward_transfer(m, 3) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(backward_transfer(m, 3) == 0.0);
    }
    SUBCASE("negative backward sums clamp to zero") {
        AccuracyMatrix m(3);
        for (size_t j = 0; j < 3; ++j) {
            for (size_t z = 0; z < 3; ++z) m.set(j, z, j == z ? 0.9 : 0.1);
        }
        CHECK(backward_transfer(m, 2) == 0.0);
    }
    SUBCASE("domain") {
        AccuracyMatrix m(3);
        CHECK_THROWS_AS(backward_transfer(m, 1), MetricError);
        CHECK_THROWS_AS(forward_transfer(m, 1), MetricError);
    }
}

TEST_CASE("all four metrics match brute-force oracles on random matrices") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        AccuracyMatrix m = random_matrix(5, rng);
        for (size_t z = 0; z < 5; ++z) {
            CHECK(std::fabs(average_accuracy(m, z) - oracle_average_accuracy(m, z, false)) <=
                  1e-12);
            if (z >= 1) {
                CHECK(std::fabs(average_accuracy(m, z, true) -
                                oracle_average_accuracy(m, z, true)) <= 1e-12);
                CHECK(std::fabs(average_forgetting(m, z) - oracle_forgetting(m, z, false)) <=
                      1e-12);
            }
            if (z >= 2) {
                CHECK(std::fabs(average_forgetting(m, z, true) - oracle_forgetting(m, z, true)) <=
                      1e-12);
                CHECK(std::fabs(backward_transfer(m, z) - oracle_backward(m, z)) <= 1e-12);
                CHECK(std::fabs(forward_transfer(m, z) - oracle_forward(m, z)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("matrix CSV parsing") {
    AccuracyMatrix m = AccuracyMatrix::from_csv("0.9,0.8,0.7\n,0.6,0.5\n,,0.4\n");
    CHECK(m.size() == 3);
    CHECK(*m.at(0, 0) == 0.9);
    CHECK_FALSE(m.at(1, 0).has_value());
    CHECK(*m.at(2, 2) == 0.4);

    CHECK_THROWS_AS(AccuracyMatrix::from_csv(""), ParseError);
    CHECK_THROWS_AS(AccuracyMatrix::from_csv("0.5,0.5\n0.5\n"), ParseError);
    CHECK_THROWS_AS(AccuracyMatrix::from_csv("a,b\nc,d\n"), ParseError);
}
