#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "trophic/tasks.hpp"

using namespace trophic::tasks;

TEST_CASE("mackeyization: zero rates give the constant history value") {
    MackeyGlassParams p;
    p.beta = 0.0;
    p.gamma = 0.0;
    p.warmup = 10;
    p.rescale = false;
    const auto s = mackey_glass(p, 20, 0);
    for (double v : s) CHECK(v == doctest::Approx(1.2));
}

TEST_CASE("mackey-glass tau 17 stream is aperiodic and bounded") {
    MackeyGlassParams p;
    const auto s = mackey_glass(p, 1200, 0);
    REQUIRE(s.size() == 1200);
    for (double v : s) CHECK(std::abs(v) <= 1.0);

    // autocorrelation scan: no lag up to 200 may look periodic
    const int n = 1000;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += s[i];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (s[i] - mean) * (s[i] - mean);
    for (int lag = 1; lag <= 200; ++lag) {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += (s[i] - mean) * (s[i + lag] - mean);
        CHECK(c / var < 0.999);
    }
}

TEST_CASE("mackey-glass generation is deterministic") {
    MackeyGlassParams p;
    const auto a = mackey_glass(p, 300, 1);
    const auto b = mackey_glass(p, 300, 2); // seed is not part of the system
    CHECK(a == b);
    CHECK_THROWS_AS(mackey_glass({.tau = -1.0}, 10, 0), std::invalid_argument);
}

TEST_CASE("periodic waveforms") {
    SUBCASE("sine period 4 hits 0, 1, 0, -1") {
        const auto s = periodic(Waveform::Sine, 4.0, 4);
        CHECK(s[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s[1] == doctest::Approx(1.0));
        CHECK(std::abs(s[2]) < 1e-12);
        CHECK(s[3] == doctest::Approx(-1.0));
    }
    SUBCASE("square period 2 alternates") {
        const auto s = periodic(Waveform::Square, 2.0, 6);
        CHECK(s == std::vector<double>{1, -1, 1, -1, 1, -1});
    }
    SUBCASE("one full period averages to zero") {
        for (auto kind : {Waveform::Sine, Waveform::Square}) {
            const auto s = periodic(kind, 50.0, 50);
            double sum = 0.0;
            for (double v : s) sum += v;
            CHECK(std::abs(sum / 50.0) < 1e-12);
        }
    }
}

TEST_CASE("random walk") {
    SUBCASE("zero step size stays at zero") {
        for (double v : random_walk(0.0, 50, 3)) CHECK(v == 0.0);
    }
    SUBCASE("reflection keeps the walk inside [-1, 1]") {
        const auto s = random_walk(0.8, 5000, 11);
        for (double v : s) {
            CHECK(v <= 1.0);
            CHECK(v >= -1.0);
        }
    }
    SUBCASE("increment mean is near zero") {
        const auto s = random_walk(0.05, 8000, 5);
        double mean = 0.0;
        for (std::size_t i = 1; i < s.size(); ++i) mean += s[i] - s[i - 1];
        mean /= static_cast<double>(s.size() - 1);
        CHECK(std::abs(mean) < 3.0 * 0.05 / std::sqrt(8000.0));
    }
    SUBCASE("deterministic under the seed") {
        CHECK(random_walk(0.1, 100, 9) == random_walk(0.1, 100, 9));
        CHECK(random_walk(0.1, 100, 9) != random_walk(0.1, 100, 10));
    }
}

TEST_CASE("delayed recall pairing") {
    const std::vector<double> u{1, 2, 3, 4, 5};
    SUBCASE("zero delay is the identity") { CHECK(delayed(u, 0) == u); }
    SUBCASE("delay one shifts with zero padding") {
        CHECK(delayed(u, 1) == std::vector<double>{0, 1, 2, 3, 4});
    }
    SUBCASE("delays compose additively") { CHECK(delayed(delayed(u, 2), 1) == delayed(u, 3)); }
}

TEST_CASE("schedule concatenation and markers") {
    SUBCASE("single segment is its own stream") {
        const Schedule s = schedule({{{1.0, 2.0, 3.0}}});
        CHECK(s.values == std::vector<double>{1, 2, 3});
        CHECK(s.boundaries.empty());
    }
    SUBCASE("two segments mark the join") {
        const Schedule s = schedule({{{1, 2, 3}}, {{4, 5}}});
        CHECK(s.values.size() == 5);
        CHECK(s.boundaries == std::vector<int>{3});
    }
    SUBCASE("ten alternations of 200 mark every multiple of 200") {
        std::vector<ScheduleSegment> segs(10, ScheduleSegment{std::vector<double>(200, 0.5)});
        const Schedule s = schedule(segs);
        REQUIRE(s.boundaries.size() == 9);
        for (int k = 0; k < 9; ++k) CHECK(s.boundaries[k] == 200 * (k + 1));
    }
}

TEST_CASE("task stream dispatch is deterministic and bounded") {
    for (const char* kind : {"mackey_glass", "sine", "square", "random_walk"}) {
        TaskStream ts;
        ts.kind = kind;
        ts.seed = 5;
        const auto a = ts.generate(300);
        const auto b = ts.generate(300);
        CHECK(a == b);
        for (double v : a) CHECK(std::abs(v) <= 1.0);
    }
    TaskStream bad;
    bad.kind = "nope";
    CHECK_THROWS_AS(bad.generate(10), std::invalid_argument);
}

TEST_CASE("nrmse normalizes by the target deviation") {
    const std::vector<double> y{1, -1, 1, -1};
    CHECK(nrmse(y, y) == doctest::Approx(0.0));
    const std::vector<double> p{0, 0, 0, 0};
    CHECK(nrmse(p, y) == doctest::Approx(1.0)); // rmse 1, std 1
}
