#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "trophic/rl.hpp"
#include "trophic/rng.hpp"

using namespace trophic;
using namespace trophic::rl;

TEST_CASE("reset is deterministic and observations have the contracted shape") {
    LanderEnv env;
    const auto a = env.reset(42);
    LanderEnv env2;
    const auto b = env2.reset(42);
    CHECK(a == b);
    CHECK(a.size() == 8);
    CHECK(a[6] == 0.0);
    CHECK(a[7] == 0.0);
}

TEST_CASE("free fall gains downward speed at g dt per step") {
    LanderParams p;
    p.start_spread = 0.0;
    LanderEnv env(p);
    env.reset(1);
    double prev_vy = 0.0;
    for (int t = 0; t < 5; ++t) {
        const auto r = env.step(kNone);
        CHECK(r.obs[3] == doctest::Approx(prev_vy - p.gravity * p.dt).epsilon(1e-12));
        prev_vy = r.obs[3];
    }
}

TEST_CASE("calibrated main thrust exactly cancels gravity") {
    LanderParams p;
    p.main_accel = p.gravity; // force balance fixture
    p.start_spread = 0.0;
    LanderEnv env(p);
    auto obs = env.reset(2);
    // zero the initial tilt by construction: seed 2 gives a small angle, so
    // use a fresh env with no spread and compare vy drift against the tilt
    const double angle = obs[4];
    const auto r = env.step(kMain);
    CHECK(r.obs[3] == doctest::Approx((std::cos(angle) * p.gravity - p.gravity) * p.dt).epsilon(1e-9));
}

TEST_CASE("a scripted descent lands with reward above 200") {
    // proportional controller: kill tilt with side thrusters, brake with the
    // main engine when sinking too fast
    LanderParams p;
    LanderEnv env(p);
    double best = -1e9;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto obs = env.reset(seed);
        double total = 0.0;
        bool landed = false;
        while (true) {
            const double x = obs[0], y = obs[1], vx = obs[2], vy = obs[3], angle = obs[4], omega = obs[5];
            // positive tilt points the main engine thrust toward -x
            const double want_angle = std::clamp(0.4 * x + 0.8 * vx, -0.25, 0.25);
            const double tilt_err = angle - want_angle;
            int action = kNone;
            if (tilt_err > 0.04 || omega > 0.3)
                action = kRight;
            else if (tilt_err < -0.04 || omega < -0.3)
                action = kLeft;
            else if (vy < -(0.1 + 0.3 * y))
                action = kMain;
            const auto r = env.step(action);
            total += r.reward;
            obs = r.obs;
            if (r.done) {
                landed = r.landed;
                break;
            }
        }
        if (landed) best = std::max(best, total);
    }
    CHECK(best > 200.0);
}

TEST_CASE("td error") {
    CHECK(td_error(0.0, 0.9, 0.0, 0.0, false) == 0.0);
    CHECK(td_error(1.0, 0.99, 0.5, 1.0, false) == doctest::Approx(1.49));
    CHECK(td_error(1.0, 0.99, 0.2, 123.0, true) == doctest::Approx(0.8)); // terminal ignores v_next
}

TEST_CASE("costate target scales the value readout") {
    DenseMatrix rv(1, 2);
    rv.at(0, 0) = 0.5;
    rv.at(0, 1) = -1.0;
    CHECK(costate_target(0.0, rv) == std::vector<double>{0.0, 0.0});
    CHECK(costate_target(2.0, rv) == std::vector<double>{1.0, -2.0});
    const auto a = costate_target(1.5, rv);
    const auto b = costate_target(3.0, rv);
    for (int i = 0; i < 2; ++i) CHECK(b[i] == doctest::Approx(2.0 * a[i]));
}

TEST_CASE("gae advantages") {
    SUBCASE("lambda 0 reduces to the td errors") {
        const std::vector<double> td{0.3, -0.2, 0.9};
        const std::vector<char> done{0, 0, 1};
        CHECK(gae_advantages(td, done, 0.9, 0.0) == td);
    }
    SUBCASE("all-zero signal stays zero under lambda 1") {
        const std::vector<double> td(5, 0.0);
        const std::vector<char> done{0, 0, 0, 0, 1};
        for (double v : gae_advantages(td, done, 1.0, 1.0)) CHECK(v == 0.0);
    }
    SUBCASE("three-step geometric accumulation") {
        const std::vector<double> td{1.0, 1.0, 1.0};
        const std::vector<char> done{0, 0, 1};
        const auto adv = gae_advantages(td, done, 0.5, 0.5);
        CHECK(adv[0] == doctest::Approx(1.3125));
        CHECK(adv[1] == doctest::Approx(1.25));
        CHECK(adv[2] == doctest::Approx(1.0));
    }
    SUBCASE("lambda 1 with gamma < 1 equals the discounted monte-carlo advantage") {
        // 5-step episode, zero values: A_t must equal the discounted return
        const double gamma = 0.8;
        const std::vector<double> rewards{1.0, 0.0, -0.5, 2.0, 0.3};
        std::vector<double> td(5);
        const std::vector<char> done{0, 0, 0, 0, 1};
        for (int t = 0; t < 5; ++t) td[t] = rewards[t]; // V = 0 everywhere
        const auto adv = gae_advantages(td, done, gamma, 1.0);
        for (int t = 0; t < 5; ++t) {
            double ret = 0.0;
            for (int k = 4; k >= t; --k) ret = rewards[k] + gamma * ret;
            CHECK(adv[t] == doctest::Approx(ret));
        }
    }
    SUBCASE("episode boundaries cut the accumulation") {
        const std::vector<double> td{1.0, 1.0, 1.0, 1.0};
        const std::vector<char> done{0, 1, 0, 1};
        const auto adv = gae_advantages(td, done, 0.5, 0.5);
        CHECK(adv[1] == doctest::Approx(1.0));
        CHECK(adv[0] == doctest::Approx(1.25));
        CHECK(adv[3] == doctest::Approx(1.0));
        CHECK(adv[2] == doctest::Approx(1.25));
    }
}

TEST_CASE("softmax behaves") {
    const std::vector<double> logits{1.0, 2.0, 3.0, 4.0};
    const auto p = softmax(logits);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[3] > p[2]);
}

TEST_CASE("policy update") {
    PlasticityRates rates;
    rates.norm_cap = 1e9;
    SUBCASE("zero advantage is a no-op") {
        DenseMatrix pi(4, 3);
        const std::vector<double> x{0.1, 0.2, 0.3};
        const DenseMatrix d = policy_update(pi, x, 2, 0.0, 0.5, rates);
        for (double v : d.v) CHECK(v == 0.0);
    }
    SUBCASE("a saturated policy barely moves") {
        DenseMatrix pi(4, 2);
        pi.at(1, 0) = 400.0; // effectively deterministic toward action 1
        const std::vector<double> x{1.0, 0.0};
        const DenseMatrix d = policy_update(pi, x, 1, 1.0, 0.5, rates);
        for (double v : d.v) CHECK(std::abs(v) < 1e-10);
    }
    SUBCASE("matches finite differences of advantage-weighted log-probability") {
        DenseMatrix pi(3, 4);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c) pi.at(r, c) = 0.3 * rng::gaussian(7, r, c);
        std::vector<double> x{0.4, -0.2, 0.7, 0.1};
        const int action = 1;
        const double adv = 1.7, eta = 0.9;
        rates.nlms = false; // isolate the gradient itself
        const DenseMatrix d = policy_update(pi, x, action, adv, eta, rates);
        const double h = 1e-6;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c) {
                auto logp = [&](double bump) {
                    DenseMatrix q = pi;
                    q.at(r, c) += bump;
                    std::vector<double> logits(3, 0.0);
                    q.matvec(x, logits);
                    return std::log(softmax(logits)[action]);
                };
                const double grad = (logp(h) - logp(-h)) / (2.0 * h);
                CHECK(d.at(r, c) == doctest::Approx(eta * adv * grad).epsilon(1e-5));
            }
    }
}
