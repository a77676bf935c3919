#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "trophic/learning.hpp"
#include "trophic/linalg.hpp"

namespace trophic::rl {

/// Point-mass lander over a pad at the origin. Observations are 8 reals
/// (x, y, vx, vy, angle, angular velocity, two leg-contact flags); the four
/// discrete actions are none / left thruster / main engine / right thruster.
/// Reward is shaped (progress toward the pad, fuel, leg contact, terminal
/// landing quality) so a clean descent scores above 200.
struct LanderParams {
    double dt = 0.05;
    double gravity = 0.6;
    double main_accel = 1.1;    // along the body axis
    double side_accel = 0.18;   // lateral kick from side thrusters
    double side_torque = 2.0;   // angular acceleration from side thrusters
    double angular_damping = 1.0;
    double start_height = 1.2;
    double start_spread = 0.25; // |x| range at reset
    double pad_halfwidth = 0.4;
    double leg_height = 0.1;    // legs touch below this altitude
    double safe_vy = 0.7;       // soft-landing vertical speed
    double safe_vx = 0.6;
    double safe_angle = 0.6;
    double progress_scale = 100.0;
    double fuel_main = 0.12;
    double fuel_side = 0.02;
    double terminal_land = 100.0;
    double terminal_crash = 100.0;
    double leg_bonus = 10.0;
    int max_steps = 600;
};

constexpr int kObsDim = 8;
constexpr int kActionCount = 4;

enum Action : int { kNone = 0, kLeft = 1, kMain = 2, kRight = 3 };

class LanderEnv {
public:
    explicit LanderEnv(LanderParams params = {}) : p_(params) {}

    std::array<double, kObsDim> reset(std::uint64_t seed);
    struct StepResult {
        std::array<double, kObsDim> obs;
        double reward = 0.0;
        bool done = false;
        bool landed = false;
    };
    StepResult step(int action);

    const LanderParams& params() const { return p_; }
    int steps_taken() const { return steps_; }

private:
    std::array<double, kObsDim> observe() const;
    double distance_to_pad() const;

    LanderParams p_;
    double x_ = 0, y_ = 0, vx_ = 0, vy_ = 0, angle_ = 0, omega_ = 0;
    bool leg_left_ = false, leg_right_ = false;
    bool done_ = true;
    int steps_ = 0;
    double prev_distance_ = 0.0;
};

/// TD(0) reward-prediction error r + gamma V(x') - V(x); terminal states
/// treat V(x') as zero.
double td_error(double r, double gamma, double v, double v_next, bool done);

/// eps_target = rpe * R_V^T, the costate the feedback pathway learns to hit.
std::vector<double> costate_target(double rpe, const DenseMatrix& value_readout);

/// Backward GAE pass: A_t = sum_k (gamma lambda)^k delta_{t+k}, cut at
/// episode ends.
std::vector<double> gae_advantages(std::span<const double> td_errors, std::span<const char> done_flags,
                                   double gamma, double lambda);

std::vector<double> softmax(std::span<const double> logits);

/// Softmax policy-gradient step with NLMS scaling:
///   dR_pi = eta * advantage * (onehot(a) - pi) x^T / (||x||^2 + eps),
/// norm-projected like every other update.
DenseMatrix policy_update(const DenseMatrix& policy_readout, std::span<const double> x, int action,
                          double advantage, double eta, const PlasticityRates& rates);

} // namespace trophic::rl
