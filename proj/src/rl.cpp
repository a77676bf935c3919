#include "trophic/rl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trophic/rng.hpp"

namespace trophic::rl {

std::array<double, kObsDim> LanderEnv::reset(std::uint64_t seed) {
    x_ = p_.start_spread * (2.0 * rng::uniform(seed, 1, 0) - 1.0);
    y_ = p_.start_height;
    vx_ = 0.1 * (2.0 * rng::uniform(seed, 2, 0) - 1.0);
    vy_ = 0.0;
    angle_ = 0.1 * (2.0 * rng::uniform(seed, 3, 0) - 1.0);
    omega_ = 0.0;
    leg_left_ = leg_right_ = false;
    done_ = false;
    steps_ = 0;
    prev_distance_ = distance_to_pad();
    return observe();
}

double LanderEnv::distance_to_pad() const {
    // distance to the landing configuration: over the pad, at rest. Folding
    // velocity in makes braking show up as progress, so descent speed carries
    // a dense signal instead of only the terminal cliff.
    return std::sqrt(x_ * x_ + y_ * y_ + 0.5 * (vx_ * vx_ + vy_ * vy_));
}

std::array<double, kObsDim> LanderEnv::observe() const {
    return {x_, y_, vx_, vy_, angle_, omega_, leg_left_ ? 1.0 : 0.0, leg_right_ ? 1.0 : 0.0};
}

LanderEnv::StepResult LanderEnv::step(int action) {
    if (done_) throw std::runtime_error("LanderEnv::step called on a finished episode");
    if (action < 0 || action >= kActionCount) throw std::invalid_argument("LanderEnv: bad action");

    double ax = 0.0, ay = -p_.gravity, aomega = -p_.angular_damping * omega_;
    double fuel = 0.0;
    if (action == kMain) {
        ax += -std::sin(angle_) * p_.main_accel;
        ay += std::cos(angle_) * p_.main_accel;
        fuel = p_.fuel_main;
    } else if (action == kLeft) {
        ax -= p_.side_accel * std::cos(angle_);
        aomega += p_.side_torque;
        fuel = p_.fuel_side;
    } else if (action == kRight) {
        ax += p_.side_accel * std::cos(angle_);
        aomega -= p_.side_torque;
        fuel = p_.fuel_side;
    }

    vx_ += ax * p_.dt;
    vy_ += ay * p_.dt;
    omega_ += aomega * p_.dt;
    x_ += vx_ * p_.dt;
    y_ += vy_ * p_.dt;
    angle_ += omega_ * p_.dt;
    ++steps_;

    StepResult res;
    const double dist = distance_to_pad();
    res.reward = p_.progress_scale * (prev_distance_ - dist) - fuel;
    prev_distance_ = dist;

    const bool over_pad = std::abs(x_) <= p_.pad_halfwidth;
    if (y_ <= p_.leg_height && std::abs(angle_) < p_.safe_angle) {
        if (!leg_left_ && over_pad) { leg_left_ = true; res.reward += p_.leg_bonus; }
        if (!leg_right_ && over_pad) { leg_right_ = true; res.reward += p_.leg_bonus; }
    }

    if (y_ <= 0.0) {
        done_ = true;
        res.done = true;
        const bool soft = std::abs(vy_) <= p_.safe_vy && std::abs(vx_) <= p_.safe_vx &&
                          std::abs(angle_) <= p_.safe_angle && over_pad;
        if (soft) {
            // quality grades the touchdown inside the soft envelope
            const double q_v = 1.0 - std::abs(vy_) / (2.0 * p_.safe_vy);
            const double q_h = 1.0 - std::abs(vx_) / (2.0 * p_.safe_vx);
            const double q_a = 1.0 - std::abs(angle_) / (2.0 * p_.safe_angle);
            res.reward += p_.terminal_land * std::clamp(q_v * q_h * q_a, 0.0, 1.0);
            res.landed = true;
        } else {
            res.reward -= p_.terminal_crash;
        }
    } else if (std::abs(x_) > 1.5 || y_ > 2.5 || steps_ >= p_.max_steps) {
        done_ = true;
        res.done = true;
        res.reward -= p_.terminal_crash; // drifted away or stalled out
    }

    res.obs = observe();
    return res;
}

double td_error(double r, double gamma, double v, double v_next, bool done) {
    return r + (done ? 0.0 : gamma * v_next) - v;
}

std::vector<double> costate_target(double rpe, const DenseMatrix& value_readout) {
    std::vector<double> target(value_readout.cols);
    for (int i = 0; i < value_readout.cols; ++i) target[i] = rpe * value_readout.at(0, i);
    return target;
}

std::vector<double> gae_advantages(std::span<const double> td_errors, std::span<const char> done_flags,
                                   double gamma, double lambda) {
    if (td_errors.size() != done_flags.size()) throw std::invalid_argument("gae_advantages: size mismatch");
    std::vector<double> adv(td_errors.size(), 0.0);
    double acc = 0.0;
    for (int t = static_cast<int>(td_errors.size()) - 1; t >= 0; --t) {
        if (done_flags[t]) acc = 0.0;
        acc = td_errors[t] + gamma * lambda * acc;
        adv[t] = acc;
    }
    return adv;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

DenseMatrix policy_update(const DenseMatrix& policy_readout, std::span<const double> x, int action,
                          double advantage, double eta, const PlasticityRates& rates) {
    if (static_cast<int>(x.size()) != policy_readout.cols)
        throw std::invalid_argument("policy_update: dimension mismatch");
    std::vector<double> logits(policy_readout.rows, 0.0);
    policy_readout.matvec(x, logits);
    const std::vector<double> pi = softmax(logits);

    DenseMatrix d(policy_readout.rows, policy_readout.cols);
    const double denom = rates.nlms_divisor(squared_norm(x));
    for (int a = 0; a < d.rows; ++a) {
        const double coef = eta * advantage * ((a == action ? 1.0 : 0.0) - pi[a]) / denom;
        for (int c = 0; c < d.cols; ++c) d.at(a, c) = coef * x[c];
    }
    if (rates.norm_projection) norm_project(d.v, rates.norm_cap);
    return d;
}

} // namespace trophic::rl
