#include "trophic/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trophic/rng.hpp"

namespace trophic::tasks {

namespace {

// z(t - tau) from the integration history, linearly interpolated. The
// history grid has spacing dt; index 0 holds z at time (step - size + 1)*dt.
double delayed_value(const std::vector<double>& hist, double offset_steps) {
    const double pos = static_cast<double>(hist.size() - 1) - offset_steps;
    if (pos <= 0.0) return hist.front();
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= hist.size()) return hist.back();
    return hist[lo] + frac * (hist[lo + 1] - hist[lo]);
}

} // namespace

std::vector<double> mackey_glass(const MackeyGlassParams& params, int length, std::uint64_t /*seed*/) {
    if (params.tau <= 0.0) throw std::invalid_argument("mackey_glass: tau must be > 0");
    if (length < 0) throw std::invalid_argument("mackey_glass: negative length");

    const double dt = 0.1;
    const int substeps = 10; // one emitted sample per 1.0 time unit
    const double delay_steps = params.tau / dt;
    const int total_samples = params.warmup + length;

    std::vector<double> hist;
    hist.reserve(static_cast<std::size_t>(total_samples) * substeps + static_cast<std::size_t>(delay_steps) + 2);
    const int prefill = static_cast<int>(std::ceil(delay_steps)) + 1;
    hist.assign(prefill, 1.2);

    auto f = [&](double z, double z_del) {
        return params.beta * z_del / (1.0 + std::pow(z_del, params.n)) - params.gamma * z;
    };

    std::vector<double> raw;
    raw.reserve(total_samples);
    double z = hist.back();
    for (int s = 0; s < total_samples; ++s) {
        for (int k = 0; k < substeps; ++k) {
            // RK4 with the delayed term interpolated at stage times
            const double zd0 = delayed_value(hist, delay_steps);
            const double zd1 = delayed_value(hist, delay_steps - 0.5);
            const double zd2 = delayed_value(hist, delay_steps - 1.0);
            const double k1 = f(z, zd0);
            const double k2 = f(z + 0.5 * dt * k1, zd1);
            const double k3 = f(z + 0.5 * dt * k2, zd1);
            const double k4 = f(z + dt * k3, zd2);
            z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            hist.push_back(z);
        }
        raw.push_back(z);
    }

    if (!params.rescale) return {raw.begin() + params.warmup, raw.end()};

    double lo = raw.empty() ? 0.0 : raw[0];
    double hi = lo;
    for (int s = 0; s < std::max(1, params.warmup); ++s) {
        if (s >= total_samples) break;
        lo = std::min(lo, raw[s]);
        hi = std::max(hi, raw[s]);
    }
    const double span = hi - lo;
    std::vector<double> out;
    out.reserve(length);
    for (int s = params.warmup; s < total_samples; ++s) {
        double v = span > 1e-12 ? 2.0 * (raw[s] - lo) / span - 1.0 : 0.0;
        out.push_back(std::clamp(v, -1.0, 1.0));
    }
    return out;
}

std::vector<double> periodic(Waveform kind, double period, int length) {
    if (period <= 0.0) throw std::invalid_argument("periodic: period must be > 0");
    std::vector<double> out(length);
    for (int t = 0; t < length; ++t) {
        if (kind == Waveform::Sine) {
            out[t] = std::sin(2.0 * M_PI * static_cast<double>(t) / period);
        } else {
            const double phase = std::fmod(static_cast<double>(t), period);
            out[t] = phase < period / 2.0 ? 1.0 : -1.0;
        }
    }
    return out;
}

std::vector<double> random_walk(double sigma_step, int length, std::uint64_t seed) {
    std::vector<double> out(length);
    double v = 0.0;
    for (int t = 0; t < length; ++t) {
        v += sigma_step == 0.0 ? 0.0 : sigma_step * rng::gaussian(seed, static_cast<std::uint64_t>(t), 0);
        // reflect into [-1, 1]
        while (v > 1.0 || v < -1.0) {
            if (v > 1.0) v = 2.0 - v;
            if (v < -1.0) v = -2.0 - v;
        }
        out[t] = v;
    }
    return out;
}

std::vector<double> delayed(const std::vector<double>& u, int d) {
    if (d < 0) throw std::invalid_argument("delayed: negative delay");
    std::vector<double> y(u.size(), 0.0);
    for (std::size_t t = static_cast<std::size_t>(d); t < u.size(); ++t) y[t] = u[t - d];
    return y;
}

Schedule schedule(const std::vector<ScheduleSegment>& segments) {
    Schedule s;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i > 0) s.boundaries.push_back(static_cast<int>(s.values.size()));
        s.values.insert(s.values.end(), segments[i].values.begin(), segments[i].values.end());
    }
    return s;
}

std::vector<double> TaskStream::generate(int length) const {
    if (kind == "mackey_glass") return mackey_glass(mg, length, seed);
    if (kind == "sine") return periodic(Waveform::Sine, period, length);
    if (kind == "square") return periodic(Waveform::Square, period, length);
    if (kind == "random_walk") return random_walk(sigma_step, length, seed);
    throw std::invalid_argument("TaskStream: unknown kind '" + kind + "'");
}

double nrmse(const std::vector<double>& prediction, const std::vector<double>& target) {
    if (prediction.size() != target.size() || target.empty())
        throw std::invalid_argument("nrmse: length mismatch");
    double se = 0.0, mean = 0.0;
    for (double y : target) mean += y;
    mean /= static_cast<double>(target.size());
    double var = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        se += (prediction[i] - target[i]) * (prediction[i] - target[i]);
        var += (target[i] - mean) * (target[i] - mean);
    }
    se /= static_cast<double>(target.size());
    var /= static_cast<double>(target.size());
    if (var <= 0.0) return std::sqrt(se) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::sqrt(se / var);
}

} // namespace trophic::tasks
