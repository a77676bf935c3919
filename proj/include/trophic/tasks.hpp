#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trophic::tasks {

struct MackeyGlassParams {
    double tau = 17.0;
    double beta = 0.2;
    double gamma = 0.1;
    double n = 10.0;
    int warmup = 500;     // discarded samples (also the rescaling window)
    bool rescale = true;  // affine map to [-1, 1] using warmup min/max
};

/// Mackey-Glass delay system integrated by RK4 at dt = 0.1 with linear
/// interpolation for the delayed term, sampled every 1.0 time unit. History
/// is initialized to the constant 1.2.
std::vector<double> mackey_glass(const MackeyGlassParams& params, int length, std::uint64_t seed);

enum class Waveform { Sine, Square };

std::vector<double> periodic(Waveform kind, double period, int length);

/// Gaussian-increment walk reflected into [-1, 1], started at 0.
std::vector<double> random_walk(double sigma_step, int length, std::uint64_t seed);

/// y_t = u_{t-d}, zero-padded for t < d.
std::vector<double> delayed(const std::vector<double>& u, int d);

struct ScheduleSegment {
    std::vector<double> values;
};

struct Schedule {
    std::vector<double> values;
    std::vector<int> boundaries; // start index of each segment after the first
};

Schedule schedule(const std::vector<ScheduleSegment>& segments);

/// Declarative stream description used by configs; same (kind, params, seed)
/// always generates the identical sequence.
struct TaskStream {
    std::string kind = "sine"; // mackey_glass | sine | square | random_walk
    double period = 50.0;      // periodic tasks
    double sigma_step = 0.2;   // random walk
    MackeyGlassParams mg;
    std::uint64_t seed = 0;

    std::vector<double> generate(int length) const;
};

/// Root-mean-square error divided by the target standard deviation.
double nrmse(const std::vector<double>& prediction, const std::vector<double>& target);

} // namespace trophic::tasks
