#include "trophic/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "trophic/rng.hpp"

namespace trophic {

namespace {
constexpr double kClamp = 1.0 - 1e-9;
}

DynamicsParams DynamicsParams::from_tau_fast(double tau_fast, double noise_sigma, double dt) {
    DynamicsParams p;
    p.dt = dt;
    p.tau_fast = tau_fast;
    p.tau_elig = 10.0 * tau_fast;
    p.tau_act = 5000.0 * p.tau_elig;
    p.noise_sigma = noise_sigma;
    p.refresh_alphas();
    return p;
}

void DynamicsParams::refresh_alphas() {
    alpha_fast = std::exp(-dt / tau_fast);
    alpha_elig = std::exp(-dt / tau_elig);
    alpha_act = std::exp(-dt / tau_act);
}

void DynamicsParams::validate() const {
    if (dt <= 0.0 || tau_fast <= 0.0) throw std::invalid_argument("DynamicsParams: dt and tau_fast must be positive");
    if (std::abs(tau_elig - 10.0 * tau_fast) > 1e-9 * tau_elig)
        throw std::invalid_argument("DynamicsParams: tau_elig must equal 10 * tau_fast");
    if (std::abs(tau_act - 5000.0 * tau_elig) > 1e-9 * tau_act)
        throw std::invalid_argument("DynamicsParams: tau_act must equal 5000 * tau_elig");
    for (double a : {alpha_fast, alpha_elig, alpha_act})
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("DynamicsParams: alphas must lie in (0, 1)");
    if (noise_sigma < 0.0) throw std::invalid_argument("DynamicsParams: noise_sigma must be >= 0");
}

NetworkState NetworkState::zeros(int n, std::uint64_t seed) {
    NetworkState s;
    s.x.assign(n, 0.0);
    s.trc.assign(n, 0.0);
    s.a.assign(n, 0.0);
    s.step = 0;
    s.noise_seed = seed;
    return s;
}

double noise_sample(std::uint64_t seed, std::uint64_t step, std::uint64_t index, double sigma) {
    if (sigma == 0.0) return 0.0;
    return sigma * rng::gaussian(seed, step, index);
}

void update_traces(NetworkState& s, const DynamicsParams& p) {
    const std::size_t n = s.x.size();
    for (std::size_t i = 0; i < n; ++i) {
        s.trc[i] = p.alpha_elig * s.trc[i] + (1.0 - p.alpha_fast) * s.x[i];
        s.a[i] = p.alpha_act * s.a[i] + (1.0 - p.alpha_act) * std::abs(s.x[i]);
    }
}

void step(NetworkState& s, const BlockSparseMatrix& w, const DenseMatrix& w_in,
          std::span<const double> u, std::span<const double> b, const DynamicsParams& p) {
    const int n = w.layout().neurons();
    if (static_cast<int>(s.x.size()) != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("step: state/bias dimension mismatch");

    std::vector<double> pre(n, 0.0);
    w.matvec_transpose(s.x, pre);
    if (w_in.rows > 0) {
        std::vector<double> drive(n, 0.0);
        w_in.matvec(u, drive);
        for (int i = 0; i < n; ++i) pre[i] += drive[i];
    }
    for (int i = 0; i < n; ++i) {
        pre[i] += b[i];
        if (!std::isfinite(pre[i]))
            throw std::runtime_error("step: non-finite pre-activation at neuron " + std::to_string(i));
    }

    const double af = p.alpha_fast;
    for (int i = 0; i < n; ++i) {
        double xi = af * s.x[i] + (1.0 - af) * std::tanh(pre[i]) +
                    noise_sample(s.noise_seed, s.step, static_cast<std::uint64_t>(i), p.noise_sigma);
        if (xi > kClamp) xi = kClamp;
        if (xi < -kClamp) xi = -kClamp;
        s.x[i] = xi;
    }
    update_traces(s, p);
    ++s.step;
}

std::vector<double> one_step_jacobian(const BlockSparseMatrix& w, std::span<const double> x,
                                      const DenseMatrix& w_in, std::span<const double> u,
                                      std::span<const double> b, const DynamicsParams& p) {
    const int n = w.layout().neurons();
    std::vector<double> pre(n, 0.0);
    w.matvec_transpose(x, pre);
    if (w_in.rows > 0) {
        std::vector<double> drive(n, 0.0);
        w_in.matvec(u, drive);
        for (int i = 0; i < n; ++i) pre[i] += drive[i];
    }
    std::vector<double> gate(n);
    for (int i = 0; i < n; ++i) {
        const double h = std::tanh(pre[i] + b[i]);
        gate[i] = (1.0 - p.alpha_fast) * (1.0 - h * h);
    }

    std::vector<double> dense = w.to_dense();
    std::vector<double> jac(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c)
            jac[static_cast<std::size_t>(r) * n + c] = gate[r] * dense[static_cast<std::size_t>(c) * n + r];
        jac[static_cast<std::size_t>(r) * n + r] += p.alpha_fast;
    }
    return jac;
}

namespace {

// v_out = J v_in without materializing J.
void apply_jacobian(const BlockSparseMatrix& w, std::span<const double> gate, double alpha_fast,
                    std::span<const double> v, std::span<double> out, std::span<double> scratch) {
    w.matvec_transpose(v, scratch);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = alpha_fast * v[i] + gate[i] * scratch[i];
}

// Eigenvalue moduli of a real 2x2 matrix via the quadratic formula.
double max_abs_eig_2x2(double a, double b, double c, double d) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return std::max(std::abs(tr / 2.0 + root), std::abs(tr / 2.0 - root));
    }
    // complex pair: |lambda| = sqrt(det)
    return std::sqrt(std::abs(det));
}

} // namespace

SpectralRadiusResult spectral_radius(const BlockSparseMatrix& w, std::span<const double> x,
                                     const DenseMatrix& w_in, std::span<const double> u,
                                     std::span<const double> b, const DynamicsParams& p,
                                     int iters, double tol) {
    const int n = w.layout().neurons();
    std::vector<double> pre(n, 0.0);
    w.matvec_transpose(x, pre);
    if (w_in.rows > 0) {
        std::vector<double> drive(n, 0.0);
        w_in.matvec(u, drive);
        for (int i = 0; i < n; ++i) pre[i] += drive[i];
    }
    std::vector<double> gate(n);
    for (int i = 0; i < n; ++i) {
        const double h = std::tanh(pre[i] + b[i]);
        gate[i] = (1.0 - p.alpha_fast) * (1.0 - h * h);
    }

    // Two-column orthogonal iteration with a 2x2 Rayleigh-Ritz projection;
    // a single power vector stalls on complex-conjugate dominant pairs.
    std::vector<double> q0(n), q1(n), z0(n), z1(n), scratch(n);
    for (int i = 0; i < n; ++i) {
        q0[i] = rng::gaussian(0x5eedull, 0, static_cast<std::uint64_t>(i));
        q1[i] = rng::gaussian(0x5eedull, 1, static_cast<std::uint64_t>(i));
    }
    auto orthonormalize = [&](std::vector<double>& u0, std::vector<double>& u1) {
        double n0 = norm2(u0);
        if (n0 == 0.0) { u0.assign(n, 0.0); u0[0] = 1.0; n0 = 1.0; }
        for (int i = 0; i < n; ++i) u0[i] /= n0;
        const double proj = dot(u1, u0);
        for (int i = 0; i < n; ++i) u1[i] -= proj * u0[i];
        double n1 = norm2(u1);
        if (n1 < 1e-300) {
            for (int i = 0; i < n; ++i) u1[i] = rng::gaussian(0xa1744eull, 2, static_cast<std::uint64_t>(i));
            const double pr = dot(u1, u0);
            for (int i = 0; i < n; ++i) u1[i] -= pr * u0[i];
            n1 = norm2(u1);
        }
        for (int i = 0; i < n; ++i) u1[i] /= n1;
    };
    orthonormalize(q0, q1);

    SpectralRadiusResult res;
    double prev = -1.0;
    for (int it = 0; it < iters; ++it) {
        apply_jacobian(w, gate, p.alpha_fast, q0, z0, scratch);
        apply_jacobian(w, gate, p.alpha_fast, q1, z1, scratch);
        // projected operator in the current orthonormal basis
        const double a00 = dot(q0, z0), a01 = dot(q0, z1);
        const double a10 = dot(q1, z0), a11 = dot(q1, z1);
        const double rho = max_abs_eig_2x2(a00, a01, a10, a11);
        res.value = rho;
        res.iterations = it + 1;
        if (prev >= 0.0 && std::abs(rho - prev) <= tol * std::max(rho, 1e-12)) {
            res.converged = true;
            break;
        }
        prev = rho;
        q0 = z0;
        q1 = z1;
        orthonormalize(q0, q1);
    }
    return res;
}

} // namespace trophic
