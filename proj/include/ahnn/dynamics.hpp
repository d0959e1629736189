#ifndef AHNN_DYNAMICS_HPP
#define AHNN_DYNAMICS_HPP

// Floating-point models of the three-neuron Hopfield network, its stimulus
// generators and a fixed-step fourth-order Runge-Kutta integrator.

#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ahnn {

struct StateVector {
    std::array<double, 3> x{};

    constexpr double& operator[](std::size_t i) { return x[i]; }
    constexpr double operator[](std::size_t i) const { return x[i]; }

    constexpr StateVector& operator+=(const StateVector& o) {
        for (std::size_t i = 0; i < 3; ++i) x[i] += o.x[i];
        return *this;
    }
    constexpr StateVector& operator-=(const StateVector& o) {
        for (std::size_t i = 0; i < 3; ++i) x[i] -= o.x[i];
        return *this;
    }
    constexpr StateVector& operator*=(double s) {
        for (auto& v : x) v *= s;
        return *this;
    }

    friend constexpr StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
    friend constexpr StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
    friend constexpr StateVector operator*(double s, StateVector a) { return a *= s; }
    friend constexpr bool operator==(const StateVector&, const StateVector&) = default;

    bool finite() const {
        return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
    }
    double norm() const { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }
};

/// Synaptic weights of the base network. Only w23 (= k) is adjustable.
struct NetworkParams {
    double k = 1.15;

    static constexpr double w11 = 2.2, w12 = -1.2, w13 = 0.5;
    static constexpr double w21 = 2.0, w22 = 1.5;
    static constexpr double w31 = -5.0, w32 = 0.0, w33 = -1.0;

    /// Weight matrix with the WMS factor applied to w12, w13, w21, w31.
    constexpr std::array<std::array<double, 3>, 3> weights(double wms = 1.0) const {
        return {{{w11, w12 * wms, w13 * wms},
                 {w21 * wms, w22, k},
                 {w31 * wms, w32, w33}}};
    }
};

/// True when floor(omega * t / pi) is even, i.e. sin(omega t) is in its
/// non-negative half period. Zeros of sin belong to the half period they open.
inline bool square_wave_high(double t, double omega) {
    const double phase = std::floor(omega * t / std::numbers::pi);
    return std::fmod(phase, 2.0) == 0.0;
}

/// Weight-matrix stimulus A * sign(sin(omega t)).
inline double wms_value(double t, double amplitude, double omega) {
    return square_wave_high(t, omega) ? amplitude : -amplitude;
}

/// State-variable stimulus A_i/2 * (sign(sin(omega_i t)) + 1); takes values {0, A_i}.
inline double svs_value(double t, double amplitude, double omega) {
    return square_wave_high(t, omega) ? amplitude : 0.0;
}

struct SquareWave {
    double amplitude = 1.0;
    double omega = 0.01;
};

/// Which stimuli drive the network. An absent square wave is replaced by a
/// constant hold value (1 for the weight stimulus, 0 for state offsets), so a
/// default-constructed program reproduces the unstimulated network.
struct StimulusProgram {
    std::optional<SquareWave> wms;
    double wms_hold = 1.0;
    std::array<std::optional<SquareWave>, 3> svs{};
    std::array<double, 3> svs_hold{0.0, 0.0, 0.0};
    /// Constant stimulus A'_1 on the first neuron's leak term.
    std::optional<double> cs;

    double weight_factor(double t) const {
        return wms ? wms_value(t, wms->amplitude, wms->omega) : wms_hold;
    }
    double offset(std::size_t axis, double t) const {
        const auto& s = svs[axis];
        return s ? svs_value(t, s->amplitude, s->omega) : svs_hold[axis];
    }
    /// SVS amplitudes (0 for absent axes); the equilibrium lattice spacing.
    std::array<double, 3> amplitudes() const {
        std::array<double, 3> a{};
        for (std::size_t i = 0; i < 3; ++i)
            a[i] = svs[i] ? svs[i]->amplitude : svs_hold[i];
        return a;
    }
};

struct Tanh {
    double operator()(double v) const { return std::tanh(v); }
};

/// x' = -x + W tanh(x) for the unstimulated network.
template <class Activation = Tanh>
StateVector hnn_rhs(const StateVector& s, double k, Activation act = {}) {
    const auto w = NetworkParams{k}.weights();
    const double t1 = act(s[0]), t2 = act(s[1]), t3 = act(s[2]);
    StateVector d;
    for (std::size_t i = 0; i < 3; ++i)
        d[i] = -s[i] + w[i][0] * t1 + w[i][1] * t2 + w[i][2] * t3;
    return d;
}

/// Vector field of the stimulated network at time t.
///
/// Without a constant stimulus each axis sees x_i + P_i(t) in both the leak
/// and the activation. With a constant stimulus A'_1 the first leak term
/// becomes -(x_1 - A'_1) while P_1(t) stays inside the activation only.
template <class Activation = Tanh>
StateVector ahnn_rhs(const StateVector& s, double t, const NetworkParams& p,
                     const StimulusProgram& stim, Activation act = {}) {
    const auto w = p.weights(stim.weight_factor(t));
    StateVector arg, leak;
    for (std::size_t i = 0; i < 3; ++i) {
        arg[i] = s[i] + stim.offset(i, t);
        leak[i] = arg[i];
    }
    if (stim.cs) leak[0] = s[0] - *stim.cs;

    const double t1 = act(arg[0]), t2 = act(arg[1]), t3 = act(arg[2]);
    StateVector d;
    for (std::size_t i = 0; i < 3; ++i)
        d[i] = -leak[i] + w[i][0] * t1 + w[i][1] * t2 + w[i][2] * t3;
    return d;
}

/// Classical RK4; `rhs(state, time)` is evaluated at t, t+h/2, t+h/2, t+h.
template <class State, class Rhs>
State rk4_step(const State& s, double t, double h, Rhs&& rhs) {
    const double half = 0.5 * h;
    const State k1 = rhs(s, t);
    const State k2 = rhs(s + half * k1, t + half);
    const State k3 = rhs(s + half * k2, t + half);
    const State k4 = rhs(s + h * k3, t + h);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Sample {
    double t = 0.0;
    StateVector x;
};

struct Trajectory {
    double h = 0.0;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    const Sample& operator[](std::size_t n) const { return samples[n]; }
};

inline constexpr double divergence_limit = 1e6;

/// Integrates `rhs` for `steps` RK4 steps, sampling every step. Time is
/// always n*h, never accumulated.
template <class Rhs>
Trajectory integrate(const StateVector& initial, Rhs&& rhs, double h, std::size_t steps) {
    if (steps < 1) throw RangeError("integrate: steps must be >= 1");
    if (!(h > 0.0)) throw RangeError("integrate: h must be > 0");
    Trajectory traj{h, {}};
    traj.samples.reserve(steps + 1);
    traj.samples.push_back({0.0, initial});
    StateVector s = initial;
    for (std::size_t n = 0; n < steps; ++n) {
        s = rk4_step(s, static_cast<double>(n) * h, h, rhs);
        for (std::size_t i = 0; i < 3; ++i) {
            if (!std::isfinite(s[i]) || std::abs(s[i]) > divergence_limit)
                throw Divergence(n + 1, "trajectory diverged at step " + std::to_string(n + 1));
        }
        traj.samples.push_back({static_cast<double>(n + 1) * h, s});
    }
    return traj;
}

template <class Activation = Tanh>
Trajectory simulate(const StateVector& initial, const NetworkParams& p,
                    const StimulusProgram& stim, double h, std::size_t steps,
                    Activation act = {}) {
    return integrate(
        initial,
        [&](const StateVector& s, double t) { return ahnn_rhs(s, t, p, stim, act); },
        h, steps);
}

struct MirrorDiff {
    std::vector<double> dx1, dx2, dx3;
};

/// x_i(t) - x'_i(t) where x runs with P(t) = +1 and x' with P(t) = -1 from
/// the same initial condition.
inline MirrorDiff mirror_diff(const StateVector& initial, const NetworkParams& p,
                              double h, std::size_t steps) {
    StimulusProgram plus, minus;
    plus.wms_hold = 1.0;
    minus.wms_hold = -1.0;
    const auto a = simulate(initial, p, plus, h, steps);
    const auto b = simulate(initial, p, minus, h, steps);
    MirrorDiff d;
    d.dx1.reserve(a.size());
    d.dx2.reserve(a.size());
    d.dx3.reserve(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        d.dx1.push_back(a[n].x[0] - b[n].x[0]);
        d.dx2.push_back(a[n].x[1] - b[n].x[1]);
        d.dx3.push_back(a[n].x[2] - b[n].x[2]);
    }
    return d;
}

/// CSV with header `t,x1,x2,x3`, 17 significant digits.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << "t,x1,x2,x3\n" << std::setprecision(17);
    for (const auto& s : traj.samples)
        os << s.t << ',' << s.x[0] << ',' << s.x[1] << ',' << s.x[2] << '\n';
    os.flags(flags);
    os.precision(prec);
}

} // namespace ahnn

#endif // AHNN_DYNAMICS_HPP
