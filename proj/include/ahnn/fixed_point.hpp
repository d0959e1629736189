#ifndef AHNN_FIXED_POINT_HPP
#define AHNN_FIXED_POINT_HPP

// Bit-exact Q5.26 datapath: 32-bit two's-complement words with 26 fraction
// bits, a piecewise Taylor tanh and a fixed-point RK4 step.
//
// Every arithmetic operation below is spelled out in a fixed order; the raw
// word sequence of a simulation is therefore identical on every platform.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"

namespace ahnn {

inline constexpr int fraction_bits = 26;
inline constexpr double fixed_scale = 67108864.0; // 2^26

struct FixedWord {
    std::int32_t raw = 0;

    constexpr std::uint32_t bits() const { return static_cast<std::uint32_t>(raw); }
    friend constexpr bool operator==(FixedWord, FixedWord) = default;
    friend constexpr auto operator<=>(FixedWord a, FixedWord b) { return a.raw <=> b.raw; }
};

inline constexpr FixedWord fixed_one{1 << fraction_bits};

/// floor(v * 2^26); v must lie in [-32, 32).
inline FixedWord to_fixed(double v) {
    if (!(v >= -32.0 && v < 32.0))
        throw RangeError("to_fixed: value outside [-32, 32)");
    return {static_cast<std::int32_t>(std::floor(v * fixed_scale))};
}

constexpr double from_fixed(FixedWord w) { return static_cast<double>(w.raw) / fixed_scale; }

/// Wrapping 32-bit sum.
constexpr FixedWord fx_add(FixedWord a, FixedWord b) {
    return {static_cast<std::int32_t>(static_cast<std::uint32_t>(a.raw) +
                                      static_cast<std::uint32_t>(b.raw))};
}

constexpr FixedWord fx_neg(FixedWord a) {
    return {static_cast<std::int32_t>(0u - static_cast<std::uint32_t>(a.raw))};
}

constexpr FixedWord fx_sub(FixedWord a, FixedWord b) { return fx_add(a, fx_neg(b)); }

/// Full 64-bit product, arithmetic shift right by 26 (floor), low 32 bits kept.
constexpr FixedWord fx_mul(FixedWord a, FixedWord b) {
    const std::int64_t p = static_cast<std::int64_t>(a.raw) * static_cast<std::int64_t>(b.raw);
    return {static_cast<std::int32_t>(p >> fraction_bits)};
}

inline std::string to_hex(FixedWord w) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08X", w.bits());
    return buf;
}

// ---------------------------------------------------------------------------
// tanh

struct TaylorCoefficients {
    FixedWord c3, c5, c7, c9; // 1/3, 2/15, 17/315, 62/2835
};

inline const TaylorCoefficients& taylor_coefficients() {
    static const TaylorCoefficients c{to_fixed(1.0 / 3.0), to_fixed(2.0 / 15.0),
                                      to_fixed(17.0 / 315.0), to_fixed(62.0 / 2835.0)};
    return c;
}

inline const FixedWord& default_breakpoint() {
    static const FixedWord a = to_fixed(1.34);
    return a;
}

/// Piecewise Taylor tanh: -1 for x <= -a, +1 for x >= a, otherwise the
/// degree-9 odd polynomial. The polynomial is evaluated on |x| by Horner's
/// scheme over u = |x|^2,
///     p = |x| * (1 - u*(c3 - u*(c5 - u*(c7 - u*c9)))),
/// clamped to 1, and the sign of x applied last, which makes the word-level
/// result exactly odd.
inline FixedWord tanh_taylor(FixedWord x, FixedWord a = default_breakpoint()) {
    if (x >= a) return fixed_one;
    if (x <= fx_neg(a)) return fx_neg(fixed_one);
    const auto& c = taylor_coefficients();
    const bool negative = x.raw < 0;
    const FixedWord m = negative ? fx_neg(x) : x;
    const FixedWord u = fx_mul(m, m);
    FixedWord acc = c.c9;
    acc = fx_sub(c.c7, fx_mul(u, acc));
    acc = fx_sub(c.c5, fx_mul(u, acc));
    acc = fx_sub(c.c3, fx_mul(u, acc));
    acc = fx_sub(fixed_one, fx_mul(u, acc));
    FixedWord r = fx_mul(m, acc);
    if (r > fixed_one) r = fixed_one;
    return negative ? fx_neg(r) : r;
}

/// The same piecewise polynomial in double precision.
inline double taylor_poly(double x) {
    const double u = x * x;
    return x * (1.0 - u * (1.0 / 3.0 - u * (2.0 / 15.0 - u * (17.0 / 315.0 - u * 62.0 / 2835.0))));
}

struct TaylorTanh {
    double breakpoint = 1.34;
    double operator()(double x) const {
        if (x >= breakpoint) return 1.0;
        if (x <= -breakpoint) return -1.0;
        return std::clamp(taylor_poly(x), -1.0, 1.0);
    }
};

/// Adaptive Simpson quadrature of f over [lo, hi] to absolute tolerance tol.
template <class F>
double adaptive_simpson(F&& f, double lo, double hi, double tol, int max_depth = 50) {
    struct Rec {
        F& f;
        double run(double a, double b, double fa, double fm, double fb, double whole,
                   double eps, int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double diff = left + right - whole;
            if (depth <= 0 || std::abs(diff) <= 15.0 * eps)
                return left + right + diff / 15.0;
            return run(a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
                   run(m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
        }
    } rec{f};
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    return rec.run(lo, hi, fa, fm, fb, whole, tol, max_depth);
}

/// delta(a) = 2 |int_0^a (p(x) - tanh x) dx| + 2 ln(1 + e^{-2a}); the L1
/// distance between the piecewise polynomial and tanh over the real line.
inline double fitting_error(double a) {
    if (!(a > 0.0 && a <= 4.0)) throw RangeError("fitting_error: a must lie in (0, 4]");
    const double body = adaptive_simpson(
        [](double x) { return taylor_poly(x) - std::tanh(x); }, 0.0, a, 1e-13);
    return 2.0 * std::abs(body) + 2.0 * std::log1p(std::exp(-2.0 * a));
}

/// Golden-section search for the breakpoint minimizing fitting_error on [1, 2].
inline double find_optimal_a(double lo = 1.0, double hi = 2.0, double tol = 1e-4) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
    double fc = fitting_error(c), fd = fitting_error(d);
    while (hi - lo > tol) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = fitting_error(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = fitting_error(d);
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// fixed-point network

struct FixedState {
    std::array<FixedWord, 3> x{};

    FixedWord& operator[](std::size_t i) { return x[i]; }
    FixedWord operator[](std::size_t i) const { return x[i]; }
    friend bool operator==(const FixedState&, const FixedState&) = default;

    static FixedState from(const StateVector& s) {
        return {{to_fixed(s[0]), to_fixed(s[1]), to_fixed(s[2])}};
    }
    StateVector to_real() const {
        return StateVector{{from_fixed(x[0]), from_fixed(x[1]), from_fixed(x[2])}};
    }
};

/// Counter-driven square wave: the output register toggles every `period`
/// iterations, starting high at iteration 0.
struct FixedSquareWave {
    FixedWord high;
    FixedWord low;
    std::uint64_t period = 1;

    FixedWord at(std::uint64_t n) const { return (n / period) % 2 == 0 ? high : low; }
};

/// round(pi / (omega * h)): iterations per half period.
inline std::uint64_t toggle_period(double omega, double h) {
    if (!(omega > 0.0) || !(h > 0.0)) throw RangeError("toggle_period: omega and h must be > 0");
    const double n = std::round(std::numbers::pi / (omega * h));
    return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

/// Pre-converted words for one fixed-point network configuration.
struct FixedProgram {
    FixedWord w11, w12, w13, w21, w22, w23, w31, w33;
    FixedWord h, h_half, h_third, h_sixth;
    FixedWord breakpoint = default_breakpoint();
    FixedSquareWave wms;                  // P(t) in {-A, A} or a held constant
    std::array<FixedSquareWave, 3> svs{}; // P_i(t) in {0, A_i} or held

    FixedWord weight_factor(std::uint64_t n) const { return wms.at(n); }
    FixedWord offset(std::size_t axis, std::uint64_t n) const { return svs[axis].at(n); }

    /// Square waves become counters toggling every round(pi/(omega h))
    /// iterations; held stimuli become constant registers.
    static FixedProgram from(const NetworkParams& p, const StimulusProgram& stim, double h,
                             double breakpoint = 1.34) {
        if (stim.cs) throw RangeError("fixed-point engine does not model the constant stimulus");
        FixedProgram f;
        f.w11 = to_fixed(NetworkParams::w11);
        f.w12 = to_fixed(NetworkParams::w12);
        f.w13 = to_fixed(NetworkParams::w13);
        f.w21 = to_fixed(NetworkParams::w21);
        f.w22 = to_fixed(NetworkParams::w22);
        f.w23 = to_fixed(p.k);
        f.w31 = to_fixed(NetworkParams::w31);
        f.w33 = to_fixed(NetworkParams::w33);
        f.h = to_fixed(h);
        f.h_half = to_fixed(h / 2.0);
        f.h_third = to_fixed(h / 3.0);
        f.h_sixth = to_fixed(h / 6.0);
        f.breakpoint = to_fixed(breakpoint);
        if (stim.wms) {
            const FixedWord a = to_fixed(stim.wms->amplitude);
            f.wms = {a, fx_neg(a), toggle_period(stim.wms->omega, h)};
        } else {
            const FixedWord v = to_fixed(stim.wms_hold);
            f.wms = {v, v, 1};
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (stim.svs[i]) {
                f.svs[i] = {to_fixed(stim.svs[i]->amplitude), FixedWord{},
                            toggle_period(stim.svs[i]->omega, h)};
            } else {
                const FixedWord v = to_fixed(stim.svs_hold[i]);
                f.svs[i] = {v, v, 1};
            }
        }
        return f;
    }
};

namespace detail {

inline constexpr std::int64_t guard_max = INT32_MAX - 2;
inline constexpr std::int64_t guard_min = INT32_MIN + 2;

/// fx_add that refuses to come within 2 ulp of the representable range.
inline FixedWord guarded_add(FixedWord a, FixedWord b, std::uint64_t n) {
    const std::int64_t s = static_cast<std::int64_t>(a.raw) + b.raw;
    if (s > guard_max || s < guard_min)
        throw Divergence(static_cast<std::size_t>(n),
                         "fixed-point overflow at iteration " + std::to_string(n));
    return {static_cast<std::int32_t>(s)};
}

} // namespace detail

/// Time derivative of the state words with the stimulus registers sampled at
/// iteration n. Canonical order:
///   c_i = x_i + P_i                                   (offset)
///   t_i = tanh_taylor(c_i)                            (activation)
///   g_x = ((-c_x) + P*(w12*t_y)) + P*(w13*t_z)        (weight-stimulus terms)
///   g_y = (-c_y) + P*(w21*t_x)
///   g_z = (-c_z) + P*(w31*t_x)
///   G_x = g_x + w11*t_x
///   G_y = (g_y + w22*t_y) + k*t_z
///   G_z = g_z + w33*t_z
inline FixedState fx_rhs(const FixedState& s, std::uint64_t n, const FixedProgram& f) {
    using detail::guarded_add;
    const FixedWord p = f.weight_factor(n);
    std::array<FixedWord, 3> c{}, t{};
    for (std::size_t i = 0; i < 3; ++i) {
        c[i] = guarded_add(s[i], f.offset(i, n), n);
        t[i] = tanh_taylor(c[i], f.breakpoint);
    }
    FixedWord gx = guarded_add(fx_neg(c[0]), fx_mul(p, fx_mul(f.w12, t[1])), n);
    gx = guarded_add(gx, fx_mul(p, fx_mul(f.w13, t[2])), n);
    const FixedWord gy = guarded_add(fx_neg(c[1]), fx_mul(p, fx_mul(f.w21, t[0])), n);
    const FixedWord gz = guarded_add(fx_neg(c[2]), fx_mul(p, fx_mul(f.w31, t[0])), n);

    FixedState d;
    d[0] = guarded_add(gx, fx_mul(f.w11, t[0]), n);
    d[1] = guarded_add(guarded_add(gy, fx_mul(f.w22, t[1]), n), fx_mul(f.w23, t[2]), n);
    d[2] = guarded_add(gz, fx_mul(f.w33, t[2]), n);
    return d;
}

/// Textbook four-stage RK4 in fixed point. Stage states are x + (h/2)k1,
/// x + (h/2)k2, x + h k3; the update accumulates
///   x + (h/6)k1 + (h/3)k2 + (h/3)k3 + (h/6)k4
/// left to right so no intermediate sum leaves the Q5.26 range.
inline FixedState fx_rk4_step(const FixedState& s, std::uint64_t n, const FixedProgram& f) {
    using detail::guarded_add;
    auto axpy = [&](const FixedState& base, FixedWord scale, const FixedState& k) {
        FixedState out;
        for (std::size_t i = 0; i < 3; ++i) out[i] = guarded_add(base[i], fx_mul(scale, k[i]), n);
        return out;
    };
    const FixedState k1 = fx_rhs(s, n, f);
    const FixedState k2 = fx_rhs(axpy(s, f.h_half, k1), n, f);
    const FixedState k3 = fx_rhs(axpy(s, f.h_half, k2), n, f);
    const FixedState k4 = fx_rhs(axpy(s, f.h, k3), n, f);
    FixedState out = axpy(s, f.h_sixth, k1);
    out = axpy(out, f.h_third, k2);
    out = axpy(out, f.h_third, k3);
    out = axpy(out, f.h_sixth, k4);
    return out;
}

struct FixedSample {
    FixedState x;
    bool p1_nonzero = false;
    bool p3_nonzero = false;
};

/// Runs `total_steps` iterations, calling `sink(n, sample)` after iteration n
/// with the state it produced and the SVS flags that were active during it.
template <class Sink>
void fx_run(const FixedState& initial, const FixedProgram& f, std::uint64_t total_steps,
            Sink&& sink) {
    if (total_steps < 1) throw RangeError("fx_run: total_steps must be >= 1");
    FixedState s = initial;
    for (std::uint64_t n = 0; n < total_steps; ++n) {
        const bool p1 = f.offset(0, n).raw != 0;
        const bool p3 = f.offset(2, n).raw != 0;
        s = fx_rk4_step(s, n, f);
        sink(n, FixedSample{s, p1, p3});
    }
}

inline std::vector<FixedSample> fx_simulate(const FixedState& initial, const FixedProgram& f,
                                            std::uint64_t total_steps) {
    std::vector<FixedSample> out;
    out.reserve(static_cast<std::size_t>(total_steps));
    fx_run(initial, f, total_steps, [&](std::uint64_t, const FixedSample& s) { out.push_back(s); });
    return out;
}

/// Test-vector lines `step_index,x1_hex,x2_hex,x3_hex`; step 0 is the initial
/// state, step n the state after n iterations.
inline void write_test_vectors(std::ostream& os, const FixedState& initial, const FixedProgram& f,
                               std::uint64_t steps) {
    auto line = [&](std::uint64_t n, const FixedState& s) {
        os << n << ',' << to_hex(s[0]) << ',' << to_hex(s[1]) << ',' << to_hex(s[2]) << '\n';
    };
    line(0, initial);
    fx_run(initial, f, steps, [&](std::uint64_t n, const FixedSample& s) { line(n + 1, s.x); });
}

} // namespace ahnn

#endif // AHNN_FIXED_POINT_HPP
