#ifndef AHNN_ANALYSIS_HPP
#define AHNN_ANALYSIS_HPP

// Dynamics characterization: Jacobians, equilibrium spectra, Lyapunov
// exponents, bifurcation sweeps, boundedness and scroll counting.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"

namespace ahnn {

using Complex = std::complex<double>;

struct Matrix3 {
    std::array<std::array<double, 3>, 3> m{};

    double& operator()(std::size_t r, std::size_t c) { return m[r][c]; }
    double operator()(std::size_t r, std::size_t c) const { return m[r][c]; }

    StateVector operator*(const StateVector& v) const {
        StateVector out;
        for (std::size_t r = 0; r < 3; ++r)
            out[r] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2];
        return out;
    }
    double trace() const { return m[0][0] + m[1][1] + m[2][2]; }
    double determinant() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
    /// Sum of the principal 2x2 minors.
    double minor_sum() const {
        return m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] -
               m[0][2] * m[2][0] + m[1][1] * m[2][2] - m[1][2] * m[2][1];
    }
};

using JacobianMatrix = Matrix3;

/// h(x) = tanh^2(x), the quantity the Jacobian entries are written in.
inline double tanh_sq(double x) {
    const double t = std::tanh(x);
    return t * t;
}

/// Analytic Jacobian of ahnn_rhs: J_ij = -delta_ij + W_ij(P) (1 - h(x_j + P_j)).
inline JacobianMatrix jacobian(const StateVector& s, double t, const NetworkParams& p,
                               const StimulusProgram& stim) {
    const auto w = p.weights(stim.weight_factor(t));
    JacobianMatrix j;
    for (std::size_t c = 0; c < 3; ++c) {
        const double slope = 1.0 - tanh_sq(s[c] + stim.offset(c, t));
        for (std::size_t r = 0; r < 3; ++r) j(r, c) = w[r][c] * slope;
    }
    for (std::size_t d = 0; d < 3; ++d) j(d, d) -= 1.0;
    return j;
}

/// Roots of the monic cubic l^3 + a2 l^2 + a1 l + a0, ordered real root
/// first, then the remaining pair (conjugates when complex) by imaginary part.
inline std::array<Complex, 3> solve_cubic(double a2, double a1, double a0) {
    auto poly = [&](double l) { return ((l + a2) * l + a1) * l + a0; };
    auto dpoly = [&](double l) { return (3.0 * l + 2.0 * a2) * l + a1; };

    const double p = a1 - a2 * a2 / 3.0;
    const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    double r;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        r = std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) - a2 / 3.0;
    } else {
        // three real roots; take the largest
        const double rho = std::sqrt(-p / 3.0);
        const double phi = std::acos(std::clamp(-q / (2.0 * rho * rho * rho), -1.0, 1.0));
        r = 2.0 * rho * std::cos(phi / 3.0) - a2 / 3.0;
    }
    for (int it = 0; it < 8; ++it) {
        const double d = dpoly(r);
        if (d == 0.0) break;
        const double step = poly(r) / d;
        r -= step;
        if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(r))) break;
    }
    // deflate: l^2 + b l + c
    const double b = a2 + r;
    const double c = a1 + r * b;
    const double dq = b * b - 4.0 * c;
    std::array<Complex, 3> roots;
    roots[0] = {r, 0.0};
    if (dq >= 0.0) {
        const double sq = std::sqrt(dq);
        const double q1 = -0.5 * (b + std::copysign(sq, b));
        const double s1 = q1;
        const double s2 = q1 != 0.0 ? c / q1 : 0.0;
        roots[1] = {std::min(s1, s2), 0.0};
        roots[2] = {std::max(s1, s2), 0.0};
    } else {
        const double im = 0.5 * std::sqrt(-dq);
        roots[1] = {-0.5 * b, -im};
        roots[2] = {-0.5 * b, im};
    }
    return roots;
}

inline std::array<Complex, 3> eigenvalues(const Matrix3& m) {
    return solve_cubic(-m.trace(), m.minor_sum(), -m.determinant());
}

/// Roots of l^3 + 0.3 l^2 + 2.1 l - 6k + 4.75, the reference characteristic
/// cubic for the origin.
inline std::array<Complex, 3> characteristic_roots(double k) {
    return solve_cubic(0.3, 2.1, 4.75 - 6.0 * k);
}

enum class EquilibriumKind { index1_saddle_focus, index2_saddle_focus, stable, other };

inline const char* to_string(EquilibriumKind k) {
    switch (k) {
    case EquilibriumKind::index1_saddle_focus: return "index-1 saddle-focus";
    case EquilibriumKind::index2_saddle_focus: return "index-2 saddle-focus";
    case EquilibriumKind::stable: return "stable";
    case EquilibriumKind::other: return "other";
    }
    return "other";
}

inline EquilibriumKind classify(const std::array<Complex, 3>& ev) {
    int unstable = 0;
    bool has_pair = false;
    for (const auto& l : ev) {
        if (l.real() > 0.0) ++unstable;
        if (l.imag() != 0.0) has_pair = true;
    }
    if (unstable == 0) return EquilibriumKind::stable;
    if (!has_pair) return EquilibriumKind::other;
    // the real root is always ev[0]
    if (unstable == 1 && ev[0].real() > 0.0) return EquilibriumKind::index1_saddle_focus;
    if (unstable == 2 && ev[0].real() < 0.0) return EquilibriumKind::index2_saddle_focus;
    return EquilibriumKind::other;
}

struct EquilibriumReport {
    StateVector location;
    /// Stimulus values frozen at this point: P and (P_1, P_2, P_3).
    double wms = 1.0;
    std::array<double, 3> svs{};
    std::array<Complex, 3> eigenvalues{};
    EquilibriumKind kind = EquilibriumKind::other;
};

/// Program with every stimulus frozen at the given values.
inline StimulusProgram frozen_program(double wms, const std::array<double, 3>& svs,
                                      std::optional<double> cs = std::nullopt) {
    StimulusProgram s;
    s.wms_hold = wms;
    s.svs_hold = svs;
    s.cs = cs;
    return s;
}

/// Newton iteration on ahnn_rhs with the stimulus frozen.
inline StateVector newton_equilibrium(StateVector x, const NetworkParams& p,
                                      const StimulusProgram& frozen, int max_iter = 100,
                                      double tol = 1e-13) {
    for (int it = 0; it < max_iter; ++it) {
        const StateVector f = ahnn_rhs(x, 0.0, p, frozen);
        if (f.norm() < tol) return x;
        const JacobianMatrix j = jacobian(x, 0.0, p, frozen);
        const double det = j.determinant();
        if (std::abs(det) < 1e-300) break;
        // Cramer's rule for J dx = -f
        StateVector dx;
        for (std::size_t c = 0; c < 3; ++c) {
            JacobianMatrix jc = j;
            for (std::size_t r = 0; r < 3; ++r) jc(r, c) = -f[r];
            dx[c] = jc.determinant() / det;
        }
        x += dx;
        if (!x.finite()) break;
    }
    if (ahnn_rhs(x, 0.0, p, frozen).norm() < 1e-10) return x;
    throw NonConvergence("Newton iteration did not converge to an equilibrium");
}

inline EquilibriumReport make_report(const StateVector& x, const NetworkParams& p,
                                     double wms, const std::array<double, 3>& svs) {
    EquilibriumReport r;
    r.location = x;
    r.wms = wms;
    r.svs = svs;
    r.eigenvalues = eigenvalues(jacobian(x, 0.0, p, frozen_program(wms, svs)));
    r.kind = classify(r.eigenvalues);
    return r;
}

/// Non-trivial equilibria of the unstimulated network with weight factor P,
/// refined from the seeds (-0.43P, -0.04, 1.2) and its point reflection.
inline std::array<StateVector, 2> base_foci(const NetworkParams& p, double wms_sign) {
    const StimulusProgram frozen = frozen_program(wms_sign, {0, 0, 0});
    const StateVector seed{{-0.43 * wms_sign, -0.04, 1.2}};
    const StateVector a = newton_equilibrium(seed, p, frozen);
    return {a, -1.0 * a};
}

/// Equilibria of the stimulated network.
///
/// Always returns the offset lattice {0,-A1} x {0,-A2} x {0,-A3} (each point
/// an equilibrium when the matching P_i = A_i and P(t) = 1). For k = 1 the
/// six known index-2 points are added, each refined by Newton from its
/// seed with P(t) = -1 and P_i = A_i on the offset axes.
inline std::vector<EquilibriumReport> equilibria(const NetworkParams& p,
                                                 const StimulusProgram& stim) {
    const auto amp = stim.amplitudes();
    std::vector<EquilibriumReport> out;
    auto push_unique = [&](EquilibriumReport r) {
        for (const auto& e : out)
            if ((e.location - r.location).norm() < 1e-9 && e.wms == r.wms) return;
        out.push_back(std::move(r));
    };

    for (int mask = 0; mask < 8; ++mask) {
        StateVector x;
        std::array<double, 3> svs{};
        for (std::size_t i = 0; i < 3; ++i) {
            if (mask & (1 << i)) {
                x[i] = -amp[i];
                svs[i] = amp[i];
            }
        }
        push_unique(make_report(x, p, 1.0, svs));
    }

    if (std::abs(p.k - 1.0) < 1e-12) {
        struct Seed {
            StateVector base;
            std::array<bool, 3> shifted;
        };
        const StateVector plus{{0.43, -0.04, 1.2}}, minus{{-0.43, 0.04, -1.2}};
        const std::array<Seed, 6> seeds{{
            {plus, {false, false, true}},
            {plus, {false, true, false}},
            {plus, {false, true, true}},
            {minus, {true, false, false}},
            {minus, {true, false, true}},
            {minus, {true, true, false}},
        }};
        for (const auto& s : seeds) {
            StateVector x = s.base;
            std::array<double, 3> svs{};
            for (std::size_t i = 0; i < 3; ++i) {
                if (s.shifted[i]) {
                    x[i] -= amp[i];
                    svs[i] = amp[i];
                }
            }
            x = newton_equilibrium(x, p, frozen_program(-1.0, svs));
            push_unique(make_report(x, p, -1.0, svs));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lyapunov spectrum

struct SpectrumResult {
    std::array<double, 3> exponents{};
    std::size_t steps = 0;
    std::size_t renorm_every = 0;
    double h = 0.0;
    double sum() const { return exponents[0] + exponents[1] + exponents[2]; }
};

/// Flow state together with three tangent vectors.
struct TangentState {
    StateVector x;
    std::array<StateVector, 3> e{};

    TangentState& operator+=(const TangentState& o) {
        x += o.x;
        for (std::size_t i = 0; i < 3; ++i) e[i] += o.e[i];
        return *this;
    }
    friend TangentState operator+(TangentState a, const TangentState& b) { return a += b; }
    friend TangentState operator*(double s, TangentState a) {
        a.x *= s;
        for (auto& v : a.e) v *= s;
        return a;
    }
};

/// Orthonormalizes e in place (modified Gram-Schmidt) and returns the norms
/// removed from each vector.
inline std::array<double, 3> gram_schmidt(std::array<StateVector, 3>& e) {
    auto dot = [](const StateVector& a, const StateVector& b) {
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    };
    std::array<double, 3> norms{};
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < j; ++i) e[j] -= dot(e[j], e[i]) * e[i];
        norms[j] = e[j].norm();
        e[j] *= 1.0 / norms[j];
    }
    return norms;
}

/// Benettin-style spectrum of a flow. `field(x, t)` is the vector field and
/// `jac(x, t)` its Jacobian. The first `transient` steps advance the flow
/// only; the next `n_steps` integrate the variational system as well.
template <class Field, class Jac>
    requires std::invocable<Field&, const StateVector&, double> &&
             std::invocable<Jac&, const StateVector&, double>
SpectrumResult lyapunov_spectrum(StateVector x0, Field&& field, Jac&& jac, double h,
                                 std::size_t n_steps, std::size_t renorm_every,
                                 std::size_t transient) {
    if (n_steps == 0 || renorm_every == 0) throw RangeError("lyapunov_spectrum: empty run");
    auto check = [](const StateVector& x, std::size_t n) {
        if (!x.finite() || std::abs(x[0]) > divergence_limit ||
            std::abs(x[1]) > divergence_limit || std::abs(x[2]) > divergence_limit)
            throw Divergence(n, "trajectory diverged at step " + std::to_string(n));
    };

    StateVector x = x0;
    for (std::size_t n = 0; n < transient; ++n) {
        x = rk4_step(x, static_cast<double>(n) * h, h, field);
        check(x, n + 1);
    }

    TangentState ts;
    ts.x = x;
    ts.e = {StateVector{{1, 0, 0}}, StateVector{{0, 1, 0}}, StateVector{{0, 0, 1}}};
    auto augmented = [&](const TangentState& s, double t) {
        TangentState d;
        d.x = field(s.x, t);
        const Matrix3 j = jac(s.x, t);
        for (std::size_t i = 0; i < 3; ++i) d.e[i] = j * s.e[i];
        return d;
    };

    std::array<double, 3> sums{};
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(transient + n) * h;
        ts = rk4_step(ts, t, h, augmented);
        check(ts.x, transient + n + 1);
        if ((n + 1) % renorm_every == 0 || n + 1 == n_steps) {
            const auto norms = gram_schmidt(ts.e);
            for (std::size_t i = 0; i < 3; ++i) sums[i] += std::log(norms[i]);
        }
    }

    SpectrumResult r;
    const double span_t = static_cast<double>(n_steps) * h;
    for (std::size_t i = 0; i < 3; ++i) r.exponents[i] = sums[i] / span_t;
    std::sort(r.exponents.begin(), r.exponents.end(), std::greater<>());
    r.steps = n_steps;
    r.renorm_every = renorm_every;
    r.h = h;
    return r;
}

inline SpectrumResult lyapunov_spectrum(const StateVector& x0, const NetworkParams& p,
                                        const StimulusProgram& stim, double h,
                                        std::size_t n_steps, std::size_t renorm_every = 10,
                                        std::size_t transient = 10'000) {
    return lyapunov_spectrum(
        x0, [&](const StateVector& s, double t) { return ahnn_rhs(s, t, p, stim); },
        [&](const StateVector& s, double t) { return jacobian(s, t, p, stim); }, h, n_steps,
        renorm_every, transient);
}

// ---------------------------------------------------------------------------
// Bifurcation sweeps

enum class SweepAxis { k, cs, wms_amplitude, svs1_amplitude };

struct BifurcationPoint {
    double param = 0.0;
    std::vector<double> peaks;
};

/// Strict three-point maxima of a series, starting at index `from`.
inline std::vector<double> local_maxima(std::span<const double> xs, std::size_t from = 0) {
    std::vector<double> peaks;
    for (std::size_t n = std::max<std::size_t>(from, 1); n + 1 < xs.size(); ++n)
        if (xs[n] > xs[n - 1] && xs[n] > xs[n + 1]) peaks.push_back(xs[n]);
    return peaks;
}

/// Number of groups left after merging sorted values closer than `tol`.
inline std::size_t cluster_count(std::vector<double> values, double tol = 1e-3) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    std::size_t groups = 1;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] - values[i - 1] > tol) ++groups;
    return groups;
}

inline void apply_axis(SweepAxis axis, double value, NetworkParams& p, StimulusProgram& stim) {
    switch (axis) {
    case SweepAxis::k: p.k = value; break;
    case SweepAxis::cs: stim.cs = value; break;
    case SweepAxis::wms_amplitude:
        if (stim.wms) stim.wms->amplitude = value;
        else stim.wms_hold = value;
        break;
    case SweepAxis::svs1_amplitude:
        if (stim.svs[0]) stim.svs[0]->amplitude = value;
        else stim.svs_hold[0] = value;
        break;
    }
}

/// x1 peaks over the tail of one run. A tail without strict maxima (a
/// settled fixed point) reports its final x1 as the single peak.
inline std::vector<double> tail_peaks(const StateVector& x0, const NetworkParams& p,
                                      const StimulusProgram& stim, double h,
                                      std::size_t transient, std::size_t tail) {
    const auto traj = simulate(x0, p, stim, h, transient + tail);
    std::vector<double> x1(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) x1[n] = traj[n].x[0];
    auto peaks = local_maxima(x1, transient);
    if (peaks.empty()) peaks.push_back(x1.back());
    return peaks;
}

inline std::vector<BifurcationPoint>
bifurcation_sweep(SweepAxis axis, double lo, double hi, std::size_t n_points,
                  const StateVector& x0, NetworkParams p, StimulusProgram stim, double h,
                  std::size_t transient, std::size_t tail) {
    if (n_points < 2) throw RangeError("bifurcation_sweep: n_points must be >= 2");
    std::vector<BifurcationPoint> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double v = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
        apply_axis(axis, v, p, stim);
        out.push_back({v, tail_peaks(x0, p, stim, h, transient, tail)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundedness

struct BoundednessReport {
    double v_max_tail = 0.0;
    double l_k = 0.0;
    bool contained = false;
};

/// L_k = (0.7b - 2.2)^2 + (k + 1.5 + 2b)^2 + (5b + 1)^2.
inline double attractive_bound(double k, double b) {
    const double u = 0.7 * b - 2.2, v = k + 1.5 + 2.0 * b, w = 5.0 * b + 1.0;
    return u * u + v * v + w * w;
}

/// V(x) = sum (x_i + A_i)^2 maximized over samples from `tail_start` on.
inline double lyapunov_function_max(const Trajectory& traj, const std::array<double, 3>& a,
                                    std::size_t tail_start = 0) {
    double vmax = 0.0;
    for (std::size_t n = tail_start; n < traj.size(); ++n) {
        double v = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double d = traj[n].x[i] + a[i];
            v += d * d;
        }
        vmax = std::max(vmax, v);
    }
    return vmax;
}

inline BoundednessReport boundedness_report(const Trajectory& traj, const std::array<double, 3>& a,
                                            double k, double b, std::size_t tail_start = 0) {
    if (!(b > 1.0)) throw RangeError("boundedness_report: b must be > 1");
    BoundednessReport r;
    r.v_max_tail = lyapunov_function_max(traj, a, tail_start);
    r.l_k = attractive_bound(k, b);
    r.contained = r.v_max_tail < r.l_k;
    return r;
}

/// Smallest b on a grid over [lo, hi] whose bound contains the tail, if any.
inline std::optional<double> smallest_containing_b(const Trajectory& traj,
                                                   const std::array<double, 3>& a, double k,
                                                   std::size_t tail_start = 0, double lo = 1.1,
                                                   double hi = 5.0, std::size_t points = 391) {
    const double v = lyapunov_function_max(traj, a, tail_start);
    for (std::size_t i = 0; i < points; ++i) {
        const double b = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        if (v < attractive_bound(k, b)) return b;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scroll census

enum class CensusProjection { x1x3, full };

/// Number of centers near which at least `min_fraction` of the samples from
/// `tail_start` on fall (Euclidean distance <= radius).
inline std::size_t scroll_census(const Trajectory& traj, std::span<const StateVector> centers,
                                 double radius, CensusProjection proj = CensusProjection::x1x3,
                                 std::size_t tail_start = 0, double min_fraction = 0.005) {
    if (centers.empty()) throw RangeError("scroll_census: no centers");
    if (!(radius > 0.0)) throw RangeError("scroll_census: radius must be > 0");
    if (tail_start >= traj.size()) return 0;
    std::vector<std::size_t> hits(centers.size(), 0);
    const double r2 = radius * radius;
    for (std::size_t n = tail_start; n < traj.size(); ++n) {
        const auto& x = traj[n].x;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double d1 = x[0] - centers[c][0], d2 = x[1] - centers[c][1],
                         d3 = x[2] - centers[c][2];
            const double dist2 = proj == CensusProjection::full ? d1 * d1 + d2 * d2 + d3 * d3
                                                                : d1 * d1 + d3 * d3;
            if (dist2 <= r2) ++hits[c];
        }
    }
    const double need = min_fraction * static_cast<double>(traj.size() - tail_start);
    return static_cast<std::size_t>(std::count_if(
        hits.begin(), hits.end(), [&](std::size_t h) { return static_cast<double>(h) >= need; }));
}

/// Scroll centers: the index-2 foci of every weight sign the program can
/// take, shifted across the SVS offset lattice.
inline std::vector<StateVector> scroll_centers(const NetworkParams& p, const StimulusProgram& stim) {
    std::vector<double> signs{1.0};
    if (stim.wms) signs.push_back(-1.0);
    else signs[0] = stim.wms_hold >= 0.0 ? 1.0 : -1.0;

    std::vector<StateVector> base;
    for (double s : signs)
        for (const auto& f : base_foci(p, s)) base.push_back(f);

    std::vector<StateVector> out;
    for (int mask = 0; mask < 8; ++mask) {
        bool valid = true;
        StateVector shift;
        for (std::size_t i = 0; i < 3; ++i) {
            if (mask & (1 << i)) {
                if (!stim.svs[i] || stim.svs[i]->amplitude == 0.0) valid = false;
                else shift[i] = -stim.svs[i]->amplitude;
            }
        }
        if (!valid) continue;
        for (const auto& b : base) out.push_back(b + shift);
    }
    return out;
}

} // namespace ahnn

#endif // AHNN_ANALYSIS_HPP
