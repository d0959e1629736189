#ifndef AHNN_METRICS_HPP
#define AHNN_METRICS_HPP

// Image statistics used to judge cipher quality, and a five-test subset of
// the NIST SP 800-22 randomness suite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

namespace ahnn {

inline std::array<std::uint64_t, 256> histogram(std::span<const std::uint8_t> px) {
    std::array<std::uint64_t, 256> h{};
    for (auto v : px) ++h[v];
    return h;
}

/// Shannon entropy in bits per byte.
inline double entropy(std::span<const std::uint8_t> px) {
    if (px.empty()) throw SizeError("entropy of an empty image");
    const auto h = histogram(px);
    const double n = static_cast<double>(px.size());
    double e = 0.0;
    for (auto c : h)
        if (c) {
            const double p = static_cast<double>(c) / n;
            e -= p * std::log2(p);
        }
    return e;
}

inline double entropy(const GrayImage& img) { return entropy(std::span<const std::uint8_t>(img.pixels)); }

enum class Direction { horizontal, vertical, diagonal };

inline const char* to_string(Direction d) {
    switch (d) {
    case Direction::horizontal: return "horizontal";
    case Direction::vertical: return "vertical";
    case Direction::diagonal: return "diagonal";
    }
    return "?";
}

/// Pearson coefficient over `n_pairs` randomly chosen neighbouring pixel
/// pairs. Pair positions come from mt19937_64 seeded with `seed`; a
/// zero-variance sample reports 0.
inline double adjacent_correlation(const GrayImage& img, Direction dir, std::size_t n_pairs = 10000,
                                   std::uint64_t seed = 42) {
    const std::size_t dr = dir == Direction::horizontal ? 0 : 1;
    const std::size_t dc = dir == Direction::vertical ? 0 : 1;
    if (img.rows <= dr || img.cols <= dc || n_pairs == 0)
        throw SizeError("image too small for adjacent-pixel correlation");
    std::mt19937_64 rng(seed);
    const std::uint64_t rr = img.rows - dr, cc = img.cols - dc;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const std::size_t r = rng() % rr, c = rng() % cc;
        const double x = img.at(r, c), y = img.at(r + dr, c + dc);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double n = static_cast<double>(n_pairs);
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

inline void require_same_shape(const GrayImage& a, const GrayImage& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw DimensionMismatch("images differ in size");
}

inline void require_same_size(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw DimensionMismatch("inputs differ in size");
    if (a.empty()) throw SizeError("empty input");
}

inline double mse(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    require_same_size(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

inline double mse(const GrayImage& a, const GrayImage& b) {
    require_same_shape(a, b);
    return mse(std::span<const std::uint8_t>(a.pixels), std::span<const std::uint8_t>(b.pixels));
}

/// Peak signal-to-noise ratio; `infinite` marks identical inputs.
struct Psnr {
    bool infinite = false;
    double db = 0.0;

    std::string str() const { return infinite ? "inf" : std::to_string(db); }
};

inline Psnr psnr_from_mse(double m) {
    if (m == 0.0) return {true, 0.0};
    return {false, 20.0 * std::log10(255.0 / std::sqrt(m))};
}

inline Psnr psnr(const GrayImage& a, const GrayImage& b) { return psnr_from_mse(mse(a, b)); }

struct NpcrUaci {
    double npcr = 0.0; // percent
    double uaci = 0.0; // percent
};

inline NpcrUaci npcr_uaci(std::span<const std::uint8_t> c1, std::span<const std::uint8_t> c2) {
    require_same_size(c1, c2);
    std::uint64_t changed = 0;
    double diff = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        changed += c1[i] != c2[i];
        diff += std::abs(static_cast<int>(c1[i]) - static_cast<int>(c2[i]));
    }
    const double n = static_cast<double>(c1.size());
    return {100.0 * static_cast<double>(changed) / n, 100.0 * diff / (255.0 * n)};
}

// ---------------------------------------------------------------------------
// special functions

/// Regularized upper incomplete gamma Q(a, x): power series for x < a + 1,
/// Lentz continued fraction otherwise.
inline double igamc(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw RangeError("igamc: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    constexpr double eps = 1e-16;
    constexpr int max_iter = 100000;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term, ap = a;
        for (int i = 0; i < max_iter; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return 1.0 - sum * std::exp(log_prefix);
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::exp(log_prefix) * h;
}

/// Complementary error function via erfc(x) = Q(1/2, x^2).
inline double erfc(double x) {
    if (x < 0.0) return 2.0 - erfc(-x);
    return igamc(0.5, x * x);
}

inline double normal_cdf(double x) { return 0.5 * ahnn::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// NIST subset

/// One bit per element, most significant bit of each byte first.
inline std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (auto b : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((b >> i) & 1u));
    return bits;
}

using BitSpan = std::span<const std::uint8_t>;

inline constexpr double nist_alpha = 0.01;

namespace detail {

inline void require_bits(BitSpan bits, std::size_t n, const char* test) {
    if (bits.size() < n)
        throw InsufficientBits(std::string(test) + " needs at least " + std::to_string(n) + " bits");
}

} // namespace detail

inline double frequency_test(BitSpan bits) {
    detail::require_bits(bits, 100, "frequency test");
    long long s = 0;
    for (auto b : bits) s += b ? 1 : -1;
    const double s_obs = std::abs(static_cast<double>(s)) / std::sqrt(static_cast<double>(bits.size()));
    return ahnn::erfc(s_obs / std::sqrt(2.0));
}

inline double block_frequency_test(BitSpan bits, std::size_t M = 128) {
    detail::require_bits(bits, std::max<std::size_t>(100, M), "block frequency test");
    const std::size_t N = bits.size() / M;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < M; ++j) ones += bits[i * M + j];
        const double pi = static_cast<double>(ones) / static_cast<double>(M) - 0.5;
        chi2 += pi * pi;
    }
    chi2 *= 4.0 * static_cast<double>(M);
    return igamc(static_cast<double>(N) / 2.0, chi2 / 2.0);
}

inline double runs_test(BitSpan bits) {
    detail::require_bits(bits, 100, "runs test");
    const double n = static_cast<double>(bits.size());
    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    const double pi = static_cast<double>(ones) / n;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return 0.0;
    std::size_t v = 1;
    for (std::size_t k = 1; k < bits.size(); ++k) v += bits[k] != bits[k - 1];
    const double num = std::abs(static_cast<double>(v) - 2.0 * n * pi * (1.0 - pi));
    return ahnn::erfc(num / (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
}

inline double cumulative_sums_test(BitSpan bits, bool backward) {
    detail::require_bits(bits, 100, "cumulative sums test");
    const long long n = static_cast<long long>(bits.size());
    long long s = 0, z = 0;
    for (long long i = 0; i < n; ++i) {
        const auto b = bits[static_cast<std::size_t>(backward ? n - 1 - i : i)];
        s += b ? 1 : -1;
        z = std::max(z, s < 0 ? -s : s);
    }
    const double sq = std::sqrt(static_cast<double>(n));
    const double zd = static_cast<double>(z);
    double sum1 = 0.0, sum2 = 0.0;
    for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k)
        sum1 += normal_cdf((4.0 * k + 1.0) * zd / sq) - normal_cdf((4.0 * k - 1.0) * zd / sq);
    for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k)
        sum2 += normal_cdf((4.0 * k + 3.0) * zd / sq) - normal_cdf((4.0 * k + 1.0) * zd / sq);
    return std::clamp(1.0 - sum1 + sum2, 0.0, 1.0);
}

inline double approximate_entropy_test(BitSpan bits, unsigned m = 2) {
    detail::require_bits(bits, std::size_t{1} << (m + 5), "approximate entropy test");
    const std::size_t n = bits.size();
    auto phi = [&](unsigned len) {
        if (len == 0) return 0.0;
        std::vector<std::uint64_t> counts(std::size_t{1} << len, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t idx = 0;
            for (unsigned j = 0; j < len; ++j) idx = (idx << 1) | bits[(i + j) % n];
            ++counts[idx];
        }
        double sum = 0.0;
        for (auto c : counts)
            if (c) {
                const double p = static_cast<double>(c) / static_cast<double>(n);
                sum += p * std::log(p);
            }
        return sum;
    };
    const double ap_en = phi(m) - phi(m + 1);
    const double chi2 = 2.0 * static_cast<double>(n) * (std::log(2.0) - ap_en);
    return igamc(std::pow(2.0, static_cast<double>(m) - 1.0), chi2 / 2.0);
}

struct NistResult {
    std::string test;
    double p_value = 0.0;
    bool passed() const { return p_value >= nist_alpha; }
};

/// Frequency, Block Frequency (M = 128), Runs, Cumulative Sums (both
/// directions) and Approximate Entropy (m = 2).
inline std::vector<NistResult> nist_subset(BitSpan bits) {
    return {{"frequency", frequency_test(bits)},
            {"block_frequency", block_frequency_test(bits, 128)},
            {"runs", runs_test(bits)},
            {"cumulative_sums_forward", cumulative_sums_test(bits, false)},
            {"cumulative_sums_backward", cumulative_sums_test(bits, true)},
            {"approximate_entropy", approximate_entropy_test(bits, 2)}};
}

} // namespace ahnn

#endif // AHNN_METRICS_HPP
