// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <ahnn/analysis.hpp>
#include <ahnn/cipher.hpp>
#include <ahnn/fixed_point.hpp>
#include <ahnn/metrics.hpp>
#include <ahnn/presets.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ahnn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] #%d %s (%s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool roots_match(std::array<Complex, 3> got, std::array<Complex, 3> want, double tol, double& worst) {
    auto key = [](Complex a, Complex b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); };
    std::sort(got.begin(), got.end(), key);
    std::sort(want.begin(), want.end(), key);
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
        const double e = std::max(std::abs(got[i].real() - want[i].real()), std::abs(got[i].imag() - want[i].imag()));
        worst = std::max(worst, e);
        ok = ok && e <= tol;
    }
    return ok;
}

std::string spectrum_str(const std::array<double, 3>& e) { return fmt("%.4f, %.4f, %.4f", e[0], e[1], e[2]); }

std::uint64_t fnv1a(const std::vector<FixedSample>& xs) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& s : xs)
        for (std::size_t i = 0; i < 3; ++i) {
            const std::uint32_t w = s.x[i].bits();
            for (int b = 0; b < 4; ++b) {
                h ^= (w >> (8 * b)) & 0xFFu;
                h *= 0x100000001b3ull;
            }
        }
    return h;
}

// Smooth shading plus mild sensor noise: strongly correlated neighbours,
// broad histogram, like a photograph.
GrayImage natural_image(std::size_t rows, std::size_t cols) {
    GrayImage img(rows, cols, 0);
    std::mt19937 rng(7);
    std::normal_distribution<double> noise(0.0, 4.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = 128.0 + 60.0 * std::sin(i * 0.03) * std::cos(j * 0.02) +
                             40.0 * std::sin((i + j) * 0.011) + noise(rng);
            img.at(i, j) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    return img;
}

Outcome lyapunov_criterion(const char* name, std::array<double, 3> want, double tol) {
    const Preset p = preset(name);
    const auto r = lyapunov_spectrum(p.initial, p.params, p.stimulus, 0.01, 100000, 10, 10000);
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) ok = ok && std::abs(r.exponents[i] - want[i]) <= tol;
    return {ok, "measured " + spectrum_str(r.exponents) + " vs " + spectrum_str(want) + fmt(" +- %.2f", tol)};
}

} // namespace

int main() {
    report(1, "origin characteristic cubic roots", [] {
        double worst = 0.0;
        const bool a = roots_match(characteristic_roots(1.15), {Complex{0.74, 0}, {-0.52, 1.61}, {-0.52, -1.61}},
                                   0.01, worst);
        const bool b = roots_match(characteristic_roots(1.0), {Complex{0.50, 0}, {-0.40, 1.53}, {-0.40, -1.53}},
                                   0.01, worst);
        const auto r = characteristic_roots(1.15);
        return Outcome{a && b, fmt("k=1.15 real root %.4f, pair %.4f+-%.4fi; worst deviation %.4f vs 0.01",
                                   r[0].real(), r[1].real(), std::abs(r[1].imag()), worst)};
    });

    report(2, "index-2 saddle-foci at k=1", [] {
        const Preset p = preset("wms-svs-3d-k1");
        const auto eq = equilibria(p.params, p.stimulus);
        int count = 0;
        double worst = 0.0;
        bool ok = true;
        for (const auto& r : eq) {
            if (r.kind != EquilibriumKind::index2_saddle_focus) continue;
            ++count;
            ok = roots_match(r.eigenvalues, {Complex{-0.72, 0}, {0.37, 1.31}, {0.37, -1.31}}, 0.02, worst) && ok;
        }
        return Outcome{ok && count == 6, fmt("%d points, worst eigenvalue deviation %.4f vs 0.02", count, worst)};
    });

    report(3, "Lyapunov spectrum, weight stimulus", [] { return lyapunov_criterion("wms", {0.066, 0.0, -0.431}, 0.03); });

    report(4, "Lyapunov spectrum, weight + state stimulus", [] {
        Outcome o = lyapunov_criterion("wms-svs1", {0.08, 0.0, -0.31}, 0.03);
        const Preset h = preset("hnn-k1");
        const auto ref = lyapunov_spectrum(h.initial, h.params, h.stimulus, 0.01, 100000, 10, 10000);
        o.detail += "; unstimulated k=1 network gives " + spectrum_str(ref.exponents);
        return o;
    });

    report(5, "constant-stimulus degeneration", [] {
        const Preset p = preset("cs-svs");
        StimulusProgram lo = p.stimulus, hi = p.stimulus;
        lo.cs = 0.1;
        hi.cs = 1.0;
        const double le_lo = lyapunov_spectrum(p.initial, p.params, lo, 0.01, 100000).exponents[0];
        const double le_hi = lyapunov_spectrum(p.initial, p.params, hi, 0.01, 100000).exponents[0];
        const auto sweep = bifurcation_sweep(SweepAxis::cs, 0.1, 1.0, 10, p.initial, p.params, p.stimulus, 0.01,
                                             10000, 20000);
        const std::size_t first = cluster_count(sweep.front().peaks), last = cluster_count(sweep.back().peaks);
        const bool ok = le_lo > 0.02 && le_hi < -0.01 && last == 1 && first > 1;
        return Outcome{ok, fmt("LE1 %.4f at 0.1 (> 0.02), %.4f at 1.0 (< -0.01); peak clusters %zu at 0.1, %zu at 1.0",
                               le_lo, le_hi, first, last)};
    });

    report(6, "scroll census", [] {
        struct Case {
            const char* preset;
            std::size_t want, tail;
            CensusProjection proj;
        };
        const Case cases[] = {{"wms", 4, 100000, CensusProjection::x1x3},
                              {"wms-svs1", 8, 100000, CensusProjection::x1x3},
                              {"wms-svs-multi", 16, 100000, CensusProjection::x1x3},
                              {"wms-svs-multi-k1", 9, 100000, CensusProjection::x1x3},
                              {"wms-svs-3d-k1", 18, 300000, CensusProjection::full}};
        bool ok = true;
        std::string detail;
        for (const auto& c : cases) {
            const Preset p = preset(c.preset);
            const auto centers = scroll_centers(p.params, p.stimulus);
            const auto tr = simulate(p.initial, p.params, p.stimulus, 0.01, 10000 + c.tail);
            const std::size_t n = scroll_census(tr, centers, 1.0, c.proj, 10000);
            ok = ok && n == c.want;
            detail += fmt("%s%s %zu/%zu", detail.empty() ? "" : ", ", c.preset, n, c.want);
        }
        return Outcome{ok, "measured/expected " + detail};
    });

    report(7, "Taylor breakpoint", [] {
        const double a = find_optimal_a();
        return Outcome{std::abs(a - 1.34) <= 0.01, fmt("a* = %.4f vs 1.34 +- 0.01", a)};
    });

    report(8, "fixed-point conversion vectors", [] {
        const auto a = to_fixed(0.012), b = to_fixed(-0.125);
        return Outcome{a.bits() == 0x000C49BAu && b.bits() == 0xFF800000u,
                       "0.012 -> " + to_hex(a) + " (000C49BA), -0.125 -> " + to_hex(b) + " (FF800000)"};
    });

    report(9, "fixed-point vs float agreement and determinism", [] {
        const Preset p = preset("wms");
        const auto f = FixedProgram::from(p.params, p.stimulus, 0.01);
        const auto fx = fx_simulate(FixedState::from(p.initial), f, 1000);
        const auto fl = simulate(p.initial, p.params, p.stimulus, 0.01, 1000, TaylorTanh{});
        double worst = 0.0;
        for (std::size_t n = 0; n < fx.size(); ++n)
            for (std::size_t i = 0; i < 3; ++i)
                worst = std::max(worst, std::abs(from_fixed(fx[n].x[i]) - fl[n + 1].x[i]));
        const auto r1 = fx_simulate(FixedState::from(p.initial), f, 10000);
        const auto r2 = fx_simulate(FixedState::from(p.initial), f, 10000);
        const std::uint64_t h1 = fnv1a(r1), h2 = fnv1a(r2);
        const bool ok = worst < 1e-3 && h1 == h2 && h1 == 0xa3e6e4fb846a03ccull;
        return Outcome{ok, fmt("max deviation %.2e over 1e3 steps (< 1e-3); 1e4-step hash %016llx, repeat %016llx, "
                               "pinned a3e6e4fb846a03cc",
                               worst, static_cast<unsigned long long>(h1), static_cast<unsigned long long>(h2))};
    });

    report(10, "symmetry properties", [] {
        const StateVector x0{{0.0, 0.1, 0.0}};
        const NetworkParams p{1.15};
        StimulusProgram plus, minus;
        minus.wms_hold = -1.0;
        const auto a = simulate(x0, p, plus, 0.01, 10000);
        const auto b = simulate(x0, p, minus, 0.01, 10000);
        double mirror = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n) mirror = std::max(mirror, std::abs(a[n].x[0] + b[n].x[0]));

        StimulusProgram off;
        off.svs_hold = {5.0, 0.0, 0.0};
        const auto s = simulate(StateVector{{-5.0, 0.1, 0.0}}, p, off, 0.01, 10000);
        double offset = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n) {
            offset = std::max(offset, std::abs(s[n].x[0] + 5.0 - a[n].x[0]));
            offset = std::max(offset, std::abs(s[n].x[1] - a[n].x[1]));
            offset = std::max(offset, std::abs(s[n].x[2] - a[n].x[2]));
        }

        const auto la = lyapunov_spectrum(x0, p, plus, 0.01, 20000);
        const auto lb = lyapunov_spectrum(x0, p, minus, 0.01, 20000);
        const auto lc = lyapunov_spectrum(StateVector{{-5.0, 0.1, 0.0}}, p, off, 0.01, 20000);
        double gap = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            gap = std::max(gap, std::abs(la.exponents[i] - lb.exponents[i]));
            gap = std::max(gap, std::abs(la.exponents[i] - lc.exponents[i]));
        }
        const bool ok = mirror < 1e-9 && offset <= 1e-12 && gap <= 0.01;
        return Outcome{ok, fmt("mirror %.2e (< 1e-9), offset %.2e (<= 1e-12), spectrum gap %.4f (<= 0.01)", mirror,
                               offset, gap)};
    });

    report(11, "cipher round trip", [] {
        const SecretKey key;
        const auto ks = keystream(key, 582, 432, Geometry::of(432, 321).pad());
        const bool tail = ks.f_prime[ks.f_prime.size() - 2] == 32 && ks.f_prime.back() == 70;
        const unsigned rounds = diffusion_rounds(582);
        std::mt19937_64 rng(11);
        std::string bad;
        const std::pair<std::size_t, std::size_t> sizes[] = {{191, 159}, {240, 291}, {232, 205},
                                                             {256, 256}, {64, 64},   {2, 3}};
        for (auto [r, c] : sizes) {
            GrayImage img(r, c, 0);
            for (auto& v : img.pixels) v = static_cast<std::uint8_t>(rng());
            if (!(decrypt(encrypt(img, key, 582), key, 582) == img)) bad += fmt(" %zux%zu", r, c);
        }
        return Outcome{bad.empty() && tail && rounds == 10,
                       fmt("6 sizes, failures:%s; tail (%d, %d) vs (32, 70); rounds %u vs 10",
                           bad.empty() ? " none" : bad.c_str(), ks.f_prime[ks.f_prime.size() - 2], ks.f_prime.back(),
                           rounds)};
    });

    report(12, "cipher statistics", [] {
        const SecretKey key;
        const auto img = natural_image(256, 256);
        const auto env = encrypt(img, key, 100);
        const GrayImage c(env.S, env.S, env.pixels);
        const double h = entropy(c);
        std::array<double, 3> corr{};
        const Direction dirs[] = {Direction::horizontal, Direction::vertical, Direction::diagonal};
        for (std::size_t i = 0; i < 3; ++i) corr[i] = adjacent_correlation(c, dirs[i]);
        double npcr = 0.0, uaci = 0.0;
        for (unsigned t = 0; t < 5; ++t) {
            const unsigned cnt = 100 + 2 * t;
            auto img2 = img;
            img2.pixels[(t * 7919) % img.size()] ^= 1;
            const auto r = npcr_uaci(encrypt(img, key, cnt).pixels, encrypt(img2, key, cnt + 1).pixels);
            npcr += r.npcr / 5.0;
            uaci += r.uaci / 5.0;
        }
        const double worst_corr = std::max({std::abs(corr[0]), std::abs(corr[1]), std::abs(corr[2])});
        const bool ok = h >= 7.99 && worst_corr <= 0.02 && npcr >= 99.5 && npcr <= 99.7 && uaci >= 33.0 && uaci <= 34.0;
        return Outcome{ok, fmt("entropy %.4f (>= 7.99); correlation %.4f/%.4f/%.4f (|r| <= 0.02); NPCR %.4f%% "
                               "[99.5, 99.7]; UACI %.4f%% [33, 34]",
                               h, corr[0], corr[1], corr[2], npcr, uaci)};
    });

    report(13, "NIST subset on the confusion keystream", [] {
        const std::size_t S = 360;
        const auto ks = keystream(SecretKey{}, 0, S, S * S - S * 359);
        const auto bits = bytes_to_bits(ks.g);
        bool ok = bits.size() >= 1000000;
        double worst = 1.0;
        for (const auto& r : nist_subset(bits)) {
            ok = ok && r.passed();
            worst = std::min(worst, r.p_value);
        }
        const double e1 = ahnn::erfc(1.0);
        ok = ok && std::abs(e1 - 0.1572992070) <= 1e-9;
        return Outcome{ok, fmt("%zu bits, smallest P %.4f (>= 0.01); erfc(1) = %.10f", bits.size(), worst, e1)};
    });

    report(14, "chosen-plaintext difference", [] {
        const SecretKey key;
        std::mt19937_64 rng(14);
        GrayImage i1(256, 200, 0), i2(256, 200, 0);
        for (auto& v : i1.pixels) v = static_cast<std::uint8_t>(rng());
        i2.pixels = i1.pixels;
        for (std::size_t k = 0; k < 40; ++k) i2.pixels[rng() % i2.size()] ^= 0xFF;
        const unsigned cnt = 300;
        const auto c1 = encrypt(i1, key, cnt);
        const auto c2 = encrypt(i2, key, next_counter(cnt));
        std::size_t diff_bits = 0;
        for (std::size_t k = 0; k < i1.size(); ++k) {
            const std::uint8_t lhs = c1.pixels[k] ^ c2.pixels[k];
            const std::uint8_t rhs = i1.pixels[k] ^ i2.pixels[k];
            diff_bits += static_cast<std::size_t>(__builtin_popcount(lhs ^ rhs));
        }
        const double frac = 100.0 * static_cast<double>(diff_bits) / (8.0 * static_cast<double>(i1.size()));
        return Outcome{frac > 45.0, fmt("Hamming distance %.2f%% of bits (> 45%%)", frac)};
    });

    report(15, "salt-and-pepper noise robustness", [] {
        const SecretKey key;
        const auto img = natural_image(256, 256);
        auto env = encrypt(img, key, 9);
        std::mt19937_64 rng(15);
        const std::size_t hits = env.pixels.size() / 10;
        std::vector<std::size_t> idx(env.pixels.size());
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < hits; ++k) env.pixels[idx[k]] = (rng() & 1) ? 255 : 0;
        const auto out = decrypt(env, key, 9, DecryptOptions{true, 16});
        std::size_t same = 0;
        for (std::size_t k = 0; k < img.size(); ++k) same += out.pixels[k] == img.pixels[k];
        const double frac = 100.0 * static_cast<double>(same) / static_cast<double>(img.size());
        return Outcome{frac >= 85.0, fmt("%.2f%% of pixels exact (>= 85%%)", frac)};
    });

    report(16, "boundedness", [] {
        std::string diverged;
        std::size_t runs = 0;
        for (const auto& name : preset_names()) {
            const Preset p = preset(name);
            try {
                static_cast<void>(simulate(p.initial, p.params, p.stimulus, 0.01, 1000000));
            } catch (const Divergence&) {
                diverged += " " + name;
            }
            ++runs;
        }
        double worst_ratio = 0.0;
        bool contained = true;
        for (const char* name : {"hnn", "wms", "hnn-k1", "wms-k1"}) {
            const Preset p = preset(name);
            const auto tr = simulate(p.initial, p.params, p.stimulus, 0.01, 110000);
            const auto r = boundedness_report(tr, {0, 0, 0}, p.params.k, 2.0, 10000);
            contained = contained && r.contained;
            worst_ratio = std::max(worst_ratio, r.v_max_tail / r.l_k);
        }
        return Outcome{diverged.empty() && contained,
                       fmt("%zu presets x 1e6 steps, diverged:%s; max tail V/L_k %.3f (< 1, b = 2)", runs,
                           diverged.empty() ? " none" : diverged.c_str(), worst_ratio)};
    });

    std::printf("%d of 16 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
