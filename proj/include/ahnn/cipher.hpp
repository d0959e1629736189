#ifndef AHNN_CIPHER_HPP
#define AHNN_CIPHER_HPP

// Counter-driven image cipher: fixed-point keystream, padding with embedded
// counter bytes, XOR confusion, nonlinear Cat-map diffusion and the AHN1
// envelope format.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "fixed_point.hpp"
#include "image.hpp"

namespace ahnn {

inline constexpr unsigned counter_modulus = 4096;

inline void validate_counter(unsigned cnt) {
    if (cnt >= counter_modulus) throw RangeError("counter must lie in [0, 4095]");
}

inline constexpr unsigned next_counter(unsigned cnt) { return (cnt + 1) % counter_modulus; }

struct CatParams {
    std::int64_t a = 1, b = 1, c = 1, d = 2, e = 1;
    friend bool operator==(const CatParams&, const CatParams&) = default;
};

struct SecretKey {
    std::array<double, 3> amplitude{5.0, 5.0, 12.0};
    double omega = 0.01;
    std::array<double, 3> omega_svs{0.2, 0.22, 0.21};
    std::array<double, 3> x0{0.0, 0.1, 0.0};
    CatParams cat;
    int T = 5;

    friend bool operator==(const SecretKey&, const SecretKey&) = default;

    /// Amplitudes are accepted in [0, 12.5].
    void validate() const {
        for (double a : amplitude)
            if (!(a >= 0.0 && a <= 12.5)) throw KeyError("amplitude outside [0, 12.5]");
        auto check_omega = [](double w) {
            if (!(w > 0.0 && w < 1.0)) throw KeyError("angular velocity outside (0, 1)");
        };
        check_omega(omega);
        for (double w : omega_svs) check_omega(w);
        for (double v : x0)
            if (!(v >= 0.0 && v < 1.0)) throw KeyError("initial state outside [0, 1)");
        if (T < 0 || T > 5) throw KeyError("T outside {0..5}");
    }
};

/// Effective SVS amplitudes after the counter-driven update. A component that
/// would exceed 10 takes the subtractive form instead.
inline std::array<double, 3> update_key(const SecretKey& key, unsigned cnt) {
    validate_counter(cnt);
    const std::array<double, 3> off{static_cast<double>(cnt % 16) * 0.125,
                                    static_cast<double>((cnt >> 4) % 16) * 0.25,
                                    static_cast<double>((cnt >> 8) % 16) * 0.125};
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        const double up = key.amplitude[i] + off[i];
        out[i] = up > 10.0 ? key.amplitude[i] - off[i] : up;
    }
    return out;
}

/// Number of leading keystream outputs discarded: max(1000, cnt * T).
inline std::uint64_t discard_count(unsigned cnt, int T) {
    return std::max<std::uint64_t>(1000, static_cast<std::uint64_t>(cnt) * static_cast<std::uint64_t>(T));
}

inline unsigned diffusion_rounds(unsigned cnt) { return 4 + cnt % 16; }

inline constexpr double keystream_h = 0.01;

/// Fixed-point network configuration driven by `key` at counter `cnt`.
inline FixedProgram keystream_program(const SecretKey& key, unsigned cnt) {
    const auto amp = update_key(key, cnt);
    StimulusProgram stim;
    stim.wms = SquareWave{1.0, key.omega};
    for (std::size_t i = 0; i < 3; ++i) stim.svs[i] = SquareWave{amp[i], key.omega_svs[i]};
    return FixedProgram::from(NetworkParams{1.15}, stim, keystream_h);
}

struct KeystreamBundle {
    std::vector<std::uint8_t> f_prime;
    std::vector<std::uint8_t> g;
    std::uint16_t mask16 = 0;
};

namespace detail {

inline std::uint8_t f_byte(const FixedState& s) {
    const std::uint32_t x = s[0].bits(), y = s[1].bits(), z = s[2].bits();
    switch (y & 3u) {
    case 0: return static_cast<std::uint8_t>(x);
    case 1: return static_cast<std::uint8_t>(z);
    case 2: return static_cast<std::uint8_t>(y >> 2);
    default: return static_cast<std::uint8_t>(y >> 8);
    }
}

inline std::uint8_t g_byte(const FixedSample& s) {
    const std::uint32_t x = s.x[0].bits(), y = s.x[1].bits(), z = s.x[2].bits();
    if (!s.p1_nonzero && !s.p3_nonzero) return static_cast<std::uint8_t>(x ^ (z >> 8));
    if (!s.p1_nonzero) return static_cast<std::uint8_t>((y >> 2) ^ (z >> 4));
    if (!s.p3_nonzero) return static_cast<std::uint8_t>((x >> 2) ^ (y >> 4));
    return static_cast<std::uint8_t>((x >> 8) ^ z);
}

inline std::uint16_t mask_word(const FixedState& s) {
    return static_cast<std::uint16_t>(((s[0].bits() & 0xFFu) << 8) | (s[2].bits() & 0xFFu));
}

} // namespace detail

/// The 16-bit register mask alone (first kept output).
inline std::uint16_t keystream_mask(const SecretKey& key, unsigned cnt) {
    const auto prog = keystream_program(key, cnt);
    const std::uint64_t skip = discard_count(cnt, key.T);
    std::uint16_t mask = 0;
    fx_run(FixedState::from(StateVector{key.x0}), prog, skip + 1,
           [&](std::uint64_t n, const FixedSample& s) {
               if (n == skip) mask = detail::mask_word(s.x);
           });
    return mask;
}

/// Keystream for an S x S grid with `pad` padding cells: F' (pad bytes, the
/// last two carrying the counter) and G (S^2 bytes).
inline KeystreamBundle keystream(const SecretKey& key, unsigned cnt, std::size_t S, std::size_t pad) {
    validate_counter(cnt);
    if (pad < 2 || pad > S * S) throw SizeError("keystream: padding must hold the two counter bytes");
    const auto prog = keystream_program(key, cnt);
    const std::uint64_t skip = discard_count(cnt, key.T);
    const std::uint64_t f_len = pad - 2;
    const std::uint64_t total = skip + f_len + S * S;

    KeystreamBundle ks;
    ks.f_prime.reserve(pad);
    ks.g.reserve(S * S);
    fx_run(FixedState::from(StateVector{key.x0}), prog, total,
           [&](std::uint64_t n, const FixedSample& s) {
               if (n < skip) return;
               const std::uint64_t j = n - skip;
               if (j == 0) ks.mask16 = detail::mask_word(s.x);
               if (j < f_len)
                   ks.f_prime.push_back(detail::f_byte(s.x));
               else
                   ks.g.push_back(detail::g_byte(s));
           });
    ks.f_prime.push_back(static_cast<std::uint8_t>((cnt >> 8) << 4));
    ks.f_prime.push_back(static_cast<std::uint8_t>(cnt & 0xFFu));
    return ks;
}

// ---------------------------------------------------------------------------
// geometry

/// Padded layout of a plain image. Non-square images use S = max(rows, cols)
/// and store N = min(rows, cols); squares use S = side + 1 and store N = 0.
/// Bit 15 of R is set when rows > cols.
struct Geometry {
    std::size_t rows = 0, cols = 0, S = 0;

    static Geometry of(std::size_t rows, std::size_t cols) {
        if (rows < 2 || cols < 2) throw SizeError("image must be at least 2x2");
        const std::size_t hi = std::max(rows, cols), lo = std::min(rows, cols);
        if (hi >= (1u << 15)) throw SizeError("image dimension must be below 32768");
        return {rows, cols, hi > lo ? hi : hi + 1};
    }

    bool square() const { return rows == cols; }
    std::size_t pad() const { return S * S - rows * cols; }
    std::uint16_t r_register() const {
        const std::uint16_t n = square() ? 0 : static_cast<std::uint16_t>(std::min(rows, cols));
        return static_cast<std::uint16_t>((rows > cols ? 0x8000u : 0u) | n);
    }

    /// Inverse of r_register for a given S; nullopt when R is inconsistent.
    static std::optional<Geometry> decode(std::size_t S, std::uint16_t r) {
        const bool tall = (r & 0x8000u) != 0;
        const std::size_t n = r & 0x7FFFu;
        if (S < 3) return std::nullopt;
        if (n == 0) {
            if (tall) return std::nullopt;
            return Geometry{S - 1, S - 1, S};
        }
        if (n < 2 || n >= S) return std::nullopt;
        return tall ? Geometry{S, n, S} : Geometry{n, S, S};
    }
};

struct PaddedGrid {
    std::size_t S = 0;
    std::vector<std::uint8_t> cells;
    std::uint16_t r = 0;
};

/// Plain pixels raster-first, then F' (counter bytes land in the last two cells).
inline PaddedGrid pad_image(const GrayImage& img, const std::vector<std::uint8_t>& f_prime) {
    const Geometry geo = Geometry::of(img.rows, img.cols);
    if (f_prime.size() != geo.pad()) throw SizeError("padding sequence has the wrong length");
    PaddedGrid g{geo.S, {}, geo.r_register()};
    g.cells.reserve(geo.S * geo.S);
    g.cells.insert(g.cells.end(), img.pixels.begin(), img.pixels.end());
    g.cells.insert(g.cells.end(), f_prime.begin(), f_prime.end());
    return g;
}

// ---------------------------------------------------------------------------
// Cat map

enum class CatDirection { forward, inverse };

namespace detail {

inline std::int64_t mod(std::int64_t v, std::int64_t m) {
    const std::int64_t r = v % m;
    return r < 0 ? r + m : r;
}

inline std::optional<std::int64_t> mod_inverse(std::int64_t v, std::int64_t m) {
    std::int64_t r0 = m, r1 = mod(v, m), t0 = 0, t1 = 1;
    while (r1 != 0) {
        const std::int64_t q = r0 / r1;
        std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
        std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
    }
    if (r0 != 1) return std::nullopt;
    return mod(t0, m);
}

} // namespace detail

/// Position map of one Cat round on an S x S grid (x = row, y = column).
class CatMap {
public:
    CatMap(const CatParams& p, std::size_t S) : S_(static_cast<std::int64_t>(S)) {
        if (S < 1) throw SizeError("cat map needs a nonempty grid");
        a_ = detail::mod(p.a, S_);
        b_ = detail::mod(p.b, S_);
        c_ = detail::mod(p.c, S_);
        d_ = detail::mod(p.d, S_);
        e_ = detail::mod(p.e, S_);
        const auto inv = detail::mod_inverse(detail::mod(a_ * d_ - b_ * c_, S_), S_);
        if (!inv) throw KeyError("cat map determinant is not invertible modulo " + std::to_string(S));
        det_inv_ = *inv;
    }

    std::pair<std::int64_t, std::int64_t> forward(std::int64_t x, std::int64_t y) const {
        const std::int64_t xp = detail::mod(a_ * x + b_ * y, S_);
        const std::int64_t yp = detail::mod(c_ * x + d_ * y + e_ * f(xp), S_);
        return {xp, yp};
    }

    std::pair<std::int64_t, std::int64_t> inverse(std::int64_t xp, std::int64_t yp) const {
        const std::int64_t t = detail::mod(yp - e_ * f(xp), S_);
        const std::int64_t x = detail::mod(det_inv_ * detail::mod(d_ * xp - b_ * t, S_), S_);
        const std::int64_t y = detail::mod(det_inv_ * detail::mod(a_ * t - c_ * xp, S_), S_);
        return {x, y};
    }

    /// dest[i] = index the byte in cell i moves to.
    std::vector<std::uint32_t> table(CatDirection dir) const {
        std::vector<std::uint32_t> t(static_cast<std::size_t>(S_ * S_));
        for (std::int64_t x = 0; x < S_; ++x)
            for (std::int64_t y = 0; y < S_; ++y) {
                const auto [u, v] = dir == CatDirection::forward ? forward(x, y) : inverse(x, y);
                t[static_cast<std::size_t>(x * S_ + y)] = static_cast<std::uint32_t>(u * S_ + v);
            }
        return t;
    }

private:
    std::int64_t f(std::int64_t xp) const { return detail::mod(xp * xp + 1, S_); }

    std::int64_t S_, a_, b_, c_, d_, e_, det_inv_;
};

inline void apply_permutation(std::vector<std::uint8_t>& cells, const std::vector<std::uint32_t>& dest,
                              unsigned rounds) {
    std::vector<std::uint8_t> tmp(cells.size());
    for (unsigned r = 0; r < rounds; ++r) {
        for (std::size_t i = 0; i < cells.size(); ++i) tmp[dest[i]] = cells[i];
        cells.swap(tmp);
    }
}

/// One Cat round over a row-major S x S grid.
inline std::vector<std::uint8_t> cat_round(const std::vector<std::uint8_t>& grid, std::size_t S,
                                           const CatParams& p, CatDirection dir) {
    if (grid.size() != S * S) throw SizeError("cat_round: grid is not S x S");
    std::vector<std::uint8_t> out = grid;
    apply_permutation(out, CatMap(p, S).table(dir), 1);
    return out;
}

inline void xor_into(std::vector<std::uint8_t>& cells, const std::vector<std::uint8_t>& g) {
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] ^= g[i];
}

// ---------------------------------------------------------------------------
// encrypt / decrypt

struct CipherEnvelope {
    std::size_t S = 0;
    std::uint16_t r_prime = 0;
    std::vector<std::uint8_t> pixels;
    friend bool operator==(const CipherEnvelope&, const CipherEnvelope&) = default;
};

inline CipherEnvelope encrypt(const GrayImage& img, const SecretKey& key, unsigned cnt) {
    key.validate();
    validate_counter(cnt);
    const Geometry geo = Geometry::of(img.rows, img.cols);
    const CatMap cat(key.cat, geo.S);
    const KeystreamBundle ks = keystream(key, cnt, geo.S, geo.pad());
    PaddedGrid grid = pad_image(img, ks.f_prime);
    xor_into(grid.cells, ks.g);
    apply_permutation(grid.cells, cat.table(CatDirection::forward), diffusion_rounds(cnt));
    return {geo.S, static_cast<std::uint16_t>(grid.r ^ ks.mask16), std::move(grid.cells)};
}

struct DecryptOptions {
    /// Accept cnt_d even when the embedded counter disagrees (e.g. the
    /// counter cells were damaged in transit).
    bool trust_counter = false;
    /// Counters within this distance of cnt_d are tried when the embedded
    /// counter disagrees.
    unsigned search_window = 16;
};

namespace detail {

struct Attempt {
    Geometry geo;
    std::vector<std::uint8_t> cells; // diffusion undone, confusion undone
    unsigned embedded = 0;
    bool counter_valid = false;
};

inline std::optional<Attempt> try_counter(const CipherEnvelope& env, const SecretKey& key, unsigned c) {
    const std::uint16_t mask = keystream_mask(key, c);
    const auto geo = Geometry::decode(env.S, static_cast<std::uint16_t>(env.r_prime ^ mask));
    if (!geo) return std::nullopt;
    const KeystreamBundle ks = keystream(key, c, geo->S, geo->pad());
    Attempt at{*geo, env.pixels, 0, false};
    apply_permutation(at.cells, CatMap(key.cat, geo->S).table(CatDirection::inverse), diffusion_rounds(c));
    xor_into(at.cells, ks.g);
    const std::size_t n = at.cells.size();
    const std::uint8_t hi = at.cells[n - 2], lo = at.cells[n - 1];
    at.embedded = (static_cast<unsigned>(hi >> 4) << 8) | lo;
    at.counter_valid = (hi & 0x0Fu) == 0;
    return at;
}

inline GrayImage strip(const Attempt& at) {
    const std::size_t count = at.geo.rows * at.geo.cols;
    return GrayImage(at.geo.rows, at.geo.cols,
                     std::vector<std::uint8_t>(at.cells.begin(), at.cells.begin() + static_cast<std::ptrdiff_t>(count)));
}

} // namespace detail

inline void validate_envelope(const CipherEnvelope& env) {
    if (env.S < 3 || env.S > 32768) throw FormatError("envelope side out of range");
    if (env.pixels.size() != env.S * env.S) throw FormatError("envelope pixel count is not S^2");
}

/// Decrypts with the receiver's counter. A counter mismatch raises
/// DesyncError carrying the sender's counter when one within the search
/// window reproduces its own embedded value.
inline GrayImage decrypt(const CipherEnvelope& env, const SecretKey& key, unsigned cnt_d,
                         const DecryptOptions& opt = {}) {
    key.validate();
    validate_counter(cnt_d);
    validate_envelope(env);
    static_cast<void>(CatMap(key.cat, env.S));

    const auto at = detail::try_counter(env, key, cnt_d);
    if (at && (opt.trust_counter || (at->counter_valid && at->embedded == cnt_d)))
        return detail::strip(*at);
    if (!at && opt.trust_counter)
        throw FormatError("size register does not decode under the receiver counter");

    const int w = static_cast<int>(std::min(opt.search_window, counter_modulus / 2));
    for (int dist = 1; dist <= w; ++dist) {
        for (int sign : {-1, 1}) {
            const unsigned c = static_cast<unsigned>(
                detail::mod(static_cast<std::int64_t>(cnt_d) + sign * dist, counter_modulus));
            const auto cand = detail::try_counter(env, key, c);
            if (cand && cand->counter_valid && cand->embedded == c)
                throw DesyncError(c, "counter mismatch: receiver cnt=" + std::to_string(cnt_d) +
                                         ", envelope was encrypted at cnt=" + std::to_string(c));
        }
    }
    throw DesyncError(std::nullopt, "counter mismatch: receiver cnt=" + std::to_string(cnt_d) +
                                        ", sender counter not found within " + std::to_string(w));
}

// ---------------------------------------------------------------------------
// AHN1 envelope bytes

inline std::vector<std::uint8_t> serialize(const CipherEnvelope& env) {
    validate_envelope(env);
    std::vector<std::uint8_t> out{'A', 'H', 'N', '1', 1};
    out.push_back(static_cast<std::uint8_t>(env.S >> 8));
    out.push_back(static_cast<std::uint8_t>(env.S));
    out.push_back(static_cast<std::uint8_t>(env.r_prime >> 8));
    out.push_back(static_cast<std::uint8_t>(env.r_prime));
    out.insert(out.end(), env.pixels.begin(), env.pixels.end());
    return out;
}

inline CipherEnvelope deserialize(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 9) throw FormatError("envelope shorter than its header");
    if (!std::equal(bytes.begin(), bytes.begin() + 4, "AHN1")) throw FormatError("bad envelope magic");
    if (bytes[4] != 1) throw FormatError("unsupported envelope version " + std::to_string(bytes[4]));
    CipherEnvelope env;
    env.S = (static_cast<std::size_t>(bytes[5]) << 8) | bytes[6];
    env.r_prime = static_cast<std::uint16_t>((bytes[7] << 8) | bytes[8]);
    if (bytes.size() != 9 + env.S * env.S)
        throw FormatError("envelope length " + std::to_string(bytes.size()) + " does not match 9 + S^2");
    env.pixels.assign(bytes.begin() + 9, bytes.end());
    validate_envelope(env);
    return env;
}

// ---------------------------------------------------------------------------
// key file

namespace detail {

inline std::string fixed_digits(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace detail

inline void write_key(std::ostream& os, const SecretKey& k) {
    using detail::fixed_digits;
    for (std::size_t i = 0; i < 3; ++i)
        os << 'A' << i + 1 << " = " << fixed_digits(k.amplitude[i], 15) << '\n';
    os << "omega = " << fixed_digits(k.omega, 7) << '\n';
    for (std::size_t i = 0; i < 3; ++i)
        os << "omega" << i + 1 << " = " << fixed_digits(k.omega_svs[i], 7) << '\n';
    for (std::size_t i = 0; i < 3; ++i)
        os << 'x' << i + 1 << "_0 = " << fixed_digits(k.x0[i], 15) << '\n';
    os << "a = " << k.cat.a << "\nb = " << k.cat.b << "\nc = " << k.cat.c << "\nd = " << k.cat.d
       << "\ne = " << k.cat.e << "\nT = " << k.T << '\n';
}

/// Parses `name = value` lines; blank lines and `#` comments are skipped.
/// Every field must appear exactly once.
inline SecretKey read_key(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("key file line " + std::to_string(lineno) + ": expected name = value");
        const std::string name = trim(line.substr(0, eq));
        if (!kv.emplace(name, trim(line.substr(eq + 1))).second)
            throw FormatError("key file: duplicate field '" + name + "'");
    }

    auto take = [&](const std::string& name) {
        const auto it = kv.find(name);
        if (it == kv.end()) throw FormatError("key file: missing field '" + name + "'");
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto real = [&](const std::string& name) {
        const std::string v = take(name);
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v.size() || v.empty()) throw FormatError("key file: '" + name + "' is not a number");
        return d;
    };
    auto integer = [&](const std::string& name) {
        const std::string v = take(name);
        std::int64_t i = 0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
        if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
            throw FormatError("key file: '" + name + "' is not an integer");
        return i;
    };

    SecretKey k;
    for (std::size_t i = 0; i < 3; ++i) k.amplitude[i] = real("A" + std::to_string(i + 1));
    k.omega = real("omega");
    for (std::size_t i = 0; i < 3; ++i) k.omega_svs[i] = real("omega" + std::to_string(i + 1));
    for (std::size_t i = 0; i < 3; ++i) k.x0[i] = real("x" + std::to_string(i + 1) + "_0");
    k.cat = {integer("a"), integer("b"), integer("c"), integer("d"), integer("e")};
    k.T = static_cast<int>(integer("T"));
    if (!kv.empty()) throw FormatError("key file: unknown field '" + kv.begin()->first + "'");
    k.validate();
    return k;
}

} // namespace ahnn

#endif // AHNN_CIPHER_HPP
