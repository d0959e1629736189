#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ahnn/dynamics.hpp"
#include "ahnn/presets.hpp"

using namespace ahnn;

namespace {

// Long-double evaluation of -x + W(P) tanh(x + P_i), written out entry by entry.
std::array<long double, 3> reference_rhs(std::array<long double, 3> x, long double k, long double P,
                                         std::array<long double, 3> off) {
    const long double t1 = std::tanh(x[0] + off[0]), t2 = std::tanh(x[1] + off[1]),
                      t3 = std::tanh(x[2] + off[2]);
    return {-(x[0] + off[0]) + 2.2L * t1 - 1.2L * P * t2 + 0.5L * P * t3,
            -(x[1] + off[1]) + 2.0L * P * t1 + 1.5L * t2 + k * t3,
            -(x[2] + off[2]) - 5.0L * P * t1 - 1.0L * t3};
}

} // namespace

TEST(Stimulus, WeightStimulusStartsHigh) { EXPECT_EQ(wms_value(0.0, 1.0, 0.01), 1.0); }

TEST(Stimulus, WeightStimulusSecondHalfPeriodIsLow) {
    EXPECT_EQ(wms_value(std::numbers::pi / 0.01 * 1.5, 1.0, 0.01), -1.0);
}

TEST(Stimulus, WeightStimulusMatchesSignOfSine) {
    // omega t = 4 rad lies in (pi, 2 pi)
    EXPECT_LT(std::sin(4.0), 0.0);
    EXPECT_EQ(wms_value(400.0, 1.0, 0.01), -1.0);
    for (double t = 0.5; t < 3000.0; t += 7.3)
        EXPECT_EQ(wms_value(t, 2.0, 0.01), std::sin(0.01 * t) > 0 ? 2.0 : -2.0) << t;
}

TEST(Stimulus, StateStimulusValues) {
    EXPECT_EQ(svs_value(0.0, 5.0, 0.02), 5.0);
    EXPECT_EQ(svs_value(200.0, 5.0, 0.02), 0.0);
    for (double t = 0.0; t < 1000.0; t += 13.1) {
        EXPECT_EQ(svs_value(t, 0.0, 0.02), 0.0);
        const double v = svs_value(t, 3.0, 0.05);
        EXPECT_TRUE(v == 0.0 || v == 3.0);
    }
}

TEST(Stimulus, ZerosOfSineOpenTheirHalfPeriod) {
    const double w = 0.5;
    EXPECT_EQ(wms_value(2.0 * std::numbers::pi / w, 1.0, w), 1.0);
    EXPECT_EQ(svs_value(2.0 * std::numbers::pi / w, 4.0, w), 4.0);
}

TEST(Network, WeightMatrixEntries) {
    const auto w = NetworkParams{1.15}.weights();
    const std::array<double, 9> expect{2.2, -1.2, 0.5, 2.0, 1.5, 1.15, -5.0, 0.0, -1.0};
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(w[i / 3][i % 3], expect[i]);
    const auto m = NetworkParams{1.15}.weights(-1.0);
    EXPECT_EQ(m[0][1], 1.2);
    EXPECT_EQ(m[0][2], -0.5);
    EXPECT_EQ(m[1][0], -2.0);
    EXPECT_EQ(m[2][0], 5.0);
    EXPECT_EQ(m[1][2], 1.15);
}

TEST(Network, OriginIsFixed) {
    EXPECT_EQ(hnn_rhs(StateVector{}, 1.15), StateVector{});
    StimulusProgram s;
    s.wms_hold = -1.0;
    EXPECT_EQ(ahnn_rhs(StateVector{}, 3.0, NetworkParams{}, s), StateVector{});
}

TEST(Network, HnnMatchesReference) {
    for (auto [x, k] : {std::pair{StateVector{{0.0, 0.1, 0.0}}, 1.15}, std::pair{StateVector{{1.0, 0.0, 0.0}}, 1.0},
                        std::pair{StateVector{{-0.3, 0.7, 2.1}}, 1.15}}) {
        const auto d = hnn_rhs(x, k);
        const auto r = reference_rhs({x[0], x[1], x[2]}, k, 1.0L, {0, 0, 0});
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d[i], static_cast<double>(r[i]), 1e-14);
    }
    const auto d = hnn_rhs(StateVector{{0.0, 0.1, 0.0}}, 1.15);
    EXPECT_NEAR(d[0], -1.2 * 0.0996679946249558, 1e-15);
    EXPECT_NEAR(d[1], -0.1 + 1.5 * 0.0996679946249558, 1e-15);
    EXPECT_EQ(d[2], 0.0);
}

TEST(Network, UnstimulatedAhnnEqualsHnn) {
    const StimulusProgram none;
    for (double a = -2.0; a <= 2.0; a += 0.37) {
        const StateVector x{{a, 0.5 * a - 0.2, 1.0 - a}};
        EXPECT_EQ(ahnn_rhs(x, 12.0, NetworkParams{1.15}, none), hnn_rhs(x, 1.15));
    }
}

TEST(Network, StimulatedRhsMatchesReference) {
    StimulusProgram s;
    s.wms = SquareWave{1.0, 0.01};
    s.svs[0] = SquareWave{5.0, 0.02};
    const StateVector x{{0.0, 0.1, 0.0}};
    const auto d = ahnn_rhs(x, 0.0, NetworkParams{1.15}, s);
    const auto r = reference_rhs({0.0L, 0.1L, 0.0L}, 1.15L, 1.0L, {5.0L, 0, 0});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d[i], static_cast<double>(r[i]), 1e-14);
    // same as the unstimulated field at the shifted state
    const auto h = hnn_rhs(StateVector{{5.0, 0.1, 0.0}}, 1.15);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d[i], h[i], 1e-15);

    // second WMS half period, second SVS half period (off)
    const double t = 500.0;
    const auto d2 = ahnn_rhs(x, t, NetworkParams{1.15}, s);
    const auto r2 = reference_rhs({0.0L, 0.1L, 0.0L}, 1.15L, -1.0L, {0, 0, 0});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d2[i], static_cast<double>(r2[i]), 1e-14);
}

TEST(Network, ConstantStimulusShiftsOnlyTheFirstLeak) {
    StimulusProgram s;
    s.svs_hold = {0.4, 0.0, 0.0};
    s.cs = 0.7;
    const StateVector x{{0.2, -0.3, 0.9}};
    const auto d = ahnn_rhs(x, 0.0, NetworkParams{1.15}, s);
    const double t1 = std::tanh(0.6), t2 = std::tanh(-0.3), t3 = std::tanh(0.9);
    EXPECT_NEAR(d[0], -(0.2 - 0.7) + 2.2 * t1 - 1.2 * t2 + 0.5 * t3, 1e-15);
    EXPECT_NEAR(d[1], 0.3 + 2.0 * t1 + 1.5 * t2 + 1.15 * t3, 1e-15);
    EXPECT_NEAR(d[2], -0.9 - 5.0 * t1 - t3, 1e-15);
}

TEST(Network, OffsetEquilibriaAreFixedPoints) {
    const std::array<double, 3> amp{5.0, 5.0, 12.0};
    for (int mask = 0; mask < 8; ++mask) {
        StimulusProgram s;
        StateVector x;
        for (std::size_t i = 0; i < 3; ++i)
            if (mask & (1 << i)) {
                s.svs_hold[i] = amp[i];
                x[i] = -amp[i];
            }
        for (double p : {1.0, -1.0}) {
            s.wms_hold = p;
            const auto d = ahnn_rhs(x, 0.0, NetworkParams{1.15}, s);
            EXPECT_EQ(d, StateVector{}) << mask;
        }
    }
}

TEST(Rk4, ZeroFieldLeavesStateUnchanged) {
    const StateVector x{{0.3, -1.0, 2.0}};
    const auto y = rk4_step(x, 0.0, 0.1, [](const StateVector&, double) { return StateVector{}; });
    EXPECT_EQ(x, y);
}

TEST(Rk4, DecayMatchesExponential) {
    const auto y = rk4_step(1.0, 0.0, 0.1, [](double v, double) { return -v; });
    EXPECT_NEAR(y, std::exp(-0.1), 1e-7);
}

TEST(Rk4, StageTimesAreTTHalfHalfH) {
    std::vector<double> times;
    rk4_step(0.0, 2.0, 0.5, [&](double, double t) {
        times.push_back(t);
        return 0.0;
    });
    EXPECT_EQ(times, (std::vector<double>{2.0, 2.25, 2.25, 2.5}));
}

TEST(Rk4, FourthOrderConvergence) {
    // 10 time units of the unstimulated network from a smooth start
    const StateVector x0{{0.0, 0.1, 0.0}};
    auto run = [&](double h) {
        const auto steps = static_cast<std::size_t>(std::lround(10.0 / h));
        return simulate(x0, NetworkParams{1.15}, StimulusProgram{}, h, steps).samples.back().x;
    };
    const auto ref = run(0.1 / 8.0);
    const auto e1 = (run(0.1) - ref).norm();
    const auto e2 = (run(0.05) - ref).norm();
    const double order = std::log2(e1 / e2);
    EXPECT_GE(order, 3.7);
    EXPECT_LE(order, 4.3);
}

TEST(Simulate, RejectsZeroSteps) {
    EXPECT_THROW(simulate(StateVector{}, NetworkParams{}, StimulusProgram{}, 0.01, 0), RangeError);
}

TEST(Simulate, OneStepGivesTwoSamples) {
    const StateVector x0{{0.0, 0.1, 0.0}};
    const auto tr = simulate(x0, NetworkParams{}, StimulusProgram{}, 0.01, 1);
    ASSERT_EQ(tr.size(), 2u);
    EXPECT_EQ(tr[0].x, x0);
    EXPECT_EQ(tr[1].x, rk4_step(x0, 0.0, 0.01, [](const StateVector& s, double) { return hnn_rhs(s, 1.15); }));
}

TEST(Simulate, TimesAreMultiplesOfH) {
    const auto tr = simulate(StateVector{{0.0, 0.1, 0.0}}, NetworkParams{}, StimulusProgram{}, 0.01, 1000);
    ASSERT_EQ(tr.size(), 1001u);
    for (std::size_t n = 0; n < tr.size(); ++n) EXPECT_EQ(tr[n].t, static_cast<double>(n) * 0.01);
}

TEST(Simulate, DivergenceReportsStep) {
    try {
        integrate(StateVector{{1.0, 1.0, 1.0}}, [](const StateVector& s, double) { return 10.0 * s; }, 0.1, 1000);
        FAIL() << "expected Divergence";
    } catch (const Divergence& d) {
        EXPECT_GT(d.step(), 1u);
        EXPECT_LT(d.step(), 1000u);
    }
}

TEST(Simulate, PresetsStayBounded) {
    for (const char* name : {"wms", "wms-svs1", "wms-svs-multi", "wms-svs-3d", "cs-svs", "hnn-k1", "wms-k1"}) {
        const Preset p = preset(name);
        const auto tr = simulate(p.initial, p.params, p.stimulus, 0.01, 100000);
        double m = 0.0;
        for (const auto& s : tr.samples)
            for (double v : s.x.x) m = std::max(m, std::abs(v));
        EXPECT_LT(m, 40.0) << name;
    }
}

TEST(Symmetry, MirrorDifferenceSeries) {
    const auto d = mirror_diff(StateVector{{0.0, 0.1, 0.0}}, NetworkParams{1.15}, 0.01, 10000);
    StimulusProgram plus;
    const auto a = simulate(StateVector{{0.0, 0.1, 0.0}}, NetworkParams{1.15}, plus, 0.01, 10000);
    ASSERT_EQ(d.dx1.size(), a.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        ASSERT_NEAR(d.dx1[n], 2.0 * a[n].x[0], 1e-9) << n;
        ASSERT_NEAR(d.dx2[n], 0.0, 1e-9) << n;
        ASSERT_NEAR(d.dx3[n], 0.0, 1e-9) << n;
    }
}

TEST(Symmetry, SharedFixedPointGivesZeroDifference) {
    const auto d = mirror_diff(StateVector{}, NetworkParams{1.15}, 0.01, 100);
    for (std::size_t n = 0; n < d.dx1.size(); ++n) {
        EXPECT_EQ(d.dx1[n], 0.0);
        EXPECT_EQ(d.dx2[n], 0.0);
        EXPECT_EQ(d.dx3[n], 0.0);
    }
}

TEST(Symmetry, ConstantOffsetIsATranslation) {
    const double a1 = 5.0;
    StimulusProgram off;
    off.svs_hold = {a1, 0.0, 0.0};
    const StateVector x0{{0.0, 0.1, 0.0}};
    const auto base = simulate(x0, NetworkParams{1.15}, StimulusProgram{}, 0.01, 10000);
    const auto shifted = simulate(StateVector{{x0[0] - a1, x0[1], x0[2]}}, NetworkParams{1.15}, off, 0.01, 10000);
    for (std::size_t n = 0; n < base.size(); ++n) {
        ASSERT_NEAR(shifted[n].x[0] + a1, base[n].x[0], 1e-12) << n;
        ASSERT_NEAR(shifted[n].x[1], base[n].x[1], 1e-12) << n;
        ASSERT_NEAR(shifted[n].x[2], base[n].x[2], 1e-12) << n;
    }
}

TEST(Export, CsvHeaderAndPrecision) {
    const auto tr = simulate(StateVector{{0.0, 0.1, 0.0}}, NetworkParams{}, StimulusProgram{}, 0.01, 3);
    std::ostringstream os;
    write_csv(os, tr);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,x1,x2,x3");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 4u);
        EXPECT_EQ(v[1], tr[static_cast<std::size_t>(rows - 1)].x[0]);
    }
    EXPECT_EQ(rows, 4);
}

TEST(Presets, AllNamesResolve) {
    for (const auto& n : preset_names()) EXPECT_NO_THROW(preset(n)) << n;
    EXPECT_THROW(preset("nope"), RangeError);
    EXPECT_EQ(preset("wms-k1").params.k, 1.0);
}
