#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "ckdsim/duffing.hpp"
#include "ckdsim/grid.hpp"
#include "ckdsim/husimi.hpp"
#include "ckdsim/parallel.hpp"

namespace {

TEST(Params, DefaultsAreChaoticDissipative) {
    ckd::DuffingParams p;
    EXPECT_DOUBLE_EQ(p.alpha, -1.0);
    EXPECT_DOUBLE_EQ(p.beta, 0.25);
    EXPECT_DOUBLE_EQ(p.delta, 0.1);
    EXPECT_DOUBLE_EQ(p.gamma, 2.5);
    EXPECT_DOUBLE_EQ(p.omega, 2.0);
    EXPECT_DOUBLE_EQ(p.drive_period(), ckd::pi);
    EXPECT_NO_THROW(p.validate());
}

TEST(Params, ValidateRejectsBadValues) {
    ckd::DuffingParams p;
    p.delta = -0.1;
    EXPECT_THROW(p.validate(), ckd::ConfigError);
    p = ckd::DuffingParams{};
    p.omega = 0.0;
    EXPECT_THROW(p.validate(), ckd::ConfigError);
    p = ckd::DuffingParams{};
    p.mass = 0.0;
    EXPECT_THROW(p.validate(), ckd::ConfigError);
    p = ckd::DuffingParams{};
    p.hbar = -1.0;
    EXPECT_THROW(p.validate(), ckd::ConfigError);
    p = ckd::DuffingParams{};
    p.gamma = std::nan("");
    EXPECT_THROW(p.validate(), ckd::ConfigError);
}

TEST(Params, DampingSchedule) {
    ckd::DuffingParams p;
    EXPECT_DOUBLE_EQ(ckd::damping_factor(p, 0.0), 1.0);
    EXPECT_NEAR(ckd::damping_factor(p, 10.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(ckd::effective_hbar(p, 10.0), std::exp(-1.0), 1e-15);
    p.delta = 0.0;
    EXPECT_DOUBLE_EQ(ckd::damping_factor(p, 123.0), 1.0);
}

TEST(Params, PotentialDerivativesMatchFiniteDifferences) {
    ckd::DuffingParams p;
    p.alpha = -1.0;
    p.beta = 0.25;
    const double t = 0.7;
    const double h = 1e-6;
    for (const double x : {-2.3, -0.5, 0.0, 1.1, 3.7}) {
        const double fd_force =
            -(ckd::potential(p, x + h, t) - ckd::potential(p, x - h, t)) / (2.0 * h);
        EXPECT_NEAR(ckd::potential_force(p, x, t), fd_force, 1e-6);
        const double fd_curv = (ckd::potential_force(p, x - h, t) -
                                ckd::potential_force(p, x + h, t)) /
                               (2.0 * h);
        EXPECT_NEAR(ckd::potential_curvature(p, x), fd_curv, 1e-5);
    }
}

TEST(Params, FingerprintSeparatesParameterSets) {
    ckd::DuffingParams a, b;
    EXPECT_EQ(ckd::params_fingerprint(a), ckd::params_fingerprint(b));
    b.beta = 0.250000001;
    EXPECT_NE(ckd::params_fingerprint(a), ckd::params_fingerprint(b));
}

TEST(State, ValidateRejectsBadSigma) {
    ckd::GaussianState s;
    EXPECT_NO_THROW(s.validate());
    s.sigma = 0.0;
    EXPECT_THROW(s.validate(), ckd::ConfigError);
}

TEST(Grid, LayoutAndWavevectors) {
    const auto g = ckd::make_grid(-12.0, 12.0, 8);
    EXPECT_DOUBLE_EQ(g.dx(), 3.0);
    EXPECT_DOUBLE_EQ(g.x(0), -12.0);
    EXPECT_DOUBLE_EQ(g.x(4), 0.0);
    // FFT ordering: 0, 1, 2, 3, -4, -3, -2, -1 times 2 pi / (M dx)
    const double base = 2.0 * ckd::pi / 24.0;
    EXPECT_DOUBLE_EQ(g.wavevector(0), 0.0);
    EXPECT_DOUBLE_EQ(g.wavevector(1), base);
    EXPECT_DOUBLE_EQ(g.wavevector(3), 3.0 * base);
    EXPECT_DOUBLE_EQ(g.wavevector(4), -4.0 * base);
    EXPECT_DOUBLE_EQ(g.wavevector(7), -base);
    EXPECT_NEAR(g.k_nyquist(), 4.0 * base, 1e-15);
}

TEST(Grid, RejectsBadShapes) {
    EXPECT_THROW(ckd::make_grid(-1.0, 1.0, 100), ckd::ConfigError);  // not 2^k
    EXPECT_THROW(ckd::make_grid(1.0, -1.0, 64), ckd::ConfigError);
    EXPECT_THROW(ckd::make_grid(-1.0, 1.0, 4), ckd::ConfigError);  // too small
}

TEST(Parallel, ResultIndependentOfThreadCount) {
    const std::size_t n = 1000;
    std::vector<double> serial(n), threaded(n);
    ckd::parallel_for(n, 1, [&](std::size_t i) { serial[i] = std::sin(0.1 * double(i)); });
    ckd::parallel_for(n, 7, [&](std::size_t i) { threaded[i] = std::sin(0.1 * double(i)); });
    EXPECT_EQ(serial, threaded);
}

TEST(Parallel, PropagatesExceptions) {
    EXPECT_THROW(ckd::parallel_for(100, 4,
                                   [](std::size_t i) {
                                       if (i == 57) throw ckd::NumericalError("boom");
                                   }),
                 ckd::NumericalError);
}

TEST(Parallel, CoversEveryIndexExactlyOnce) {
    std::vector<std::atomic<int>> hits(257);
    ckd::parallel_for(hits.size(), 5, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Linspace, EndpointsAndSpacing) {
    const auto v = ckd::linspace(-1.0, 1.0, 5);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_DOUBLE_EQ(v.front(), -1.0);
    EXPECT_DOUBLE_EQ(v.back(), 1.0);
    EXPECT_DOUBLE_EQ(v[2], 0.0);
}

}  // namespace
