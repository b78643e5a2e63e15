#include <catch2/catch_amalgamated.hpp>

#include <tdli/fit.hpp>
#include <tdli/rng.hpp>

using Catch::Approx;
using namespace tdli;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        x[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return x;
}

} // namespace

TEST_CASE("gaussian fit recovers noiseless parameters") {
    const auto x = linspace(-60.0, 60.0, 41);
    std::vector<double> y;
    for (double xi : x) y.push_back(0.3 + 0.7 * std::exp(-0.5 * std::pow((xi - 4.0) / 18.0, 2)));
    const GaussianFit f = fit_gaussian(x, y);
    REQUIRE(f.converged);
    REQUIRE(f.amplitude == Approx(0.7).margin(1e-8));
    REQUIRE(f.center == Approx(4.0).margin(1e-7));
    REQUIRE(f.sigma == Approx(18.0).margin(1e-7));
    REQUIRE(f.offset == Approx(0.3).margin(1e-8));
    REQUIRE(f.fwhm() == Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * 18.0).epsilon(1e-7));
    REQUIRE(f.rss < 1e-16);
}

TEST_CASE("gaussian fit handles dips and rejects short inputs") {
    const auto x = linspace(-10.0, 10.0, 21);
    std::vector<double> y;
    for (double xi : x) y.push_back(1.0 - 0.4 * std::exp(-0.5 * xi * xi));
    const GaussianFit f = fit_gaussian(x, y);
    REQUIRE(f.converged);
    REQUIRE(f.amplitude == Approx(-0.4).margin(1e-7));
    REQUIRE(f.offset == Approx(1.0).margin(1e-7));

    const std::vector<double> tiny{0, 1, 2, 3, 4, 5, 6};
    REQUIRE_THROWS_AS(fit_gaussian(tiny, tiny), std::invalid_argument);
}

TEST_CASE("damped sine fit recovers a noiseless fringe") {
    const double period = 3.0302, decay = 8.0, amp = 0.21, off = 0.35, phase = 0.6;
    const auto x = linspace(0.0, 9.0, 61);
    std::vector<double> y;
    for (double xi : x)
        y.push_back(off +
                    amp * std::exp(-xi / decay) *
                        std::cos(constants::two_pi * xi / period + phase));
    const DampedSineFit f = fit_damped_sine(x, y);
    REQUIRE(f.converged);
    REQUIRE(f.period == Approx(period).epsilon(1e-6));
    REQUIRE(f.amplitude == Approx(amp).epsilon(1e-5));
    REQUIRE(f.offset == Approx(off).margin(1e-6));
}

TEST_CASE("damped sine fit tolerates noise") {
    const double period = 3.0302;
    const auto x = linspace(0.0, 9.0, 25);
    std::vector<double> y;
    rng_engine rng(12345);
    NormalSampler normal;
    for (double xi : x)
        y.push_back(0.35 +
                    0.21 * std::exp(-xi / 8.0) *
                        std::cos(constants::two_pi * xi / period + 0.6) +
                    0.05 * 0.21 * normal(rng));
    const DampedSineFit f = fit_damped_sine(x, y);
    REQUIRE(f.converged);
    REQUIRE(f.period == Approx(period).epsilon(0.05));
}

TEST_CASE("fit results stay finite on adversarial data") {
    // Unstructured input need not converge, but the best-so-far parameters
    // and residual must come back finite so callers can report them.
    std::vector<double> x = linspace(0.0, 1.0, 16);
    std::vector<double> y;
    rng_engine rng(99);
    NormalSampler normal;
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(normal(rng));
    const DampedSineFit f = fit_damped_sine(x, y);
    REQUIRE(std::isfinite(f.period));
    REQUIRE(std::isfinite(f.amplitude));
    REQUIRE(std::isfinite(f.rss));
    const GaussianFit g = fit_gaussian(x, y);
    REQUIRE(std::isfinite(g.center));
    REQUIRE(std::isfinite(g.rss));
}

TEST_CASE("fixed-period fringe fit is exact and reports shifts") {
    const double d = 78.815e-9;
    const auto frac = linspace(0.0, 0.9583, 24);
    std::vector<double> x;
    for (double f : frac) x.push_back(f * d);

    auto fringe = [&](double x0, double amp, double mean) {
        std::vector<double> y;
        for (double xi : x)
            y.push_back(mean + amp * std::cos(constants::two_pi * (xi - x0) / d));
        return y;
    };

    const FringeFit ref = fit_fringe(x, fringe(0.15 * d, 0.04, 0.12), d);
    REQUIRE(ref.amplitude == Approx(0.04).epsilon(1e-12));
    REQUIRE(ref.mean == Approx(0.12).epsilon(1e-12));
    REQUIRE(ref.phase_offset == Approx(0.15 * d).epsilon(1e-9));
    REQUIRE(ref.rss < 1e-20);

    // A displacement smaller than half a period is recovered exactly.
    const FringeFit moved = fit_fringe(x, fringe(0.15 * d + 3.5e-9, 0.04, 0.12), d);
    REQUIRE(fringe_shift(ref, moved, d) == Approx(3.5e-9).epsilon(1e-9));

    // Displacements fold into (-d/2, d/2].
    const FringeFit wrapped = fit_fringe(x, fringe(0.15 * d + 0.75 * d, 0.04, 0.12), d);
    REQUIRE(fringe_shift(ref, wrapped, d) == Approx(-0.25 * d).epsilon(1e-9));

    REQUIRE_THROWS_AS(fit_fringe({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}, d),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(fit_fringe(x, fringe(0.0, 0.04, 0.12), 0.0), std::domain_error);
}

TEST_CASE("phase offset is reported inside one period") {
    const double d = 1.0;
    const auto x = linspace(0.0, 0.95, 20);
    std::vector<double> y;
    for (double xi : x) y.push_back(std::cos(constants::two_pi * (xi + 0.3)));
    const FringeFit f = fit_fringe(x, y, d);
    REQUIRE(f.phase_offset >= 0.0);
    REQUIRE(f.phase_offset < d);
    REQUIRE(f.phase_offset == Approx(0.7).epsilon(1e-9));
}
