#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "whisker/sensor.hpp"
#include "whisker/surface.hpp"

using namespace whisker;

namespace {

SensorSuiteConfig quiet_suite() {
    SensorSuiteConfig s;
    s.pressure_noise_sd = 0.0;
    s.accel_noise_sd = 0.0;
    s.laser_noise_sd = 0.0;
    s.stage_vibration_um_per_mm_min = 0.0;
    return s;
}

TextureProfile flat_profile(double length_um) {
    TextureProfile p;
    p.resolution_um = 1.0;
    p.heights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(length_um) + 1);
    p.length_total_um = length_um;
    return p;
}

TextureProfile sine_profile(double period_um, double length_um) {
    SurfaceSpec s;
    s.waveform = Waveform::Sinusoidal;
    s.rz_target_um = period_um / 40.0;
    s.spatial_period_um = period_um;
    s.noise_amplitude = 0.0;
    return build_roughness_profile(s, length_um, 1.0);
}

// Frequency of the largest non-DC bin of a plain O(n^2) DFT.
double dominant_frequency(const Eigen::VectorXd& x, double rate_hz) {
    const Eigen::Index n = x.size();
    const double mean = x.mean();
    double best = 0.0, best_f = 0.0;
    for (Eigen::Index k = 1; k < n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index t = 0; t < n; ++t)
            acc += (x(t) - mean) * std::polar(1.0, -2.0 * std::numbers::pi * k * t / n);
        if (std::abs(acc) > best) {
            best = std::abs(acc);
            best_f = static_cast<double>(k) * rate_hz / static_cast<double>(n);
        }
    }
    return best_f;
}

double variance(const Eigen::VectorXd& v) {
    return (v.array() - v.mean()).square().mean();
}

} // namespace

TEST_CASE("distance per sample for the default sensors") {
    struct Row { double rate, speed, d; };
    // 50 mm/min is 833.33 um/s.
    const Row rows[] = {{157, 50, 5.31}, {157, 100, 10.62}, {1000, 50, 0.83}, {1000, 100, 1.67},
                        {2500, 50, 0.33}, {2500, 100, 0.67}, {500, 50, 1.67}};
    for (const auto& r : rows) {
        CAPTURE(r.rate);
        CAPTURE(r.speed);
        const auto rep = check_sampling_constraint(r.rate, r.speed, 100.0);
        CHECK(std::round(rep.distance_per_sample_um * 100.0) / 100.0 == doctest::Approx(r.d));
        CHECK(rep.min_resolvable_separation_um == doctest::Approx(2.0 * rep.distance_per_sample_um));
    }
}

TEST_CASE("constraint verdict and margin") {
    const auto ok = check_sampling_constraint(1000.0, 50.0, 100.0);
    CHECK(ok.satisfied);
    CHECK(ok.margin_um == doctest::Approx(50.0 - 50000.0 / 60.0 / 1000.0));
    const auto bad = check_sampling_constraint(157.0, 100.0, 20.0);
    CHECK_FALSE(bad.satisfied);
    CHECK(bad.margin_um < 0.0);
    // Exactly D = d_sep/2 is not resolvable.
    const auto edge = check_sampling_constraint(1000.0, 60.0, 2.0);
    CHECK_FALSE(edge.satisfied);
    CHECK_THROWS_AS(check_sampling_constraint(0.0, 50.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(check_sampling_constraint(100.0, -1.0, 10.0), std::invalid_argument);
}

TEST_CASE("resonator recursion equals direct convolution with its kernel") {
    const double fs = 10000.0, f0 = 250.0, q = 10.0;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    Eigen::VectorXd x(600);
    for (auto& v : x) v = g(rng);
    const Eigen::VectorXd y = damped_resonance(x, fs, f0, q);

    const double w0 = 2.0 * std::numbers::pi * f0;
    const double a = w0 / (2.0 * q);
    const double wd = std::sqrt(w0 * w0 - a * a);
    auto h = [&](Eigen::Index m) { return std::exp(-a * m / fs) * std::sin(wd * m / fs); };
    double worst = 0.0;
    for (Eigen::Index n = 0; n < x.size(); ++n) {
        double direct = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) direct += x(k) * h(n - k);
        worst = std::max(worst, std::abs(direct - y(n)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("spectra peak at the grain frequency without stick-slip") {
    auto suite = quiet_suite();
    suite.stick_slip_threshold = 0.0;
    for (double period : {400.0, 800.0}) {
        for (double speed : {50.0, 100.0}) {
            CAPTURE(period);
            CAPTURE(speed);
            const auto profile = sine_profile(period, 8000.0);
            StageConfig stage{speed, 6.0, 3000.0};
            const auto rec = simulate_sweep(profile, stage, suite, 1);
            const double expected = speed * 1000.0 / 60.0 / period;
            const auto& p = rec.channel("P");
            const double bin = p.rate_hz / static_cast<double>(p.samples.size());
            CHECK(std::abs(dominant_frequency(p.samples, p.rate_hz) - expected) <= bin);
            const auto& az = rec.channel("Az");
            CHECK(std::abs(dominant_frequency(az.samples, az.rate_hz) - expected) <=
                  az.rate_hz / static_cast<double>(az.samples.size()));
            const auto& l = rec.channel("L");
            CHECK(std::abs(dominant_frequency(l.samples, l.rate_hz) - expected) <=
                  l.rate_hz / static_cast<double>(l.samples.size()));
        }
    }
}

TEST_CASE("flat surface without stick-slip or noise gives constant channels") {
    auto suite = quiet_suite();
    suite.stick_slip_threshold = 0.0;
    const auto rec = simulate_sweep(flat_profile(3000.0), StageConfig{50.0, 2.0, 3000.0}, suite, 4);
    for (const auto& c : rec.channels) {
        CAPTURE(c.name);
        CHECK(variance(c.samples) < 1e-20);
    }
}

TEST_CASE("sample counts follow duration times rate") {
    const auto suite = quiet_suite();
    const auto profile = sine_profile(400.0, 8000.0);
    const StageConfig stage{100.0, 5.0, 3000.0};
    const auto rec = simulate_sweep(profile, stage, suite, 2);
    CHECK(rec.duration_s == doctest::Approx(3.0));
    CHECK(rec.channel("P").samples.size() == 471);
    CHECK(rec.channel("Ax").samples.size() == 3000);
    CHECK(rec.channel("L").samples.size() == 7500);
    const auto fused = fuse_to_stream(rec, 1000.0);
    CHECK(fused.data.rows() == 3000);
    CHECK(fused.data.cols() == 4);
    CHECK(laser_stream(rec, 1000.0).data.rows() == 3000);
    CHECK_THROWS_AS(rec.channel("Q"), std::invalid_argument);
}

TEST_CASE("zero-order hold repeats each source sample") {
    Channel c{"P", 100.0, Eigen::VectorXd::LinSpaced(50, 0.0, 49.0)};
    const auto held = zero_order_hold(c, 0.5, 1000.0);
    REQUIRE(held.size() == 500);
    for (Eigen::Index i = 0; i < held.size(); ++i) CHECK(held(i) == static_cast<double>(i / 10));
    // Output slower than input picks every n-th sample.
    const auto picked = zero_order_hold(c, 0.5, 20.0);
    REQUIRE(picked.size() == 10);
    for (Eigen::Index i = 0; i < picked.size(); ++i) CHECK(picked(i) == 5.0 * i);
    // Non-integer ratio: every output row holds the latest input at or before its time.
    Channel p{"P", 157.0, Eigen::VectorXd::LinSpaced(157, 0.0, 156.0)};
    const auto h = zero_order_hold(p, 1.0, 1000.0);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        const double t = i / 1000.0;
        CHECK(h(i) / 157.0 <= t + 1e-12);
        CHECK((h(i) + 1.0) / 157.0 > t);
    }
}

TEST_CASE("decimation keeps every factor-th row") {
    FusedStream s;
    s.rate_hz = 1000.0;
    s.data = Eigen::MatrixXd::Zero(103, 2);
    s.data.col(0) = Eigen::VectorXd::LinSpaced(103, 0.0, 102.0);
    for (int f = 1; f <= 5; ++f) {
        CAPTURE(f);
        const auto d = decimate_stream(s, f);
        CHECK(d.data.rows() == (103 + f - 1) / f);
        CHECK(d.rate_hz == doctest::Approx(1000.0 / f));
        for (Eigen::Index r = 0; r < d.data.rows(); ++r) CHECK(d.data(r, 0) == r * f);
    }
    CHECK_THROWS_AS(decimate_stream(s, 0), std::invalid_argument);
    CHECK_THROWS_AS(decimate_stream(s, 6), std::invalid_argument);
}

TEST_CASE("dab rise time is ln 9 time constants") {
    const auto catalog = list_specimen_catalog();
    const auto suite = quiet_suite();
    for (const auto& m : catalog.hardness) {
        CAPTURE(m.id());
        const auto rec = simulate_dab(m, 3000.0, suite, 5);
        const double expected = std::log(9.0) * m.rise_time_constant_ms;
        CHECK(rec.rise_time_measured_ms == doctest::Approx(expected).epsilon(0.02));
        CHECK(rec.fall_time_measured_ms == doctest::Approx(std::log(9.0) * m.fall_time_constant_ms)
                                               .epsilon(0.02));
        // The pressure trace settles at the material's steady state before release.
        const auto& p = rec.channel("P").samples;
        const Eigen::Index before = static_cast<Eigen::Index>(2.99 * 157.0);
        CHECK(p(before) == doctest::Approx(m.steady_state_pressure).epsilon(0.01));
    }
}

TEST_CASE("zero-noise rise time falls strictly with hardness") {
    const auto catalog = list_specimen_catalog();
    double previous = 1e9;
    for (int rank = 1; rank <= 6; ++rank) {
        for (const auto& m : catalog.hardness) {
            if (m.hardness_rank != rank) continue;
            const double t = simulate_dab(m, 3000.0, quiet_suite(), 1).rise_time_measured_ms;
            CHECK(t < previous);
            previous = t;
        }
    }
}

TEST_CASE("laser reconstructs the profile within its noise") {
    auto suite = quiet_suite();
    suite.laser_noise_sd = 0.03;
    const auto profile = sine_profile(400.0, 8000.0);
    const double start = 250.0;
    const StageConfig stage{50.0, 6.0, 3000.0};
    const auto rec = simulate_sweep(profile, stage, suite, 6, start);
    const auto& l = rec.channel("L");
    const double v = 50.0 * 1000.0 / 60.0;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < l.samples.size(); ++j)
        worst = std::max(worst, std::abs(l.samples(j) - profile.height_at(start + v * j / l.rate_hz)));
    CHECK(worst <= 5.0 * suite.laser_noise_sd);
    CHECK(worst > 0.0);
}

TEST_CASE("rise_time_10_90 on analytic traces") {
    const double fs = 1000.0;
    Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(1001, 0.0, 1.0);
    CHECK(rise_time_10_90(ramp, fs, 0.0, 1.0) == doctest::Approx(0.8).epsilon(1e-9));
    Eigen::VectorXd expo(5000);
    for (Eigen::Index i = 0; i < expo.size(); ++i) expo(i) = 1.0 - std::exp(-i / fs / 0.1);
    CHECK(rise_time_10_90(expo, fs, 0.0, 1.0) == doctest::Approx(0.1 * std::log(9.0)).epsilon(1e-3));
    CHECK(rise_time_10_90(expo, fs, 1.0, 1.0) == 0.0);
}

TEST_CASE("dab rejects a contact shorter than five time constants") {
    const auto soft = list_specimen_catalog().hardness_class("hard1");
    CHECK_THROWS_WITH_AS(simulate_dab(soft, 5.0 * soft.rise_time_constant_ms - 1.0, quiet_suite(), 1),
                         doctest::Contains("steady state unreachable"), std::invalid_argument);
    CHECK_NOTHROW(simulate_dab(soft, 5.0 * soft.rise_time_constant_ms, quiet_suite(), 1));
}

TEST_CASE("recordings are deterministic per seed") {
    SensorSuiteConfig suite;
    suite.stage_vibration_um_per_mm_min = 0.004;
    const auto profile = sine_profile(400.0, 6000.0);
    const StageConfig stage{50.0, 4.0, 3000.0};
    const auto a = simulate_sweep(profile, stage, suite, 77);
    const auto b = simulate_sweep(profile, stage, suite, 77);
    const auto c = simulate_sweep(profile, stage, suite, 78);
    for (std::size_t i = 0; i < a.channels.size(); ++i) {
        CHECK(a.channels[i].samples == b.channels[i].samples);
        CHECK(a.channels[i].samples != c.channels[i].samples);
    }
    const auto hard = list_specimen_catalog().hardness_class("hard4");
    CHECK(simulate_dab(hard, 3000.0, suite, 3).channel("Az").samples ==
          simulate_dab(hard, 3000.0, suite, 3).channel("Az").samples);
}

TEST_CASE("noise sd matches the configured level") {
    auto suite = quiet_suite();
    suite.stick_slip_threshold = 0.0;
    suite.pressure_noise_sd = 0.05;
    suite.accel_noise_sd = 0.1;
    const auto rec = simulate_sweep(flat_profile(12000.0), StageConfig{100.0, 10.0, 3000.0}, suite, 8);
    CHECK(std::sqrt(variance(rec.channel("P").samples)) == doctest::Approx(0.05).epsilon(0.1));
    CHECK(std::sqrt(variance(rec.channel("Az").samples)) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("sweep and suite validation") {
    const auto profile = sine_profile(400.0, 4000.0);
    CHECK_THROWS_AS(simulate_sweep(profile, StageConfig{50.0, 5.0, 3000.0}, quiet_suite(), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_sweep(profile, StageConfig{0.0, 1.0, 3000.0}, quiet_suite(), 1),
                    std::invalid_argument);
    auto bad = quiet_suite();
    bad.resonance_q = 0.4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = quiet_suite();
    bad.pressure_noise_sd = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = quiet_suite();
    bad.stream_rate_hz = 100.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
