#include "whisker/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "whisker/csv.hpp"
#include "whisker/seed.hpp"

namespace whisker {

namespace {

constexpr double kEps = 1e-9;

double um_per_s(double speed_mm_min) { return speed_mm_min * 1000.0 / 60.0; }

Eigen::Index sample_count(double duration_s, double rate_hz) {
    return static_cast<Eigen::Index>(std::floor(duration_s * rate_hz + kEps));
}

// Point-samples a simulation-rate trace at `rate_hz`.
Eigen::VectorXd sample_at(const Eigen::VectorXd& trace, double sim_rate_hz, double rate_hz,
                          double duration_s) {
    const Eigen::Index n = sample_count(duration_s, rate_hz);
    Eigen::VectorXd out(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        auto idx = static_cast<Eigen::Index>(
            std::floor(static_cast<double>(j) * sim_rate_hz / rate_hz + kEps));
        out(j) = trace(std::min(idx, trace.size() - 1));
    }
    return out;
}

void add_noise(Eigen::VectorXd& v, double sd, std::uint64_t seed) {
    if (sd <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    for (auto& x : v) x += noise(rng);
}

Eigen::VectorXd second_difference(const Eigen::VectorXd& x, double rate_hz) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(x.size());
    const double s = rate_hz * rate_hz;
    for (Eigen::Index i = 1; i + 1 < x.size(); ++i) d(i) = (x(i + 1) - 2.0 * x(i) + x(i - 1)) * s;
    return d;
}

// Single-pole low-pass, started at the first sample.
Eigen::VectorXd low_pass(const Eigen::VectorXd& x, double cutoff_hz, double rate_hz) {
    const double a = 1.0 - std::exp(-2.0 * std::numbers::pi * cutoff_hz / rate_hz);
    Eigen::VectorXd out(x.size());
    double y = x.size() > 0 ? x(0) : 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        y += a * (x(i) - y);
        out(i) = y;
    }
    return out;
}

// Resonator with unity gain well below resonance, expressed in sensor units.
Eigen::VectorXd accel_pathway(const Eigen::VectorXd& displacement_um,
                              const SensorSuiteConfig& suite) {
    const double dt = 1.0 / suite.simulation_rate_hz;
    const double w0 = 2.0 * std::numbers::pi * suite.whisker_resonance_hz;
    const double wd = w0 * std::sqrt(1.0 - 1.0 / (4.0 * suite.resonance_q * suite.resonance_q));
    const double gain = w0 * w0 * dt / wd / suite.accel_scale_um_s2;
    return gain * damped_resonance(second_difference(displacement_um, suite.simulation_rate_hz),
                                   suite.simulation_rate_hz, suite.whisker_resonance_hz,
                                   suite.resonance_q);
}

// Vertical stage vibration: white noise through a single pole, scaled to sd_um.
Eigen::VectorXd stage_vibration(Eigen::Index n, double sd_um, const SensorSuiteConfig& suite,
                                std::uint64_t seed) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    if (sd_um <= 0.0 || n == 0) return v;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> white(0.0, 1.0);
    for (auto& x : v) x = white(rng);
    v = low_pass(v, suite.stage_vibration_hz, suite.simulation_rate_hz);
    const double rms = std::sqrt(v.squaredNorm() / static_cast<double>(n));
    if (rms > 0.0) v *= sd_um / rms;
    return v;
}

const Channel& find_channel(const std::vector<Channel>& channels, const std::string& name) {
    for (const auto& c : channels)
        if (c.name == name) return c;
    throw std::invalid_argument("no channel named " + name);
}

FusedStream fuse_whisker(const std::vector<Channel>& channels, double duration_s,
                         double stream_rate_hz, const std::string& label, std::uint64_t seed) {
    if (!(stream_rate_hz > 0.0)) throw std::invalid_argument("stream rate must be positive");
    FusedStream s;
    s.rate_hz = stream_rate_hz;
    s.label = label;
    s.source_id = label + "#" + std::to_string(seed);
    const char* names[] = {"P", "Ax", "Ay", "Az"};
    const Eigen::Index n = sample_count(duration_s, stream_rate_hz);
    s.data.resize(n, 4);
    for (int c = 0; c < 4; ++c) {
        s.data.col(c) = zero_order_hold(find_channel(channels, names[c]), duration_s,
                                        stream_rate_hz);
        s.channel_names.emplace_back(names[c]);
    }
    return s;
}

} // namespace

void StageConfig::validate() const {
    if (!(speed_mm_min > 0.0)) throw std::invalid_argument("stage speed must be positive");
    if (!(sweep_length_mm > 0.0)) throw std::invalid_argument("sweep length must be positive");
    if (!(dab_duration_ms > 0.0)) throw std::invalid_argument("dab duration must be positive");
}

void SensorSuiteConfig::validate() const {
    if (!(pressure_rate_hz > 0.0 && accel_rate_hz > 0.0 && laser_rate_hz > 0.0 &&
          stream_rate_hz > 0.0 && simulation_rate_hz > 0.0))
        throw std::invalid_argument("sensor rates must be positive");
    if (stream_rate_hz < pressure_rate_hz)
        throw std::invalid_argument("stream rate must be at least the pressure rate");
    if (!(whisker_resonance_hz > 0.0 && resonance_q > 0.5))
        throw std::invalid_argument("resonance must be positive with Q > 0.5");
    if (stick_slip_threshold < 0.0 || !(friction_coefficient > 0.0) ||
        !(lateral_stiffness > 0.0) || !(accel_scale_um_s2 > 0.0))
        throw std::invalid_argument("invalid contact parameters");
    if (!(kinetic_ratio >= 0.0 && kinetic_ratio < 1.0) || tilt_gain < 0.0 || !(preload_um > 0.0))
        throw std::invalid_argument("invalid contact parameters");
    if (stage_vibration_um_per_mm_min < 0.0 || !(stage_vibration_hz > 0.0))
        throw std::invalid_argument("invalid stage vibration");
    if (pressure_noise_sd < 0.0 || accel_noise_sd < 0.0 || laser_noise_sd < 0.0)
        throw std::invalid_argument("noise levels must be non-negative");
}

ConstraintReport check_sampling_constraint(double rate_hz, double speed_mm_min, double d_sep_um) {
    if (!(rate_hz > 0.0) || !(speed_mm_min > 0.0) || !(d_sep_um > 0.0))
        throw std::invalid_argument("check_sampling_constraint: inputs must be positive");
    ConstraintReport r;
    r.distance_per_sample_um = um_per_s(speed_mm_min) / rate_hz;
    r.min_resolvable_separation_um = 2.0 * r.distance_per_sample_um;
    r.satisfied = r.distance_per_sample_um < 0.5 * d_sep_um;
    r.margin_um = 0.5 * d_sep_um - r.distance_per_sample_um;
    return r;
}

const Channel& SweepRecording::channel(const std::string& name) const {
    return find_channel(channels, name);
}

const Channel& DabRecording::channel(const std::string& name) const {
    return find_channel(channels, name);
}

Eigen::VectorXd damped_resonance(const Eigen::Ref<const Eigen::VectorXd>& input, double rate_hz,
                                 double resonance_hz, double q) {
    const double dt = 1.0 / rate_hz;
    const double w0 = 2.0 * std::numbers::pi * resonance_hz;
    const double alpha = w0 / (2.0 * q);
    const double wd = w0 * std::sqrt(1.0 - 1.0 / (4.0 * q * q));
    const double r = std::exp(-alpha * dt);
    const double c1 = 2.0 * r * std::cos(wd * dt);
    const double c2 = r * r;
    const double g = r * std::sin(wd * dt);

    Eigen::VectorXd y = Eigen::VectorXd::Zero(input.size());
    for (Eigen::Index n = 1; n < input.size(); ++n) {
        y(n) = c1 * y(n - 1) + g * input(n - 1);
        if (n >= 2) y(n) -= c2 * y(n - 2);
    }
    return y;
}

double rise_time_10_90(const Eigen::Ref<const Eigen::VectorXd>& trace, double rate_hz,
                       double baseline, double peak) {
    const double span = peak - baseline;
    if (!(span > 0.0)) return 0.0;
    auto crossing = [&](double level) {
        const double thr = baseline + level * span;
        for (Eigen::Index i = 0; i < trace.size(); ++i) {
            if (trace(i) >= thr) {
                if (i == 0) return 0.0;
                const double frac = (thr - trace(i - 1)) / (trace(i) - trace(i - 1));
                return (static_cast<double>(i - 1) + frac) / rate_hz;
            }
        }
        return static_cast<double>(trace.size()) / rate_hz;
    };
    return crossing(0.9) - crossing(0.1);
}

SweepRecording simulate_sweep(const TextureProfile& profile, const StageConfig& stage,
                              const SensorSuiteConfig& suite, std::uint64_t seed,
                              double start_um) {
    stage.validate();
    suite.validate();
    const double length_um = stage.sweep_length_mm * 1000.0;
    if (start_um < 0.0 || start_um + length_um > profile.length_total_um + kEps)
        throw std::invalid_argument("simulate_sweep: sweep is longer than the profile");

    const double v = um_per_s(stage.speed_mm_min);
    const double duration = length_um / v;
    const double fs = suite.simulation_rate_hz;
    const double dt = 1.0 / fs;
    const Eigen::Index n = sample_count(duration, fs);

    Eigen::VectorXd lateral(n), normal(n), drag(n), moment(n);
    const double n0 = suite.normal_stiffness * suite.preload_um;
    // Specimens are machined down from a common stock plane that the stage is
    // zeroed on, so contact depth is measured from the highest peak.
    const double stock = profile.heights.size() > 0 ? profile.heights.maxCoeff() : 0.0;
    const double mu = suite.friction_coefficient;
    const double vib_sd = suite.stage_vibration_um_per_mm_min * stage.speed_mm_min;
    const Eigen::VectorXd lift = stage_vibration(n, vib_sd, suite, derive_seed(seed, {tag_of("stage")}));
    double x_tip = start_um;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x_base = start_um + v * static_cast<double>(i) * dt;
        const double z = profile.height_at(x_tip);
        const double load =
            std::max(0.0, suite.normal_stiffness * (suite.preload_um + z - stock + lift(i)));
        if (suite.stick_slip_threshold <= 0.0) {
            x_tip = x_base;
        } else {
            // Static friction scales with normal load; asperity flanks raise it
            // when climbing and lower it when descending.
            const double s = profile.slope_at(x_tip);
            const double ratchet =
                std::clamp((1.0 + s / mu) / std::max(1e-3, 1.0 - mu * s), 0.05, 50.0);
            const double limit = suite.stick_slip_threshold * (load / n0) * ratchet;
            // Slip within one step, keeping the kinetic share of the load.
            if (suite.lateral_stiffness * (x_base - x_tip) >= limit)
                x_tip = x_base - suite.kinetic_ratio * limit / suite.lateral_stiffness;
        }
        const double delta = x_base - x_tip;
        lateral(i) = delta;
        normal(i) = profile.height_at(x_tip) - stock + lift(i);
        drag(i) = suite.lateral_stiffness * delta;
        moment(i) = suite.normal_stiffness * (suite.preload_um + normal(i)) + drag(i);
    }

    // Both whisker-board sensors low-pass at a quarter of their output rate.
    const Eigen::VectorXd filtered = low_pass(moment, suite.pressure_rate_hz / 4.0, fs);

    // The base plate tilts under the whisker load, so each axis also carries a
    // quasi-static share of the matching force component.
    const double fa = suite.accel_rate_hz / 4.0;
    const Eigen::VectorXd ax_sim =
        low_pass(accel_pathway(lateral, suite) + suite.tilt_gain * drag, fa, fs);
    // The accelerometer rides on the stage, so it also reads the lift directly.
    const Eigen::VectorXd az_sim =
        low_pass(accel_pathway(normal - lift, suite) +
                     suite.tilt_gain * suite.normal_stiffness * normal +
                     second_difference(lift, fs) / suite.accel_scale_um_s2,
                 fa, fs);
    const Eigen::VectorXd ay_sim = suite.cross_axis_coupling * (ax_sim + az_sim);

    SweepRecording rec;
    rec.label = profile.spec.id();
    rec.stage = stage;
    rec.suite = suite;
    rec.seed = seed;
    rec.duration_s = duration;

    auto make = [&](const char* name, const Eigen::VectorXd& trace, double rate, double sd) {
        Channel c{name, rate, sample_at(trace, fs, rate, duration)};
        add_noise(c.samples, sd, derive_seed(seed, {tag_of(name)}));
        rec.channels.push_back(std::move(c));
    };
    make("P", filtered, suite.pressure_rate_hz, suite.pressure_noise_sd);
    make("Ax", ax_sim, suite.accel_rate_hz, suite.accel_noise_sd);
    make("Ay", ay_sim, suite.accel_rate_hz, suite.accel_noise_sd);
    make("Az", az_sim, suite.accel_rate_hz, suite.accel_noise_sd);

    // Laser: separate pass over the same lane at the laser's own rate.
    Channel laser{"L", suite.laser_rate_hz, {}};
    const Eigen::Index nl = sample_count(duration, suite.laser_rate_hz);
    laser.samples.resize(nl);
    for (Eigen::Index j = 0; j < nl; ++j)
        laser.samples(j) = profile.height_at(start_um + v * static_cast<double>(j) /
                                                            suite.laser_rate_hz);
    const Eigen::VectorXd laser_lift =
        stage_vibration(n, vib_sd, suite, derive_seed(seed, {tag_of("laser stage")}));
    laser.samples += sample_at(laser_lift, fs, suite.laser_rate_hz, duration);
    add_noise(laser.samples, suite.laser_noise_sd, derive_seed(seed, {tag_of("L")}));
    rec.channels.push_back(std::move(laser));
    return rec;
}

DabRecording simulate_dab(const HardnessSpec& material, double t_dab_ms,
                          const SensorSuiteConfig& suite, std::uint64_t seed) {
    suite.validate();
    const double tau_r = material.rise_time_constant_ms / 1000.0;
    const double tau_f = material.fall_time_constant_ms / 1000.0;
    if (tau_r < 0.0 || tau_f < 0.0)
        throw std::invalid_argument("simulate_dab: time constants must be non-negative");
    if (!(t_dab_ms > 0.0) || t_dab_ms < 5.0 * material.rise_time_constant_ms)
        throw std::invalid_argument("steady state unreachable: t_dab < 5 * rise time constant");

    const double t_dab = t_dab_ms / 1000.0;
    const double duration = t_dab + 5.0 * tau_f;
    const double fs = suite.simulation_rate_hz;
    const Eigen::Index n = sample_count(duration, fs);
    const Eigen::Index n_contact = std::min(n, sample_count(t_dab, fs));

    auto rise = [&](double t) {
        return tau_r > 0.0 ? material.steady_state_pressure * (1.0 - std::exp(-t / tau_r))
                           : material.steady_state_pressure;
    };
    const double p_release = rise(t_dab);
    Eigen::VectorXd pressure(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        if (i < n_contact) {
            pressure(i) = rise(t);
        } else {
            const double tr = t - t_dab;
            pressure(i) = tau_f > 0.0 ? p_release * std::exp(-tr / tau_f) : 0.0;
        }
    }

    DabRecording rec;
    rec.label = material.id();
    rec.t_dab_ms = t_dab_ms;
    rec.duration_s = duration;
    rec.suite = suite;
    rec.seed = seed;
    rec.rise_time_measured_ms =
        1000.0 * rise_time_10_90(pressure.head(n_contact), fs, 0.0, p_release);
    const Eigen::VectorXd release = p_release - pressure.tail(n - n_contact).array();
    rec.fall_time_measured_ms = 1000.0 * rise_time_10_90(release, fs, 0.0, p_release);

    // Indentation depth in um drives the base vibration pathway.
    const Eigen::VectorXd indentation = pressure * suite.dab_indentation_um;
    const Eigen::VectorXd az_sim =
        low_pass(accel_pathway(indentation, suite), suite.accel_rate_hz / 4.0, fs);

    auto make = [&](const char* name, const Eigen::VectorXd& trace, double rate, double sd) {
        Channel c{name, rate, sample_at(trace, fs, rate, duration)};
        add_noise(c.samples, sd, derive_seed(seed, {tag_of(name)}));
        rec.channels.push_back(std::move(c));
    };
    make("P", pressure, suite.pressure_rate_hz, suite.pressure_noise_sd);
    make("Ax", suite.cross_axis_coupling * az_sim, suite.accel_rate_hz, suite.accel_noise_sd);
    make("Ay", suite.cross_axis_coupling * az_sim, suite.accel_rate_hz, suite.accel_noise_sd);
    make("Az", az_sim, suite.accel_rate_hz, suite.accel_noise_sd);
    return rec;
}

Eigen::VectorXd zero_order_hold(const Channel& channel, double duration_s, double rate_hz) {
    const Eigen::Index n = sample_count(duration_s, rate_hz);
    Eigen::VectorXd out(n);
    const Eigen::Index last = channel.samples.size() - 1;
    if (last < 0) return Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(
            std::floor(static_cast<double>(i) * channel.rate_hz / rate_hz + kEps));
        out(i) = channel.samples(std::min(idx, last));
    }
    return out;
}

FusedStream fuse_to_stream(const SweepRecording& recording, double stream_rate_hz) {
    return fuse_whisker(recording.channels, recording.duration_s, stream_rate_hz,
                        recording.label, recording.seed);
}

FusedStream fuse_to_stream(const DabRecording& recording, double stream_rate_hz) {
    return fuse_whisker(recording.channels, recording.duration_s, stream_rate_hz,
                        recording.label, recording.seed);
}

FusedStream laser_stream(const SweepRecording& recording, double stream_rate_hz) {
    FusedStream s;
    s.rate_hz = stream_rate_hz;
    s.label = recording.label;
    s.source_id = recording.label + "#" + std::to_string(recording.seed) + "/L";
    s.channel_names = {"L"};
    s.data = zero_order_hold(recording.channel("L"), recording.duration_s, stream_rate_hz);
    return s;
}

FusedStream decimate_stream(const FusedStream& stream, int factor) {
    if (factor < 1 || factor > 5)
        throw std::invalid_argument("decimate_stream: factor must be in 1..5");
    FusedStream out = stream;
    out.rate_hz = stream.rate_hz / factor;
    const Eigen::Index rows = (stream.data.rows() + factor - 1) / factor;
    out.data.resize(rows, stream.data.cols());
    for (Eigen::Index r = 0; r < rows; ++r) out.data.row(r) = stream.data.row(r * factor);
    return out;
}

void write_stream_csv(const FusedStream& stream, const std::vector<std::string>& metadata,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (const auto& m : metadata) out << "# " << m << '\n';
    out << "t_s";
    for (const auto& name : stream.channel_names) out << ',' << name;
    out << '\n';
    for (Eigen::Index r = 0; r < stream.data.rows(); ++r) {
        out << format_double(static_cast<double>(r) / stream.rate_hz);
        for (Eigen::Index c = 0; c < stream.data.cols(); ++c)
            out << ',' << format_double(stream.data(r, c));
        out << '\n';
    }
}

} // namespace whisker
