#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "whisker/surface.hpp"

namespace whisker {

/// Linear stage motion. Speed in mm/min, length in mm, dab time in ms.
struct StageConfig {
    double speed_mm_min = 50.0;
    double sweep_length_mm = 25.0;
    double dab_duration_ms = 3000.0;

    void validate() const;
};

/// Whisker board, accelerometer and reference laser.
///
/// Rates in Hz. Noise levels are absolute standard deviations in each
/// channel's own units; the defaults sit at roughly 1% (pressure) and 2%
/// (accelerometer) of the AC signal RMS seen on mid-catalog specimens.
struct SensorSuiteConfig {
    double pressure_rate_hz = 157.0;
    double accel_rate_hz = 1000.0;
    double laser_rate_hz = 2500.0;
    double stream_rate_hz = 1000.0;

    double pressure_noise_sd = 0.05;
    double accel_noise_sd = 0.1;
    double laser_noise_sd = 0.03; // um

    double whisker_resonance_hz = 250.0;
    double resonance_q = 10.0;

    // Coulomb follower: the tip sticks until the lateral load reaches
    // stick_slip_threshold, scaled up on rising flanks and down on falling
    // flanks by the local slope over friction_coefficient.
    double stick_slip_threshold = 0.1;
    double friction_coefficient = 0.3;
    double lateral_stiffness = 1.0; // force units per um
    double normal_stiffness = 1.0;  // force units per um
    double preload_um = 100.0;
    // Fraction of the static limit still carried after a slip.
    double kinetic_ratio = 0.5;

    // Accelerometer output is base acceleration divided by this scale.
    double accel_scale_um_s2 = 1.0e5;
    double cross_axis_coupling = 0.35;
    // Quasi-static accelerometer response to the whisker load (tilt of the base).
    double tilt_gain = 0.0;
    // Vertical stage vibration, low-passed white noise with sd proportional to stage speed.
    double stage_vibration_um_per_mm_min = 0.004;
    double stage_vibration_hz = 100.0;
    // Indentation depth per unit of dab pressure.
    double dab_indentation_um = 50.0;

    double simulation_rate_hz = 10000.0;

    void validate() const;
};

/// Acquisition constraint D = V_s / N against a grain separation d_sep.
struct ConstraintReport {
    double distance_per_sample_um = 0.0;
    double min_resolvable_separation_um = 0.0;
    bool satisfied = false;
    double margin_um = 0.0; // d_sep/2 - D; positive when satisfied
};

ConstraintReport check_sampling_constraint(double rate_hz, double speed_mm_min, double d_sep_um);

struct Channel {
    std::string name;
    double rate_hz = 0.0;
    Eigen::VectorXd samples;
};

struct SweepRecording {
    std::vector<Channel> channels; // P, Ax, Ay, Az, L
    std::string label;
    StageConfig stage;
    SensorSuiteConfig suite;
    std::uint64_t seed = 0;
    double duration_s = 0.0;

    const Channel& channel(const std::string& name) const;
};

struct DabRecording {
    std::vector<Channel> channels; // P, Ax, Ay, Az
    std::string label;
    double t_dab_ms = 0.0;
    double rise_time_measured_ms = 0.0;
    double fall_time_measured_ms = 0.0;
    double duration_s = 0.0;
    SensorSuiteConfig suite;
    std::uint64_t seed = 0;

    const Channel& channel(const std::string& name) const;
};

/// Time-aligned multichannel series, one row per sample.
struct FusedStream {
    Eigen::MatrixXd data;
    double rate_hz = 0.0;
    std::vector<std::string> channel_names;
    std::string label;
    std::string source_id;
};

/// Sweep starting `start_um` into the profile; the laser is a separate pass.
SweepRecording simulate_sweep(const TextureProfile& profile, const StageConfig& stage,
                              const SensorSuiteConfig& suite, std::uint64_t seed,
                              double start_um = 0.0);

DabRecording simulate_dab(const HardnessSpec& material, double t_dab_ms,
                          const SensorSuiteConfig& suite, std::uint64_t seed);

/// Zero-order hold of the whisker channels (P, Ax, Ay, Az) onto one grid.
FusedStream fuse_to_stream(const SweepRecording& recording, double stream_rate_hz);
FusedStream fuse_to_stream(const DabRecording& recording, double stream_rate_hz);
/// Laser channel picked onto the stream grid (sample-and-hold decimation).
FusedStream laser_stream(const SweepRecording& recording, double stream_rate_hz);

/// Zero-order hold of one channel; output length floor(duration * rate).
Eigen::VectorXd zero_order_hold(const Channel& channel, double duration_s, double rate_hz);

/// Keeps every factor-th row. factor must be in 1..5.
FusedStream decimate_stream(const FusedStream& stream, int factor);

/// Recursive form of convolution with e^{-a t} sin(w_d t) sampled at `rate_hz`.
Eigen::VectorXd damped_resonance(const Eigen::Ref<const Eigen::VectorXd>& input, double rate_hz,
                                 double resonance_hz, double q);

/// 10-90% rise time of a trace sampled at `rate_hz`, relative to `baseline`
/// and `peak`, with linear interpolation of the threshold crossings.
double rise_time_10_90(const Eigen::Ref<const Eigen::VectorXd>& trace, double rate_hz,
                       double baseline, double peak);

/// CSV with a comment metadata block, one row per stream sample.
void write_stream_csv(const FusedStream& stream, const std::vector<std::string>& metadata,
                      const std::string& path);

} // namespace whisker
