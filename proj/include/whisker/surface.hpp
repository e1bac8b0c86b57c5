#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace whisker {

enum class Family { HorizontalMilling, VerticalMilling, Turning };
enum class Waveform { Triangular, Sinusoidal, SawTooth };

char family_letter(Family f);
std::string to_string(Family f);
std::string to_string(Waveform w);

/// Parametric description of one machined roughness class.
///
/// Lengths are in micrometres. `spatial_period_um` is the spacing between
/// successive macro grains (the profile's d_sep). `noise_amplitude` is the
/// peak-to-peak micro-roughness as a fraction of `rz_target_um`; the noise is
/// band-limited to features no shorter than `grain_length_um`.
struct SurfaceSpec {
    Family family = Family::HorizontalMilling;
    int subclass_index = 1;
    double rz_target_um = 10.0;
    double spatial_period_um = 400.0;
    Waveform waveform = Waveform::Triangular;
    double noise_amplitude = 0.05;
    double grain_length_um = 1.0;
    std::uint64_t seed = 0;

    /// Stable class id, e.g. "H1" or "T6".
    std::string id() const;
    void validate() const;
};

/// Discretised height profile Z(x) about its mean line.
struct TextureProfile {
    Eigen::VectorXd heights;
    double resolution_um = 1.0;
    double length_total_um = 0.0;
    SurfaceSpec spec;
    double ra_actual_um = 0.0;
    double rz_actual_um = 0.0;

    /// Linearly interpolated height at position x (clamped to the profile).
    double height_at(double x_um) const;
    /// Finite-difference slope dZ/dx at position x.
    double slope_at(double x_um) const;
};

struct HardnessSpec {
    std::string name;
    int hardness_rank = 1; // 1 = softest
    double rise_time_constant_ms = 120.0;
    double fall_time_constant_ms = 120.0;
    double steady_state_pressure = 1.0;

    /// Stable class id, e.g. "hard3".
    std::string id() const;
};

struct SpecimenCatalog {
    std::vector<SurfaceSpec> roughness;
    std::vector<HardnessSpec> hardness;

    const SurfaceSpec& roughness_class(const std::string& id) const;
    const HardnessSpec& hardness_class(const std::string& id) const;
};

/// Rz values shared by every family, subclass 1 through 6.
inline constexpr double kRzLadderUm[6] = {2.5, 5.0, 10.0, 20.0, 35.0, 50.0};
inline constexpr double kPeriodPerRz = 40.0;
inline constexpr int kRzSegments = 5;

TextureProfile build_roughness_profile(const SurfaceSpec& spec, double length_total_um,
                                       double resolution_um);

/// Mean of |Z| over the sampled length using the trapezoid rule.
template <typename Derived>
double compute_ra(const Eigen::DenseBase<Derived>& heights) {
    const Eigen::Index n = heights.size();
    if (n == 0) throw std::invalid_argument("compute_ra: empty profile");
    if (n == 1) return std::abs(static_cast<double>(heights.derived().coeff(0)));
    const auto mag = heights.derived().template cast<double>().array().abs();
    const double interior = mag.sum() - 0.5 * (mag(0) + mag(n - 1));
    return interior / static_cast<double>(n - 1);
}

/// Mean of per-segment peak-to-valley depth over `n_segments` equal spans.
template <typename Derived>
double compute_rz(const Eigen::DenseBase<Derived>& heights, int n_segments) {
    const Eigen::Index n = heights.size();
    if (n_segments < 1) throw std::invalid_argument("compute_rz: n_segments must be >= 1");
    if (n_segments > n)
        throw std::invalid_argument("compute_rz: n_segments exceeds sample count");
    const auto h = heights.derived().template cast<double>();
    double total = 0.0;
    for (int s = 0; s < n_segments; ++s) {
        const Eigen::Index begin = n * s / n_segments;
        const Eigen::Index end = n * (s + 1) / n_segments;
        const auto seg = h.segment(begin, end - begin);
        total += seg.maxCoeff() - seg.minCoeff();
    }
    return total / n_segments;
}

double compute_ra(const TextureProfile& profile);
double compute_rz(const TextureProfile& profile, int n_segments);

/// 18 roughness classes (H/V/T x 6) followed by 6 hardness materials.
SpecimenCatalog list_specimen_catalog();

/// Two-column CSV: position_um,height_um.
void write_profile_csv(const TextureProfile& profile, const std::string& path);
/// One record per class, roughness first then hardness.
void write_catalog_manifest(const SpecimenCatalog& catalog, const std::string& path);

} // namespace whisker
