#include "whisker/surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "whisker/csv.hpp"
#include "whisker/seed.hpp"

namespace whisker {

char family_letter(Family f) {
    switch (f) {
    case Family::HorizontalMilling: return 'H';
    case Family::VerticalMilling: return 'V';
    case Family::Turning: return 'T';
    }
    return '?';
}

std::string to_string(Family f) {
    switch (f) {
    case Family::HorizontalMilling: return "horizontal_milling";
    case Family::VerticalMilling: return "vertical_milling";
    case Family::Turning: return "turning";
    }
    return "unknown";
}

std::string to_string(Waveform w) {
    switch (w) {
    case Waveform::Triangular: return "triangular";
    case Waveform::Sinusoidal: return "sinusoidal";
    case Waveform::SawTooth: return "sawtooth";
    }
    return "unknown";
}

std::string SurfaceSpec::id() const {
    return std::string(1, family_letter(family)) + std::to_string(subclass_index);
}

void SurfaceSpec::validate() const {
    if (subclass_index < 1 || subclass_index > 6)
        throw std::invalid_argument("SurfaceSpec: subclass_index must be in 1..6");
    if (!(rz_target_um >= 2.5 && rz_target_um <= 50.0))
        throw std::invalid_argument("SurfaceSpec: rz_target must lie in [2.5, 50] um");
    if (!(spatial_period_um > 0.0))
        throw std::invalid_argument("SurfaceSpec: spatial_period must be positive");
    if (!(noise_amplitude >= 0.0 && noise_amplitude <= 0.2))
        throw std::invalid_argument("SurfaceSpec: noise_amplitude must lie in [0, 0.2]");
    if (!(grain_length_um > 0.0))
        throw std::invalid_argument("SurfaceSpec: grain_length must be positive");
}

std::string HardnessSpec::id() const { return "hard" + std::to_string(hardness_rank); }

const SurfaceSpec& SpecimenCatalog::roughness_class(const std::string& id) const {
    for (const auto& s : roughness)
        if (s.id() == id) return s;
    throw std::invalid_argument("unknown roughness class: " + id);
}

const HardnessSpec& SpecimenCatalog::hardness_class(const std::string& id) const {
    for (const auto& h : hardness)
        if (h.id() == id) return h;
    throw std::invalid_argument("unknown hardness class: " + id);
}

namespace {

// Unit peak-to-valley waveform over one period, u in [0, 1).
double unit_wave(Waveform w, double u) {
    switch (w) {
    case Waveform::Triangular: return std::abs(2.0 * u - 1.0) - 0.5;
    case Waveform::Sinusoidal: return 0.5 * std::sin(2.0 * std::numbers::pi * u);
    case Waveform::SawTooth: return u - 0.5;
    }
    return 0.0;
}

} // namespace

TextureProfile build_roughness_profile(const SurfaceSpec& spec, double length_total_um,
                                       double resolution_um) {
    spec.validate();
    if (!(length_total_um > 0.0) || !(resolution_um > 0.0))
        throw std::invalid_argument("build_roughness_profile: dimensions must be positive");
    if (resolution_um > spec.spatial_period_um / 20.0)
        throw std::invalid_argument("under-resolved profile: resolution exceeds period/20");
    if (length_total_um < 10.0 * spec.spatial_period_um)
        throw std::invalid_argument("build_roughness_profile: length must cover 10 periods");

    const auto n = static_cast<Eigen::Index>(std::floor(length_total_um / resolution_um)) + 1;
    std::mt19937_64 rng(spec.seed);

    // Phase is snapped to the grid so noiseless vertices land on samples.
    const auto period_samples =
        std::max<long long>(1, std::llround(spec.spatial_period_um / resolution_um));
    std::uniform_int_distribution<long long> phase_dist(0, period_samples - 1);
    const double phase = static_cast<double>(phase_dist(rng)) * resolution_um;

    TextureProfile p;
    p.spec = spec;
    p.resolution_um = resolution_um;
    p.length_total_um = static_cast<double>(n - 1) * resolution_um;
    p.heights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) * resolution_um + phase;
        const double u = x / spec.spatial_period_um - std::floor(x / spec.spatial_period_um);
        p.heights(i) = spec.rz_target_um * unit_wave(spec.waveform, u);
    }

    if (spec.noise_amplitude > 0.0) {
        // Uniform knots every grain length, joined by cosine interpolation.
        const auto n_knots =
            static_cast<std::size_t>(std::ceil(p.length_total_um / spec.grain_length_um)) + 2;
        std::uniform_real_distribution<double> knot_dist(-0.5, 0.5);
        std::vector<double> knots(n_knots);
        for (auto& k : knots) k = knot_dist(rng) * spec.noise_amplitude * spec.rz_target_um;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = static_cast<double>(i) * resolution_um / spec.grain_length_um;
            const auto k = static_cast<std::size_t>(s);
            const double t = 0.5 - 0.5 * std::cos(std::numbers::pi * (s - static_cast<double>(k)));
            p.heights(i) += (1.0 - t) * knots[k] + t * knots[k + 1];
        }
    }

    p.heights.array() -= p.heights.mean();
    const int segments = static_cast<int>(std::min<Eigen::Index>(kRzSegments, n));
    const double rz = compute_rz(p.heights, segments);
    if (rz > 0.0) p.heights *= spec.rz_target_um / rz;
    p.rz_actual_um = compute_rz(p.heights, segments);
    p.ra_actual_um = compute_ra(p.heights);
    return p;
}

double TextureProfile::height_at(double x_um) const {
    const Eigen::Index n = heights.size();
    if (n == 0) return 0.0;
    if (n == 1) return heights(0);
    const double s = std::clamp(x_um / resolution_um, 0.0, static_cast<double>(n - 1));
    const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(s), n - 2);
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * heights(i) + t * heights(i + 1);
}

double TextureProfile::slope_at(double x_um) const {
    const Eigen::Index n = heights.size();
    if (n < 2) return 0.0;
    const double s = std::clamp(x_um / resolution_um, 0.0, static_cast<double>(n - 1));
    const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(s), n - 2);
    return (heights(i + 1) - heights(i)) / resolution_um;
}

double compute_ra(const TextureProfile& profile) { return compute_ra(profile.heights); }

double compute_rz(const TextureProfile& profile, int n_segments) {
    return compute_rz(profile.heights, n_segments);
}

SpecimenCatalog list_specimen_catalog() {
    SpecimenCatalog c;
    const std::pair<Family, Waveform> families[] = {
        {Family::HorizontalMilling, Waveform::Triangular},
        {Family::VerticalMilling, Waveform::SawTooth},
        {Family::Turning, Waveform::Sinusoidal},
    };
    for (const auto& [family, wave] : families) {
        for (int sub = 1; sub <= 6; ++sub) {
            SurfaceSpec s;
            s.family = family;
            s.subclass_index = sub;
            s.rz_target_um = kRzLadderUm[sub - 1];
            s.spatial_period_um = kPeriodPerRz * s.rz_target_um;
            s.waveform = wave;
            s.seed = derive_seed(0x52554245ULL, {static_cast<std::uint64_t>(family),
                                                 static_cast<std::uint64_t>(sub)});
            c.roughness.push_back(s);
        }
    }

    const char* materials[] = {"soft foam",   "mouse pad",       "cotton cloth",
                               "double-sided foam tape", "cellophane tape",
                               "painted aluminum sheet"};
    for (int rank = 1; rank <= 6; ++rank) {
        HardnessSpec h;
        h.name = materials[rank - 1];
        h.hardness_rank = rank;
        h.rise_time_constant_ms = 120.0 / std::pow(2.0, rank - 1);
        h.fall_time_constant_ms = h.rise_time_constant_ms;
        // Stiffer materials push back harder for the same indentation.
        h.steady_state_pressure = 0.4 + 0.12 * rank;
        c.hardness.push_back(h);
    }
    return c;
}

void write_profile_csv(const TextureProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "position_um,height_um\n";
    for (Eigen::Index i = 0; i < profile.heights.size(); ++i)
        out << format_double(static_cast<double>(i) * profile.resolution_um) << ','
            << format_double(profile.heights(i)) << '\n';
}

void write_catalog_manifest(const SpecimenCatalog& catalog, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# roughness: id,family,subclass,rz_um,period_um\n";
    for (const auto& s : catalog.roughness)
        out << "roughness," << s.id() << ',' << family_letter(s.family) << ','
            << s.subclass_index << ',' << format_double(s.rz_target_um) << ','
            << format_double(s.spatial_period_um) << '\n';
    out << "# hardness: id,material,rank,tau_ms\n";
    for (const auto& h : catalog.hardness)
        out << "hardness," << h.id() << ',' << h.name << ',' << h.hardness_rank << ','
            << format_double(h.rise_time_constant_ms) << '\n';
}

} // namespace whisker
