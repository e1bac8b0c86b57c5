#include "whisker/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "whisker/csv.hpp"

namespace whisker {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> items(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find(',', start);
        const auto item = trim(text.substr(start, end == std::string::npos ? end : end - start));
        if (!item.empty()) out.push_back(item);
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("expected boolean, got '" + s + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& s, F parse) {
    std::vector<T> out;
    for (const auto& item : items(s)) out.push_back(parse(item));
    return out;
}

using Setter = std::function<void(const std::string&)>;
using Getter = std::function<std::string()>;

struct Field {
    Setter set;
    Getter get;
};

template <class T>
std::string list_text(const std::vector<T>& v, std::string (*f)(T)) {
    std::vector<std::string> s;
    for (const auto& x : v) s.push_back(f(x));
    return join(s, ',');
}

std::string int_text(int v) { return std::to_string(v); }
std::string double_text(double v) { return format_double(v); }
std::string selector_text(Selector s) { return to_string(s); }
std::string model_text(ModelKind m) { return to_string(m); }

Field of(double& v) {
    return {[&v](const std::string& s) { v = parse_double(s); }, [&v] { return format_double(v); }};
}
Field of(int& v) {
    return {[&v](const std::string& s) { v = static_cast<int>(parse_int(s)); },
            [&v] { return std::to_string(v); }};
}
Field of(bool& v) {
    return {[&v](const std::string& s) { v = parse_bool(s); },
            [&v] { return std::string(v ? "true" : "false"); }};
}
Field of(std::uint64_t& v) {
    return {[&v](const std::string& s) { v = std::stoull(s); }, [&v] { return std::to_string(v); }};
}

std::map<std::string, std::map<std::string, Field>> schema(StudyConfig& c) {
    auto& g = c.grid;
    auto& o = c.options;
    auto& s = o.suite;
    std::map<std::string, std::map<std::string, Field>> m;
    m["grid"] = {
        {"windows",
         {[&g](const std::string& t) { g.window_sizes = parse_list<int>(t, [](const std::string& x) { return static_cast<int>(parse_int(x)); }); },
          [&g] { return list_text(g.window_sizes, int_text); }}},
        {"speeds",
         {[&g](const std::string& t) { g.speeds_mm_min = parse_list<double>(t, parse_double); },
          [&g] { return list_text(g.speeds_mm_min, double_text); }}},
        {"selectors",
         {[&g](const std::string& t) { g.selectors = parse_list<Selector>(t, selector_from_string); },
          [&g] { return list_text(g.selectors, selector_text); }}},
        {"models",
         {[&g](const std::string& t) { g.models = parse_list<ModelKind>(t, model_kind_from_string); },
          [&g] { return list_text(g.models, model_text); }}},
        {"n_runs", of(g.n_runs)},
        {"seed", of(g.seed)},
        {"approx_tolerance", of(o.approx_tolerance)},
        {"parallelism", of(o.parallelism)},
    };
    m["acquisition"] = {
        {"sweep_length_mm", of(o.sweep_length_mm)},
        {"sweeps_per_class", of(o.sweeps_per_class)},
        {"profile_resolution_um", of(o.profile_resolution_um)},
        {"dab_duration_ms", of(o.dab_duration_ms)},
        {"dabs_per_material", of(o.dabs_per_material)},
        {"dab_variability", of(o.dab_variability)},
    };
    m["sensor"] = {
        {"pressure_rate_hz", of(s.pressure_rate_hz)},
        {"accel_rate_hz", of(s.accel_rate_hz)},
        {"laser_rate_hz", of(s.laser_rate_hz)},
        {"stream_rate_hz", of(s.stream_rate_hz)},
        {"pressure_noise_sd", of(s.pressure_noise_sd)},
        {"accel_noise_sd", of(s.accel_noise_sd)},
        {"laser_noise_sd", of(s.laser_noise_sd)},
        {"whisker_resonance_hz", of(s.whisker_resonance_hz)},
        {"resonance_q", of(s.resonance_q)},
        {"stick_slip_threshold", of(s.stick_slip_threshold)},
        {"friction_coefficient", of(s.friction_coefficient)},
        {"lateral_stiffness", of(s.lateral_stiffness)},
        {"normal_stiffness", of(s.normal_stiffness)},
        {"preload_um", of(s.preload_um)},
        {"kinetic_ratio", of(s.kinetic_ratio)},
        {"tilt_gain", of(s.tilt_gain)},
        {"stage_vibration_um_per_mm_min", of(s.stage_vibration_um_per_mm_min)},
        {"stage_vibration_hz", of(s.stage_vibration_hz)},
        {"accel_scale_um_s2", of(s.accel_scale_um_s2)},
        {"cross_axis_coupling", of(s.cross_axis_coupling)},
        {"dab_indentation_um", of(s.dab_indentation_um)},
        {"simulation_rate_hz", of(s.simulation_rate_hz)},
    };
    m["svm"] = {
        {"c", of(o.svm.regularization_c)},
        {"epochs", of(o.svm.epochs)},
        {"learning_rate", of(o.svm.initial_learning_rate)},
        {"decay", of(o.svm.decay)},
        {"batch_size", of(o.svm.batch_size)},
    };
    m["rf"] = {
        {"n_trees", of(o.rf.n_trees)},
        {"max_depth", of(o.rf.max_depth)},
        {"features_per_split", of(o.rf.features_per_split)},
        {"min_samples_split", of(o.rf.min_samples_split)},
        {"bootstrap", of(o.rf.bootstrap)},
    };
    m["mlp"] = {
        {"hidden_layers",
         {[&o](const std::string& t) { o.mlp.hidden_layers = parse_list<int>(t, [](const std::string& x) { return static_cast<int>(parse_int(x)); }); },
          [&o] { return list_text(o.mlp.hidden_layers, int_text); }}},
        {"dropout_rate", of(o.mlp.dropout_rate)},
        {"layer_norm", of(o.mlp.layer_norm)},
        {"learning_rate", of(o.mlp.learning_rate)},
        {"max_epochs", of(o.mlp.max_epochs)},
        {"early_stopping_patience", of(o.mlp.early_stopping_patience)},
        {"batch_size", of(o.mlp.batch_size)},
    };
    return m;
}

} // namespace

void apply_study_config(const std::string& path, StudyConfig& config) {
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::runtime_error("config " + path + ": " + e.message() + " at line " +
                                 std::to_string(e.line()));
    }
    auto fields = schema(config);
    for (const auto& [section, body] : tree) {
        const auto sec = fields.find(section);
        if (sec == fields.end() || body.empty())
            throw std::invalid_argument("config " + path + ": unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            const auto f = sec->second.find(key);
            if (f == sec->second.end())
                throw std::invalid_argument("config " + path + ": unknown key " + section + "." + key);
            try {
                f->second.set(trim(value.data()));
            } catch (const std::exception& e) {
                throw std::invalid_argument("config " + path + ": " + section + "." + key + ": " +
                                            e.what());
            }
        }
    }
    config.grid.validate();
    config.options.suite.validate();
}

StudyConfig load_study_config(const std::string& path) {
    StudyConfig c;
    apply_study_config(path, c);
    return c;
}

void write_study_config(const StudyConfig& config, const std::string& path) {
    StudyConfig copy = config;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    bool first = true;
    for (const auto& [section, body] : schema(copy)) {
        if (!first) out << '\n';
        first = false;
        out << '[' << section << "]\n";
        for (const auto& [key, field] : body) out << key << " = " << field.get() << '\n';
    }
}

} // namespace whisker
