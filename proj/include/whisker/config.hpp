#pragma once

#include <string>

#include "whisker/harness.hpp"

namespace whisker {

struct StudyConfig {
    GridSpec grid;
    StudyOptions options;
};

/// INI-style file with sections [grid], [acquisition], [sensor], [svm], [rf]
/// and [mlp]. Absent keys keep their defaults; unknown keys are rejected.
/// Lists are comma separated, e.g. `windows = 50, 100`.
StudyConfig load_study_config(const std::string& path);
void apply_study_config(const std::string& path, StudyConfig& config);
void write_study_config(const StudyConfig& config, const std::string& path);

} // namespace whisker
