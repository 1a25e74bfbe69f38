#ifndef KANDY_TASK_DSL_HPP
#define KANDY_TASK_DSL_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kandy/template_tree.hpp"

namespace kandy {

/// One parsed task: positive/negative template forests, optional rule text,
/// supervision decay endpoints and generation targets.
struct TaskSpec {
    int task_id = 0;
    std::string name;  // optional, for diagnostics only
    std::vector<TemplateNode> positive_templates;
    std::vector<TemplateNode> negative_templates;
    std::string rule_text;  // empty = no rejection rule
    double gamma = 1.0;
    double beta = 1.0;
    int target_samples = 100;
    std::array<double, 3> split_fractions = {0.5, 0.25, 0.25};  // train, val, test
    std::optional<int> patience;  // overrides the curriculum value
};

struct NoiseConfig {
    int size_jitter = 2;  // additive uniform in [-jitter, +jitter] pixels
    double sigma_h = 0.01;
    double sigma_s = 0.2;
    double sigma_v = 0.2;
};

struct CurriculumConfig {
    std::vector<TaskSpec> tasks;
    int resolution = 224;
    std::array<uint8_t, 3> background = {128, 128, 128};
    int small_px = 10;
    int large_px = 25;
    NoiseConfig noise;
    int patience = 10000;
    uint64_t seed = 42;
    bool has_seed = false;  // whether the document set one explicitly
};

/// Parses a curriculum document (YAML). Anchors, aliases and merge keys
/// are resolved per standard YAML semantics before schema validation.
/// Structural violations throw ParseError with the task id and path.
CurriculumConfig parse_curriculum(const std::string& document);
CurriculumConfig parse_curriculum_file(const std::string& path);

/// Parses one template forest from YAML text (a top-level sequence).
/// Mostly useful for tests and small tools.
std::vector<TemplateNode> parse_template_forest(const std::string& document);

/// Non-fatal findings on a parsed task. Hard violations already failed
/// parse; these flag constructions that are legal but suspicious.
std::vector<std::string> validate_semantics(const TaskSpec& spec);

}  // namespace kandy

#endif
