#ifndef KANDY_PIPELINE_HPP
#define KANDY_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "kandy/dataset_io.hpp"

namespace kandy {

struct GenerateOptions {
    uint64_t seed = 42;
    std::optional<int> patience_override;
    std::vector<int> task_filter;  // empty = all tasks
    int threads = 0;               // 0 = KANDY_THREADS env or hardware count
    bool verbose = false;
};

struct GenerateResult {
    Manifest manifest;
    size_t images_written = 0;
};

/// Runs the whole pipeline: per-task symbol generation (parallel across
/// tasks), image rendering, dataset layout `out_dir/task_<k>/<split>/...`,
/// annotation CSVs and manifest.json. Deterministic in (config bytes, seed)
/// regardless of thread count.
GenerateResult generate_dataset(const CurriculumConfig& cfg, const std::string& config_bytes,
                                const std::string& out_dir, const GenerateOptions& opts);

int resolve_thread_count(int requested, size_t task_count);

}  // namespace kandy

#endif
