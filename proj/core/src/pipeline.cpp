#include "kandy/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#include "kandy/errors.hpp"
#include "kandy/png_io.hpp"
#include "kandy/renderer.hpp"

namespace fs = std::filesystem;

namespace kandy {

int resolve_thread_count(int requested, size_t task_count) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("KANDY_THREADS")) {
            n = std::atoi(env);
        }
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return static_cast<int>(std::min<size_t>(static_cast<size_t>(n), std::max<size_t>(task_count, 1)));
}

GenerateResult generate_dataset(const CurriculumConfig& cfg, const std::string& config_bytes,
                                const std::string& out_dir, const GenerateOptions& opts) {
    std::vector<const TaskSpec*> tasks;
    for (const auto& task : cfg.tasks) {
        if (!opts.task_filter.empty() &&
            std::find(opts.task_filter.begin(), opts.task_filter.end(), task.task_id) ==
                opts.task_filter.end()) {
            continue;
        }
        tasks.push_back(&task);
    }
    if (tasks.empty()) throw ConfigError("no tasks selected");

    CurriculumConfig effective = cfg;
    if (opts.patience_override) effective.patience = *opts.patience_override;

    fs::create_directories(out_dir);
    for (const TaskSpec* task : tasks) {
        for (const char* split : {"train", "val", "test"}) {
            fs::create_directories(fs::path(out_dir) / ("task_" + std::to_string(task->task_id)) /
                                   split);
        }
    }

    RenderConfig render_cfg = RenderConfig::from_curriculum(cfg);
    std::vector<TaskGeneration> generations(tasks.size());
    std::vector<size_t> image_counts(tasks.size(), 0);

    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::mutex log_mutex;

    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const TaskSpec& spec = *tasks[i];
                TaskGeneration gen = generate_task(effective, spec, opts.seed);
                for (size_t r = 0; r < gen.records.size(); ++r) {
                    const SampleRecord& rec = gen.records[r];
                    Rng rng(derive_stream(opts.seed, {static_cast<uint64_t>(spec.task_id),
                                                      stream_tag::render, r}));
                    SymbolTree tree = from_canonical(rec.symbol);
                    Image img = render(tree, render_cfg, rng);
                    write_png(out_dir + "/" + rec.image_path, img);
                }
                image_counts[i] = gen.records.size();
                if (opts.verbose) {
                    std::lock_guard<std::mutex> lock(log_mutex);
                    std::fprintf(stderr, "task %d: %zu symbols, %zu images%s\n", spec.task_id,
                                 gen.ledger.symbols.size(), gen.records.size(),
                                 gen.ledger.replacement_mode ? " (with replacement)" : "");
                }
                generations[i] = std::move(gen);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int thread_count = resolve_thread_count(opts.threads, tasks.size());
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Single writer for the tabular outputs, tasks in id order.
    std::vector<SampleRecord> all_records;
    GenerateResult result;
    result.manifest.seed = opts.seed;
    result.manifest.config_digest = sha256_hex(config_bytes);
    for (size_t i = 0; i < tasks.size(); ++i) {
        const TaskGeneration& gen = generations[i];
        ManifestTask mt;
        mt.task_id = gen.task_id;
        mt.symbols = gen.ledger.symbols.size();
        mt.rejections = gen.ledger.rejections;
        mt.replacement_mode = gen.ledger.replacement_mode;
        mt.train = gen.counts.train;
        mt.val = gen.counts.val;
        mt.test = gen.counts.test;
        result.manifest.tasks.push_back(mt);
        all_records.insert(all_records.end(), gen.records.begin(), gen.records.end());
        result.images_written += image_counts[i];
    }
    write_annotation_csvs(out_dir, all_records);
    write_manifest(out_dir + "/manifest.json", result.manifest);
    return result;
}

}  // namespace kandy
