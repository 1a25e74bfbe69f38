// kandy: curriculum generator CLI.
//
// Subcommands: generate, validate, render, eval, metrics. All errors print
// to stderr with an "ERROR:" prefix. Exit codes: 0 success, 1 validation
// failure, 2 usage error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kandy/dataset_io.hpp"
#include "kandy/errors.hpp"
#include "kandy/metrics.hpp"
#include "kandy/pipeline.hpp"
#include "kandy/png_io.hpp"
#include "kandy/renderer.hpp"
#include "kandy/rule_engine.hpp"

using namespace kandy;

namespace {

constexpr uint64_t kDefaultSeed = 42;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_flag, std::optional<int> patience,
                 const std::vector<int>& tasks, int threads, bool verbose) {
    std::string config_bytes = slurp(config_path);
    CurriculumConfig cfg = parse_curriculum(config_bytes);

    GenerateOptions opts;
    opts.seed = seed_flag ? *seed_flag : (cfg.has_seed ? cfg.seed : kDefaultSeed);
    opts.patience_override = patience;
    opts.task_filter = tasks;
    opts.threads = threads;
    opts.verbose = verbose;

    auto t0 = std::chrono::steady_clock::now();
    GenerateResult result = generate_dataset(cfg, config_bytes, out_dir, opts);
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    size_t symbols = 0;
    int with_replacement = 0;
    for (const auto& t : result.manifest.tasks) {
        symbols += t.symbols;
        if (t.replacement_mode) ++with_replacement;
    }
    std::printf("generated %zu tasks, %zu symbols, %zu images in %.1fs (seed %llu)\n",
                result.manifest.tasks.size(), symbols, result.images_written, elapsed,
                static_cast<unsigned long long>(opts.seed));
    if (with_replacement > 0) {
        std::printf("%d task(s) exhausted patience and sampled with replacement\n",
                    with_replacement);
    }
    std::printf("wrote %s/{train,val,test}.csv and manifest.json\n", out_dir.c_str());
    return 0;
}

int run_validate(const std::string& dataset_dir, const std::string& config_path) {
    CurriculumConfig cfg = parse_curriculum_file(config_path);
    Dataset ds = read_dataset(dataset_dir);
    auto problems = audit_dataset(ds, cfg);
    if (problems.empty()) {
        std::printf("OK: %zu records, rule-consistent, splits disjoint, images present\n",
                    ds.records.size());
        return 0;
    }
    for (const auto& p : problems) std::fprintf(stderr, "ERROR: %s\n", p.c_str());
    std::fprintf(stderr, "ERROR: validation failed with %zu problem(s)\n", problems.size());
    return 1;
}

int run_render(const std::string& symbol, const std::string& out_path, uint64_t seed,
               bool no_noise, int resolution) {
    SymbolTree tree = from_canonical(symbol);
    RenderConfig cfg;
    cfg.resolution = resolution;
    cfg.noise = !no_noise;
    Rng rng(seed);
    write_png(out_path, render(tree, cfg, rng));
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int run_eval(const std::string& rules_path, const std::string& symbol) {
    RuleSet rules = RuleSet::compile(slurp(rules_path));
    bool verdict = rules.holds(from_canonical(symbol));
    std::printf("%s\n", verdict ? "true" : "false");
    return 0;
}

int run_metrics(const std::string& matrix_path, size_t z, bool strict) {
    AccuracyMatrix m = AccuracyMatrix::from_csv(slurp(matrix_path));
    if (z >= m.size()) {
        throw MetricError("--at " + std::to_string(z) + " is out of range for an " +
                          std::to_string(m.size()) + "-task matrix");
    }
    nlohmann::json out;
    auto emit = [&](const char* name, auto&& fn) {
        try {
            out[name] = fn();
        } catch (const MetricError& e) {
            out[name] = nullptr;
            std::fprintf(stderr, "warning: %s: %s\n", name, e.what());
        }
    };
    emit("average_accuracy", [&] { return average_accuracy(m, z, strict); });
    emit("average_forgetting", [&] { return average_forgetting(m, z, strict); });
    emit("backward_transfer", [&] { return backward_transfer(m, z); });
    emit("forward_transfer", [&] { return forward_transfer(m, z); });
    std::printf("%s\n", out.dump(2).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KANDY-style curriculum generator"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Run the full generation pipeline");
    std::string gen_config, gen_out;
    std::optional<uint64_t> gen_seed;
    std::optional<int> gen_patience;
    std::vector<int> gen_tasks;
    int gen_threads = 0;
    bool gen_verbose = false;
    gen->add_option("--config", gen_config, "Curriculum YAML file")->required();
    gen->add_option("--out", gen_out, "Output dataset directory")->required();
    gen->add_option("--seed", gen_seed, "Global seed (default: config seed, else 42)");
    gen->add_option("--patience", gen_patience, "Override the rejection patience");
    gen->add_option("--tasks", gen_tasks, "Only regenerate these task ids")->delimiter(',');
    gen->add_option("--threads", gen_threads, "Worker threads (default: KANDY_THREADS or cores)");
    gen->add_flag("--verbose", gen_verbose, "Per-task progress on stderr");

    // validate
    auto* val = app.add_subcommand("validate", "Re-audit a generated dataset");
    std::string val_dataset, val_config;
    val->add_option("--dataset", val_dataset, "Dataset directory")->required();
    val->add_option("--config", val_config, "Curriculum YAML file")->required();

    // render
    auto* ren = app.add_subcommand("render", "Rasterize one canonical symbol");
    std::string ren_symbol, ren_out;
    uint64_t ren_seed = kDefaultSeed;
    bool ren_no_noise = false;
    int ren_resolution = 224;
    ren->add_option("--symbol", ren_symbol, "Canonical symbol string")->required();
    ren->add_option("--out", ren_out, "Output PNG path")->required();
    ren->add_option("--seed", ren_seed, "Render seed (default 42)");
    ren->add_flag("--no-noise", ren_no_noise, "Disable size and color noise");
    ren->add_option("--resolution", ren_resolution, "Image resolution (default 224)");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate valid/1 on a symbol");
    std::string ev_rules, ev_symbol;
    ev->add_option("--rules", ev_rules, "Rule source file")->required();
    ev->add_option("--symbol", ev_symbol, "Canonical symbol string")->required();

    // metrics
    auto* met = app.add_subcommand("metrics", "Continual-learning metrics from an accuracy matrix");
    std::string met_matrix;
    size_t met_at = 0;
    bool met_strict = false;
    met->add_option("--matrix", met_matrix, "N x N accuracy CSV (blank = undefined)")->required();
    met->add_option("--at", met_at, "Stream time z")->required();
    met->add_flag("--strict", met_strict, "Printed-formula normalizers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            return run_generate(gen_config, gen_out, gen_seed, gen_patience, gen_tasks,
                                gen_threads, gen_verbose);
        }
        if (val->parsed()) return run_validate(val_dataset, val_config);
        if (ren->parsed()) {
            return run_render(ren_symbol, ren_out, ren_seed, ren_no_noise, ren_resolution);
        }
        if (ev->parsed()) return run_eval(ev_rules, ev_symbol);
        if (met->parsed()) return run_metrics(met_matrix, met_at, met_strict);
    } catch (const Error& e) {
        std::fprintf(stderr, "ERROR: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ERROR: %s\n", e.what());
        return 1;
    }
    return 2;
}
