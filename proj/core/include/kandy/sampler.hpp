#ifndef KANDY_SAMPLER_HPP
#define KANDY_SAMPLER_HPP

#include <array>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "kandy/rule_engine.hpp"
#include "kandy/task_dsl.hpp"

namespace kandy {

/// Exponential supervision decay: f(t) = gamma * exp(-sigma * t) with
/// sigma = ln(gamma / beta), so f(0) = gamma and f(1) = beta.
struct SupervisionSchedule {
    double gamma = 1.0;
    double beta = 1.0;

    /// Throws ConfigError for beta = 0 with gamma > 0 (sigma undefined).
    /// gamma = 0 short-circuits to the all-unsupervised schedule.
    double probability_at(double t) const;
};

/// Per-sample supervision flags for n samples in generation order; sample i
/// uses t = i/(n-1) (t = 0 for a single sample). One bernoulli draw per
/// sample except under the gamma = 0 shortcut, which draws nothing.
std::vector<bool> supervision_mask(size_t n, double gamma, double beta, Rng& rng);

struct RejectionCounters {
    uint64_t by_repetition = 0;
    uint64_t by_rule = 0;
    uint64_t by_empty_descriptor = 0;
    uint64_t total() const { return by_repetition + by_rule + by_empty_descriptor; }
};

struct LabeledSymbol {
    std::string symbol;
    int label = 0;  // 1 iff drawn from the positive set
};

/// Outcome of the rejection-sampling phase for one task.
struct GenerationLedger {
    std::vector<LabeledSymbol> symbols;  // insertion order, no duplicates
    RejectionCounters rejections;
    bool replacement_mode = false;  // set when patience ran out; never reverts
};

/// Rejection-sampling loop: pick a set (p = 0.5), pick a template uniformly,
/// expand+ground, serialize; reject duplicates and rule-discordant samples
/// (positives must satisfy the rule, negatives must falsify it). Stops at
/// the target symbol count or after `patience` consecutive rejections.
/// Rule evaluation errors abort the task, tagged with the canonical string.
GenerationLedger generate_symbols(const TaskSpec& spec, const RuleSet* rules, int patience,
                                  Rng& rng);

enum class Split : uint8_t { train = 0, val = 1, test = 2 };
std::string_view to_string(Split s);

struct SplitSizes {
    size_t train = 0, val = 0, test = 0;
    size_t total() const { return train + val + test; }
    size_t of(Split s) const {
        return s == Split::train ? train : s == Split::val ? val : test;
    }
};

/// Floor for val and test, remainder to train.
SplitSizes split_sizes(size_t count, const std::array<double, 3>& fractions);

struct SymbolSplits {
    std::vector<LabeledSymbol> train, val, test;
    const std::vector<LabeledSymbol>& of(Split s) const {
        return s == Split::train ? train : s == Split::val ? val : test;
    }
};

/// Disjoint partition of the symbol set (shuffle, then slice). No canonical
/// string lands in two splits.
SymbolSplits split_symbols(const GenerationLedger& ledger, const std::array<double, 3>& fractions,
                           Rng& rng);

/// Draws exactly `target` samples from one split: without replacement the
/// split is emitted as-is (its order is already a random permutation); with
/// replacement, `target` independent uniform draws. Repetitions never cross
/// splits. Throws on an empty split with a nonzero target.
std::vector<LabeledSymbol> materialize(const std::vector<LabeledSymbol>& split, size_t target,
                                       bool replacement, Rng& rng);

struct SampleRecord {
    std::string sample_id;
    int task_id = 0;
    Split split = Split::train;
    int label = 0;
    bool supervised = true;
    std::string symbol;
    std::string image_path;
};

struct TaskGeneration {
    int task_id = 0;
    GenerationLedger ledger;
    SplitSizes counts;
    std::vector<SampleRecord> records;  // train block, then val, then test
};

/// Runs the symbol phases for one task from its derived rng streams and
/// assigns supervision flags over the training split's generation order.
TaskGeneration generate_task(const CurriculumConfig& cfg, const TaskSpec& spec, uint64_t seed);

std::string make_sample_id(int task_id, Split split, size_t ordinal);
std::string image_relative_path(int task_id, Split split, const std::string& sample_id);

}  // namespace kandy

#endif
