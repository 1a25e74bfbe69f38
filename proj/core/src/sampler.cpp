#include "kandy/sampler.hpp"

#include <cmath>

#include "kandy/errors.hpp"
#include "kandy/expansion.hpp"

namespace kandy {

double SupervisionSchedule::probability_at(double t) const {
    if (gamma == 0.0) return 0.0;
    if (beta == 0.0) {
        throw ConfigError("supervision schedule with beta = 0 and gamma > 0 has undefined decay");
    }
    double sigma = std::log(gamma / beta);
    return gamma * std::exp(-sigma * t);
}

std::vector<bool> supervision_mask(size_t n, double gamma, double beta, Rng& rng) {
    if (n == 0) return {};
    if (gamma == 0.0) return std::vector<bool>(n, false);
    SupervisionSchedule schedule{gamma, beta};
    std::vector<bool> mask(n);
    for (size_t i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        mask[i] = rng.bernoulli(schedule.probability_at(t));
    }
    return mask;
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

GenerationLedger generate_symbols(const TaskSpec& spec, const RuleSet* rules, int patience,
                                  Rng& rng) {
    GenerationLedger ledger;
    std::unordered_set<std::string> seen;
    int fail_streak = 0;
    const size_t target = static_cast<size_t>(spec.target_samples);

    while (ledger.symbols.size() < target) {
        if (fail_streak >= patience) {
            ledger.replacement_mode = true;
            break;
        }
        bool positive = rng.bernoulli(0.5);
        const auto& forest = positive ? spec.positive_templates : spec.negative_templates;
        size_t idx = rng.index(forest.size());

        std::string symbol;
        try {
            SymbolTree tree = expand_sample(forest[idx], rng);
            symbol = to_canonical(tree);
            if (seen.count(symbol)) {
                ++ledger.rejections.by_repetition;
                ++fail_streak;
                continue;
            }
            if (rules) {
                bool satisfied;
                try {
                    satisfied = rules->holds(tree);
                } catch (const EvaluationError& e) {
                    throw EvaluationError(std::string(e.what()) + " while judging " + symbol);
                }
                if (satisfied != positive) {
                    ++ledger.rejections.by_rule;
                    ++fail_streak;
                    continue;
                }
            }
        } catch (const EmptyDescriptorError&) {
            ++ledger.rejections.by_empty_descriptor;
            ++fail_streak;
            continue;
        }
        seen.insert(symbol);
        ledger.symbols.push_back({std::move(symbol), positive ? 1 : 0});
        fail_streak = 0;
    }
    return ledger;
}

SplitSizes split_sizes(size_t count, const std::array<double, 3>& fractions) {
    // +1e-9 absorbs binary representation error in fraction*count.
    auto part = [count](double f) {
        return static_cast<size_t>(std::floor(f * static_cast<double>(count) + 1e-9));
    };
    SplitSizes s;
    s.val = part(fractions[1]);
    s.test = part(fractions[2]);
    s.train = count - s.val - s.test;
    return s;
}

SymbolSplits split_symbols(const GenerationLedger& ledger, const std::array<double, 3>& fractions,
                           Rng& rng) {
    std::vector<LabeledSymbol> pool = ledger.symbols;
    rng.shuffle(pool);
    SplitSizes sizes = split_sizes(pool.size(), fractions);
    SymbolSplits out;
    out.train.assign(pool.begin(), pool.begin() + static_cast<long>(sizes.train));
    out.val.assign(pool.begin() + static_cast<long>(sizes.train),
                   pool.begin() + static_cast<long>(sizes.train + sizes.val));
    out.test.assign(pool.begin() + static_cast<long>(sizes.train + sizes.val), pool.end());
    return out;
}

std::vector<LabeledSymbol> materialize(const std::vector<LabeledSymbol>& split, size_t target,
                                       bool replacement, Rng& rng) {
    if (target == 0) return {};
    if (split.empty()) {
        throw Error("cannot materialize " + std::to_string(target) + " samples from an empty split");
    }
    if (!replacement) {
        if (target > split.size()) {
            throw Error("without-replacement materialization needs " + std::to_string(target) +
                        " symbols but the split holds " + std::to_string(split.size()));
        }
        return {split.begin(), split.begin() + static_cast<long>(target)};
    }
    std::vector<LabeledSymbol> out;
    out.reserve(target);
    for (size_t i = 0; i < target; ++i) out.push_back(split[rng.index(split.size())]);
    return out;
}

std::string make_sample_id(int task_id, Split split, size_t ordinal) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "t%02d_%s_%04zu", task_id, std::string(to_string(split)).c_str(),
                  ordinal);
    return buf;
}

std::string image_relative_path(int task_id, Split split, const std::string& sample_id) {
    return "task_" + std::to_string(task_id) + "/" + std::string(to_string(split)) + "/" +
           sample_id + ".png";
}

TaskGeneration generate_task(const CurriculumConfig& cfg, const TaskSpec& spec, uint64_t seed) {
    TaskGeneration out;
    out.task_id = spec.task_id;

    std::optional<RuleSet> rules;
    if (!spec.rule_text.empty()) rules = RuleSet::compile(spec.rule_text);

    int patience = spec.patience.value_or(cfg.patience);
    Rng rng_gen(derive_stream(seed, {static_cast<uint64_t>(spec.task_id), stream_tag::generation}));
    out.ledger = generate_symbols(spec, rules ? &*rules : nullptr, patience, rng_gen);
    if (out.ledger.symbols.empty()) {
        throw Error("task " + std::to_string(spec.task_id) + " produced no symbols at all");
    }

    Rng rng_split(derive_stream(seed, {static_cast<uint64_t>(spec.task_id), stream_tag::split}));
    SymbolSplits splits = split_symbols(out.ledger, spec.split_fractions, rng_split);

    out.counts = split_sizes(static_cast<size_t>(spec.target_samples), spec.split_fractions);

    Rng rng_mat(derive_stream(seed, {static_cast<uint64_t>(spec.task_id), stream_tag::materialize}));
    Rng rng_sup(derive_stream(seed, {static_cast<uint64_t>(spec.task_id), stream_tag::supervision}));

    for (Split split : {Split::train, Split::val, Split::test}) {
        size_t target = out.counts.of(split);
        auto chosen = materialize(splits.of(split), target, out.ledger.replacement_mode, rng_mat);
        // The decay schedule runs over the training stream; labels are only
        // consumed in training, so val/test rows stay fully annotated.
        std::vector<bool> mask;
        if (split == Split::train) {
            mask = supervision_mask(chosen.size(), spec.gamma, spec.beta, rng_sup);
        }
        for (size_t i = 0; i < chosen.size(); ++i) {
            SampleRecord rec;
            rec.sample_id = make_sample_id(spec.task_id, split, i);
            rec.task_id = spec.task_id;
            rec.split = split;
            rec.label = chosen[i].label;
            rec.supervised = split == Split::train ? mask[i] : true;
            rec.symbol = chosen[i].symbol;
            rec.image_path = image_relative_path(spec.task_id, split, rec.sample_id);
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace kandy
