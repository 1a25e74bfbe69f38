#include <doctest.h>

#include <cmath>
#include <set>

#include "kandy/sampler.hpp"

using namespace kandy;

namespace {

TaskSpec tiny_task(const char* pos, const char* neg, int target, const char* rule = "") {
    CurriculumConfig cfg = parse_curriculum(
        std::string("tasks:\n  - samples: ") + std::to_string(target) +
        (rule[0] ? std::string("\n    rule: \"") + rule + "\"" : "") + "\n    positive:\n      - " +
        pos + "\n    negative:\n      - " + neg + "\n");
    return cfg.tasks[0];
}

}  // namespace

TEST_CASE("supervision schedule hits its boundary values exactly") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        double gamma = 0.01 + 0.99 * rng.real();
        double beta = 0.01 + 0.99 * rng.real();
        SupervisionSchedule f{gamma, beta};
        CHECK(std::fabs(f.probability_at(0.0) - gamma) < 1e-12);
        CHECK(std::fabs(f.probability_at(1.0) - beta) < 1e-12);
    }
    SupervisionSchedule f{0.8, 0.2};
    CHECK(f.probability_at(0.5) == doctest::Approx(0.4).epsilon(1e-12));  // sqrt(gamma*beta)
}

TEST_CASE("schedule is monotone non-increasing for gamma >= beta") {
    SupervisionSchedule f{0.9, 0.1};
    double prev = 2.0;
    for (int i = 0; i <= 100; ++i) {
        double p = f.probability_at(i / 100.0);
        CHECK(p <= prev + 1e-15);
        prev = p;
    }
}

TEST_CASE("supervision mask empirical means") {
    SUBCASE("constant gamma = beta = 0.5") {
        Rng rng(2);
        auto mask = supervision_mask(1000, 0.5, 0.5, rng);
        int on = static_cast<int>(std::count(mask.begin(), mask.end(), true));
        CHECK(std::fabs(on / 1000.0 - 0.5) < 0.047);
    }
    SUBCASE("decay 0.8 -> 0.2 integrates to (gamma-beta)/ln(gamma/beta)") {
        Rng rng(3);
        auto mask = supervision_mask(1000, 0.8, 0.2, rng);
        int on = static_cast<int>(std::count(mask.begin(), mask.end(), true));
        double expected = (0.8 - 0.2) / std::log(0.8 / 0.2);
        CHECK(expected == doctest::Approx(0.432808).epsilon(1e-5));
        CHECK(std::fabs(on / 1000.0 - expected) < 0.05);
    }
    SUBCASE("edge configurations") {
        Rng rng(4);
        auto all = supervision_mask(50, 1.0, 1.0, rng);
        CHECK(std::count(all.begin(), all.end(), true) == 50);
        auto none = supervision_mask(50, 0.0, 0.7, rng);
        CHECK(std::count(none.begin(), none.end(), true) == 0);
        CHECK_THROWS_AS(supervision_mask(50, 0.5, 0.0, rng), ConfigError);
        CHECK(supervision_mask(0, 0.5, 0.5, rng).empty());
        auto single = supervision_mask(1, 1.0, 0.2, rng);
        CHECK(single[0]);  // t = 0 for a lone sample, f(0) = 1
    }
}

TEST_CASE("split sizes floor val and test, remainder to train") {
    auto s = split_sizes(100, {0.5, 0.25, 0.25});
    CHECK(s.train == 50);
    CHECK(s.val == 25);
    CHECK(s.test == 25);
    auto l = split_sizes(1000, {0.8, 0.1, 0.1});
    CHECK(l.train == 800);
    CHECK(l.val == 100);
    CHECK(l.test == 100);
    auto all_train = split_sizes(100, {1.0, 0.0, 0.0});
    CHECK(all_train.train == 100);
    CHECK(all_train.val == 0);
    CHECK(all_train.test == 0);
    auto odd = split_sizes(7, {0.5, 0.25, 0.25});
    CHECK(odd.val == 1);
    CHECK(odd.test == 1);
    CHECK(odd.train == 5);
}

TEST_CASE("generation dedups symbols and tracks rejections") {
    // 12 positive uniques (triangles) and 24 negative uniques; a target of
    // 100 must exhaust patience and switch to replacement mode.
    TaskSpec spec = tiny_task("in:\n          - {shape: triangle, color: ~, size: ~}",
                              "in:\n          - {shape: ~, color: ~, size: ~}", 100,
                              "valid(C) :- contains(C, C1), extract_shape(C1, triangle).");
    RuleSet rules = RuleSet::compile(spec.rule_text);
    Rng rng(5);
    GenerationLedger ledger = generate_symbols(spec, &rules, 200, rng);
    CHECK(ledger.replacement_mode);
    CHECK(ledger.symbols.size() == 36);
    CHECK(ledger.rejections.by_repetition >= 200);
    CHECK(ledger.rejections.by_rule > 0);  // negative draws that came out triangles

    std::set<std::string> unique;
    for (const auto& s : ledger.symbols) {
        unique.insert(s.symbol);
        bool satisfied = rules.holds(from_canonical(s.symbol));
        CHECK(satisfied == (s.label == 1));
    }
    CHECK(unique.size() == ledger.symbols.size());
}

TEST_CASE("generation reaches the target without replacement when variety suffices") {
    TaskSpec spec = tiny_task(
        "side_by_side:\n          - {shape: ~, color: ~, size: ~}\n          - {shape: ~, color: "
        "~, size: ~}",
        "stack:\n          - {shape: ~, color: ~, size: ~}\n          - {shape: ~, color: ~, "
        "size: ~}",
        100);
    Rng rng(6);
    GenerationLedger ledger = generate_symbols(spec, nullptr, 1000, rng);
    CHECK_FALSE(ledger.replacement_mode);
    CHECK(ledger.symbols.size() == 100);
}

TEST_CASE("empty-descriptor rejections count against patience") {
    TaskSpec spec = tiny_task(
        "in:\n          - intersect:\n              - {shape: ~, color: red, size: ~}\n           "
        "   - {shape: ~, color: blue, size: ~}",
        "in:\n          - {shape: ~, color: ~, size: ~}", 50);
    Rng rng(7);
    GenerationLedger ledger = generate_symbols(spec, nullptr, 64, rng);
    CHECK(ledger.rejections.by_empty_descriptor > 0);
    for (const auto& s : ledger.symbols) CHECK(s.label == 0);  // positives never materialize
}

TEST_CASE("splits are disjoint partitions") {
    GenerationLedger ledger;
    for (int i = 0; i < 100; ++i) {
        ledger.symbols.push_back({"s" + std::to_string(i), i % 2});
    }
    Rng rng(8);
    SymbolSplits splits = split_symbols(ledger, {0.5, 0.25, 0.25}, rng);
    CHECK(splits.train.size() == 50);
    CHECK(splits.val.size() == 25);
    CHECK(splits.test.size() == 25);
    std::set<std::string> seen;
    for (const auto& part : {splits.train, splits.val, splits.test}) {
        for (const auto& s : part) {
            CHECK(seen.insert(s.symbol).second);  // no symbol in two splits
        }
    }
    CHECK(seen.size() == 100);
}

TEST_CASE("materialization") {
    std::vector<LabeledSymbol> split = {{"a", 1}, {"b", 0}, {"c", 1}};
    Rng rng(9);
    SUBCASE("without replacement emits the split as-is") {
        auto out = materialize(split, 3, false, rng);
        REQUIRE(out.size() == 3);
        CHECK(out[0].symbol == "a");
        CHECK(out[2].symbol == "c");
    }
    SUBCASE("with replacement draws only from the split") {
        auto out = materialize(split, 10, true, rng);
        REQUIRE(out.size() == 10);
        std::set<std::string> names;
        for (const auto& s : out) names.insert(s.symbol);
        for (const auto& n : names) CHECK((n == "a" || n == "b" || n == "c"));
        CHECK(names.size() >= 2);  // pigeonhole: repetitions certain, variety near-certain
    }
    SUBCASE("empty split with nonzero target aborts") {
        std::vector<LabeledSymbol> empty;
        CHECK_THROWS_AS(materialize(empty, 5, true, rng), Error);
        CHECK(materialize(empty, 0, true, rng).empty());
    }
    SUBCASE("oversized without-replacement target aborts") {
        CHECK_THROWS_AS(materialize(split, 5, false, rng), Error);
    }
}

TEST_CASE("generate_task is deterministic and well-formed") {
    CurriculumConfig cfg = parse_curriculum(R"(
patience: 500
tasks:
  - samples: 40
    splits: [0.5, 0.25, 0.25]
    gamma: 0.8
    beta: 0.2
    rule: |
      valid(C) :- contains(C, C1), extract_shape(C1, triangle).
    positive:
      - side_by_side:
          - {shape: triangle, color: ~, size: ~}
          - {shape: ~, color: ~, size: ~}
    negative:
      - side_by_side:
          - {shape: not_triangle, color: ~, size: ~}
          - {shape: not_triangle, color: ~, size: ~}
)");
    TaskGeneration a = generate_task(cfg, cfg.tasks[0], 42);
    TaskGeneration b = generate_task(cfg, cfg.tasks[0], 42);
    TaskGeneration c = generate_task(cfg, cfg.tasks[0], 43);

    REQUIRE(a.records.size() == 40);
    CHECK(a.counts.train == 20);
    CHECK(a.counts.val == 10);
    CHECK(a.counts.test == 10);

    REQUIRE(b.records.size() == a.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].sample_id == b.records[i].sample_id);
        CHECK(a.records[i].symbol == b.records[i].symbol);
        CHECK(a.records[i].supervised == b.records[i].supervised);
        CHECK(a.records[i].label == b.records[i].label);
    }
    bool any_difference = false;
    for (size_t i = 0; i < std::min(a.records.size(), c.records.size()); ++i) {
        if (a.records[i].symbol != c.records[i].symbol) any_difference = true;
    }
    CHECK(any_difference);

    // Sample ids and image paths follow the documented scheme.
    CHECK(a.records[0].sample_id == "t00_train_0000");
    CHECK(a.records[0].image_path == "task_0/train/t00_train_0000.png");
    // val/test rows keep their annotations; the decay applies to train only.
    for (const auto& rec : a.records) {
        if (rec.split != Split::train) CHECK(rec.supervised);
    }
}

TEST_CASE("rule evaluation errors abort the task with the canonical string") {
    CurriculumConfig cfg = parse_curriculum(R"(
tasks:
  - samples: 5
    rule: |
      loop(X) :- loop(X).
      valid(C) :- loop(C).
    positive:
      - in:
          - {shape: ~, color: ~, size: ~}
    negative:
      - in:
          - {shape: ~, color: ~, size: ~}
)");
    CHECK_THROWS_WITH_AS(generate_task(cfg, cfg.tasks[0], 1), doctest::Contains("in(["),
                         EvaluationError);
}
