#include <doctest.h>

#include "kandy/rule_engine.hpp"
#include "test_support.hpp"

using namespace kandy;

namespace {

SymbolTree tree(const char* canonical) { return from_canonical(canonical); }

const char* kTowerRule = R"(
valid(C) :- contains(C, C1), tower(C1).
)";

}  // namespace

TEST_CASE("single-clause rule compiles and evaluates") {
    RuleSet rs = RuleSet::compile("valid(C) :- contains(C, C1), extract_shape(C1, triangle).");
    CHECK(rs.clause_count("valid", 1) == 1);
    CHECK(rs.holds(tree("in([triangle_red_small])")));
    CHECK_FALSE(rs.holds(tree("in([circle_red_small])")));
    CHECK(rs.holds(tree("side_by_side([circle_red_small, triangle_blue_large])")));
    // Only direct children count for contains/2.
    CHECK_FALSE(rs.holds(tree("in([grid([triangle_red_small, circle_red_small])])")));
}

TEST_CASE("unknown predicates fail compilation with a line number") {
    CHECK_THROWS_WITH_AS(RuleSet::compile("valid(C) :- frobnicate(C)."),
                         doctest::Contains("frobnicate/1"), RuleCompileError);
    CHECK_THROWS_WITH_AS(RuleSet::compile("\n\nvalid(C) :- frobnicate(C)."),
                         doctest::Contains("line 3"), RuleCompileError);
    CHECK_THROWS_AS(RuleSet::compile("valid(C) :- same_color(C)."), RuleCompileError);
}

TEST_CASE("malformed clauses fail compilation") {
    CHECK_THROWS_AS(RuleSet::compile("valid(C) :- contains(C, C1)"), RuleCompileError);
    CHECK_THROWS_AS(RuleSet::compile("valid(C) :- ."), RuleCompileError);
    CHECK_THROWS_AS(RuleSet::compile("123 :- contains(C, C1)."), RuleCompileError);
}

TEST_CASE("user predicates with recursion compile and shadow nothing") {
    const char* src = R"(
pseudo_palindrome([]).
pseudo_palindrome([_]).
pseudo_palindrome(L) :- middle(L, M), pseudo_palindrome(M),
                        last(L, A), first(L, B), same_shape(_, [A, B]).
pseudo_palindrome(L) :- middle(L, M), pseudo_palindrome(M),
                        last(L, A), first(L, B), same_color(_, [A, B]).
valid(C) :- extract_children(C, L), pseudo_palindrome(L).
)";
    RuleSet rs = RuleSet::compile(src);
    CHECK(rs.clause_count("pseudo_palindrome", 1) == 4);
    CHECK(rs.clause_count("valid", 1) == 1);
    CHECK(rs.holds(tree("side_by_side([triangle_red_small, circle_cyan_large, triangle_blue_small])")));
    CHECK(rs.holds(tree("side_by_side([triangle_red_small, circle_cyan_large, square_red_small])")));
    CHECK_FALSE(
        rs.holds(tree("side_by_side([triangle_red_small, circle_cyan_large, square_blue_small])")));
}

TEST_CASE("named objects from the predicate library") {
    SUBCASE("house needs triangle over square of the same size") {
        RuleSet rs = RuleSet::compile("valid(C) :- contains(C, C1), house(C1).");
        CHECK(rs.query("house", tree("stack([triangle_green_small, square_red_small])")));
        CHECK_FALSE(rs.query("house", tree("stack([triangle_green_small, square_red_large])")));
        CHECK_FALSE(rs.query("house", tree("stack([square_red_small, triangle_green_small])")));
        CHECK_FALSE(rs.query("house", tree("side_by_side([triangle_green_small, square_red_small])")));
        CHECK(rs.holds(tree("in([stack([triangle_green_small, square_red_small])])")));
    }
    SUBCASE("tower length bounds") {
        RuleSet rs = RuleSet::compile(kTowerRule);
        CHECK(rs.holds(tree("in([stack([square_red_small, square_blue_small])])")));
        CHECK(rs.holds(
            tree("in([stack([square_red_small, square_blue_small, square_green_small])])")));
        CHECK_FALSE(rs.holds(tree(
            "in([stack([square_red_small, square_red_small, square_red_small, square_red_small])])")));
        CHECK_FALSE(rs.holds(tree("in([stack([square_red_small])])")));
        CHECK_FALSE(rs.holds(tree("in([stack([square_red_small, square_blue_large])])")));
    }
    SUBCASE("car needs same size and same color") {
        RuleSet rs = RuleSet::compile("valid(C) :- contains(C, C1), car(C1).");
        CHECK(rs.query("car", tree("side_by_side([circle_red_small, circle_red_small])")));
        CHECK_FALSE(rs.query("car", tree("side_by_side([circle_red_small, circle_blue_small])")));
        CHECK_FALSE(rs.query("car", tree("side_by_side([circle_red_small, circle_red_large])")));
    }
    SUBCASE("traffic light is order-sensitive") {
        RuleSet rs = RuleSet::compile("valid(C) :- contains(C, C1), traffic_light(C1).");
        CHECK(rs.query("traffic_light",
                       tree("stack([circle_red_small, circle_yellow_small, circle_green_small])")));
        CHECK_FALSE(rs.query(
            "traffic_light", tree("stack([circle_yellow_small, circle_red_small, circle_green_small])")));
        CHECK_FALSE(rs.query(
            "traffic_light", tree("stack([circle_red_small, circle_yellow_large, circle_green_small])")));
    }
}

TEST_CASE("palindrome via reverse/2") {
    RuleSet rs = RuleSet::compile("valid(C) :- extract_children(C, L), reverse(L, L).");
    CHECK(rs.holds(tree("side_by_side([circle_red_small, square_blue_large, circle_red_small])")));
    CHECK_FALSE(
        rs.holds(tree("side_by_side([circle_red_small, square_blue_large, circle_red_large])")));
    // Verdicts match the independent checker over random trees.
    Rng rng(21);
    for (int i = 0; i < 500; ++i) {
        SymbolTree t = test::random_tree(rng, 2, 4);
        if (t.is_leaf()) continue;
        CHECK(rs.holds(t) == test::nat_palindrome_children(t));
    }
}

TEST_CASE("clause order is irrelevant for the disjunction") {
    const char* forward = R"(
valid(C) :- extract_children(C, L), length(L, N), odd(N), same_color(_, L).
valid(C) :- extract_children(C, L), length(L, N), even(N), same_shape(_, L).
)";
    const char* backward = R"(
valid(C) :- extract_children(C, L), length(L, N), even(N), same_shape(_, L).
valid(C) :- extract_children(C, L), length(L, N), odd(N), same_color(_, L).
)";
    RuleSet a = RuleSet::compile(forward);
    RuleSet b = RuleSet::compile(backward);
    Rng rng(22);
    for (int i = 0; i < 500; ++i) {
        SymbolTree t = test::random_tree(rng, 1, 5);
        if (t.is_leaf()) continue;
        CHECK(a.holds(t) == b.holds(t));
    }
}

TEST_CASE("forall quantifies over groups") {
    const char* src = R"(
valid(C) :- color(CO),
            forall(contains(C, C1),
                (contains(C1, C2), extract_color(C2, CO))).
)";
    RuleSet rs = RuleSet::compile(src);
    CHECK(rs.holds(tree("grid([stack([circle_cyan_small, square_red_small]), "
                        "side_by_side([triangle_cyan_large, circle_blue_small])])")));
    CHECK_FALSE(rs.holds(tree("grid([stack([circle_cyan_small, square_red_small]), "
                              "side_by_side([triangle_green_large, circle_blue_small])])")));

    RuleSet shared = RuleSet::compile("valid(C) :- forall_shared_color(C, cyan).");
    CHECK(shared.holds(tree("grid([stack([circle_cyan_small]), in([circle_cyan_large])])")));
    CHECK_FALSE(shared.holds(tree("grid([stack([circle_cyan_small]), in([circle_red_large])])")));
}

TEST_CASE("negation as failure") {
    const char* src = R"(
tmp(C) :- contains(C, C1), extract_color(C1, red).
valid(C) :- not(tmp(C)).
)";
    RuleSet rs = RuleSet::compile(src);
    CHECK(rs.holds(tree("in([circle_blue_small])")));
    CHECK_FALSE(rs.holds(tree("side_by_side([circle_blue_small, square_red_large])")));
}

TEST_CASE("implication rule matches direct object detection") {
    const char* src = R"(
tmp(C) :- contains(C, C1), is_named_object(C1, traffic_light).
tmp2(C) :- contains(C, C2), is_named_object(C2, house).

valid(C) :- contains(C, C1), is_named_object(C1, traffic_light),
            contains(C, C2), is_named_object(C2, car).
valid(C) :- contains(C, C1), is_named_object(C1, house),
            contains(C, C2), is_named_object(C2, tower).
valid(C) :- not(tmp(C)), not(tmp2(C)).
)";
    RuleSet rs = RuleSet::compile(src);

    const char* tl = "stack([circle_red_small, circle_yellow_small, circle_green_small])";
    const char* car = "side_by_side([circle_blue_large, circle_blue_large])";
    const char* house = "stack([triangle_red_small, square_blue_small])";
    const char* tower = "stack([square_green_large, square_cyan_large])";
    const char* junk = "diag_ul_lr([triangle_red_small, circle_green_large])";

    auto scene = [](std::initializer_list<const char*> objects) {
        std::vector<SymbolTree> children;
        for (const char* c : objects) children.push_back(from_canonical(c));
        return SymbolTree::node(CompOp::side_by_side, std::move(children));
    };

    std::vector<SymbolTree> scenes = {
        scene({tl, car, junk, junk}),   scene({tl, junk, junk, junk}),
        scene({house, tower, junk, junk}), scene({house, junk, junk, junk}),
        scene({junk, junk, junk, junk}),   scene({tl, house, junk, junk}),
        scene({tl, car, house, tower}),    scene({tl, house, tower, junk}),
        scene({car, tower, junk, junk}),   scene({tl, car, house, junk}),
    };
    for (const auto& s : scenes) {
        CHECK(rs.holds(s) == test::nat_hard16(s));
    }
    CHECK(rs.holds(scenes[0]));
    CHECK_FALSE(rs.holds(scenes[1]));
    CHECK(rs.holds(scenes[2]));
    CHECK_FALSE(rs.holds(scenes[3]));
    CHECK(rs.holds(scenes[4]));
}

TEST_CASE("arithmetic and list predicates") {
    SUBCASE("length bounds") {
        RuleSet rs = RuleSet::compile(
            "valid(C) :- extract_children(C, L), length(L, N), N >= 2, N =< 3.");
        CHECK_FALSE(rs.holds(tree("in([circle_red_small])")));
        CHECK(rs.holds(tree("in([circle_red_small, circle_red_large])")));
        CHECK_FALSE(rs.holds(tree(
            "in([circle_red_small, circle_red_large, circle_blue_small, circle_blue_large])")));
    }
    SUBCASE("last and member") {
        RuleSet rs = RuleSet::compile(R"(
valid(C) :- extract_children(C, L), last(L, C1),
            member(C2, L), extract_shape(C1, triangle),
            extract_color(C1, red), extract_color(C2, blue).
)");
        CHECK(rs.holds(tree("side_by_side([circle_blue_small, triangle_red_large])")));
        CHECK_FALSE(rs.holds(tree("side_by_side([triangle_red_large, circle_blue_small])")));
        CHECK_FALSE(rs.holds(tree("side_by_side([circle_green_small, triangle_red_large])")));
    }
    SUBCASE("middle and dropmiddle") {
        RuleSet rs = RuleSet::compile(R"(
valid(C) :- extract_children(C, L), getmiddle(L, X), extract_shape(X, circle).
)");
        CHECK(rs.holds(tree("stack([square_red_small, circle_blue_small, square_red_small])")));
        CHECK_FALSE(rs.holds(tree("stack([circle_red_small, square_blue_small, square_red_small])")));
        // Even-length lists have no middle.
        CHECK_FALSE(rs.holds(tree("stack([circle_red_small, circle_blue_small])")));
    }
    SUBCASE("odd and even") {
        RuleSet rs = RuleSet::compile(
            "valid(C) :- extract_children(C, L), length(L, N), odd(N).");
        CHECK(rs.holds(tree("in([circle_red_small])")));
        CHECK_FALSE(rs.holds(tree("in([circle_red_small, circle_red_large])")));
    }
}

TEST_CASE("recursive_contains reaches leaves at any depth") {
    RuleSet rs = RuleSet::compile(R"(
valid(C) :- recursive_contains(C, C1), recursive_contains(C, C2),
            same_color(_, [C1, C2]), extract_shape(C1, triangle),
            extract_shape(C2, square).
)");
    CHECK(rs.holds(tree("in([grid([triangle_cyan_small, square_cyan_large])])")));
    CHECK(rs.holds(tree("quadrant_ul([stack([triangle_red_small, in([square_red_small])])])")));
    CHECK_FALSE(rs.holds(tree("in([grid([triangle_cyan_small, square_red_large])])")));
}

TEST_CASE("depth limit overruns are evaluation errors, not false") {
    RuleSet rs = RuleSet::compile("loop(X) :- loop(X).\nvalid(C) :- loop(C).", 32);
    CHECK_THROWS_AS((void)rs.holds(tree("in([circle_red_small])")), EvaluationError);
}

TEST_CASE("querying an undefined predicate is an error") {
    RuleSet rs = RuleSet::compile(kTowerRule);
    CHECK_THROWS_AS((void)rs.query("no_such_thing", tree("in([circle_red_small])")),
                    EvaluationError);
}

TEST_CASE("engine verdicts match native checkers on exhaustive bar scenes") {
    // Flat trees op([a1..ak]), k <= 3, over an 8-atom slice of the universe:
    // the named-object definitions && the engine must agree everywhere.
    RuleSet rs = RuleSet::compile(kTowerRule);

    auto run_against = [&](const std::vector<Atom>& atoms, CompOp op,
                           const std::string& predicate, bool (*checker)(const SymbolTree&)) {
        int agreement = 0, total = 0, positives = 0;
        std::vector<std::vector<Atom>> stacks;
        for (const Atom& a : atoms) stacks.push_back({a});
        for (const Atom& a : atoms) {
            for (const Atom& b : atoms) {
                stacks.push_back({a, b});
                for (const Atom& c : atoms) stacks.push_back({a, b, c});
            }
        }
        for (const auto& combo : stacks) {
            std::vector<SymbolTree> children;
            for (Atom a : combo) children.push_back(SymbolTree::leaf(a));
            SymbolTree t = SymbolTree::node(op, std::move(children));
            bool engine = rs.query(predicate, t);
            bool native = checker(t);
            ++total;
            if (engine == native) ++agreement;
            if (native) ++positives;
        }
        CHECK(agreement == total);
        CHECK(positives > 0);
    };

    std::vector<Atom> eight;
    for (Shape s : {Shape::triangle, Shape::square}) {
        for (Color c : {Color::red, Color::green}) {
            for (Size z : {Size::small, Size::large}) eight.push_back(Atom{s, c, z});
        }
    }
    run_against(eight, CompOp::stack, "house", test::nat_house);
    run_against(eight, CompOp::stack, "tower", test::nat_tower);
    run_against(eight, CompOp::side_by_side, "wagon", test::nat_wagon);

    std::vector<Atom> circly;
    for (Shape s : {Shape::circle, Shape::square}) {
        for (Color c : {Color::red, Color::green}) {
            for (Size z : {Size::small, Size::large}) circly.push_back(Atom{s, c, z});
        }
    }
    run_against(circly, CompOp::side_by_side, "car", test::nat_car);

    std::vector<Atom> lights;
    for (Color c : {Color::red, Color::yellow, Color::green, Color::blue}) {
        for (Size z : {Size::small, Size::large}) lights.push_back(Atom{Shape::circle, c, z});
    }
    run_against(lights, CompOp::stack, "traffic_light", test::nat_traffic_light);
}

TEST_CASE("operator taxonomy facts") {
    RuleSet rs = RuleSet::compile(kTowerRule);
    SymbolTree diag = tree("diag_ul_lr([circle_red_small, circle_red_small])");
    SymbolTree bar = tree("stack([circle_red_small, circle_red_small])");
    SymbolTree gridt = tree("grid([circle_red_small, circle_red_small])");
    RuleSet any = RuleSet::compile(
        "valid(C) :- extract_operator(C, OP), any_composition(OP).");
    RuleSet line = RuleSet::compile("valid(C) :- extract_operator(C, OP), line(OP).");
    CHECK(any.holds(diag));
    CHECK(any.holds(bar));
    CHECK_FALSE(any.holds(tree("in([circle_red_small])")));
    CHECK(line.holds(diag));
    CHECK(line.holds(bar));
    CHECK_FALSE(line.holds(gridt));
}
