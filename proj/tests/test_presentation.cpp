#include "cubulate/presentation.hpp"

#include <doctest.h>

#include <random>

using namespace cubulate;

namespace {

const char* P1_TEXT =
    "factor A free a\n"
    "factor B free b\n"
    "edge t A B\n"
    "relator (a b)^4\n";

const char* P2_TEXT =
    "factor L abelian x y\n"
    "factor B free b\n"
    "edge t L B\n"
    "relator (x t b t^-1)^4\n";

StaggeredComplex p1() { return parse_presentation(P1_TEXT); }
StaggeredComplex p2() { return parse_presentation(P2_TEXT); }

// Independent exponent oracle: try every divisor offset by rotation equality
// on the raw letter sequence.
int exponent_by_rotation(const std::vector<Letter>& s) {
    const std::size_t n = s.size();
    for (std::size_t m = n; m >= 2; --m) {
        if (n % m != 0) continue;
        std::size_t period = n / m;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = s[i] == s[(i + period) % n];
        if (ok) return static_cast<int>(m);
    }
    return 1;
}

} // namespace

TEST_CASE("dumbbell presentation parses with auto-inserted edge letters") {
    StaggeredComplex x = p1();
    REQUIRE(x.relators.size() == 1);
    const Relator& r = x.relators[0];
    CHECK(r.exponent == 4);
    CHECK(r.period.size() == 4);  // a t b t^-1
    CHECK(r.attaching.size() == 16);
    CHECK(r.min_edge == 0);
    CHECK(r.max_edge == 0);
    int ess = 0;
    for (Letter l : r.period.letters) ess += x.graph.is_essential(l) ? 1 : 0;
    CHECK(ess == 2);
}

TEST_CASE("parse errors carry positions and causes") {
    CHECK_THROWS_AS(parse_presentation("factor A free a\nfactor B free b\nrelator (a b)^1\n"),
                    ParseError);  // disconnected (no edge)
    // Two relators on a single edge violate the staggering.
    CHECK_THROWS_WITH_AS(
        parse_presentation("factor A free a\nfactor B free b\nedge t A B\n"
                           "relator (a b)^1\nrelator (a b a b)^1\n"),
        doctest::Contains("staggering"), ParseError);
    // A relator inside one factor carries no essential edge.
    CHECK_THROWS_WITH_AS(parse_presentation("factor A free a\nfactor B free b\nedge t A B\n"
                                            "relator (a a)^1\n"),
                         doctest::Contains("conjugate into a factor"), ParseError);
    CHECK_THROWS_AS(parse_presentation("factor A free a\nbogus directive\n"), ParseError);
    CHECK_THROWS_WITH_AS(parse_presentation("factor A free a\nedge t A A\nrelator (q)^1\n"),
                         doctest::Contains("unknown symbol"), ParseError);
}

TEST_CASE("cyclic reduction removes backtracking and normalizes syllables") {
    // a and b live in one rank-2 factor so t a t^-1 t b t^-1 is an edge path.
    StaggeredComplex x = parse_presentation(
        "factor C free c\nfactor D free a b\nedge t C D\n");
    Word w = parse_word(x, "t a t^-1 t b t^-1");
    Word n = normalize(x, w);
    // Backtracking through the trivial syllable is removed, the essential
    // letters around the now-nontrivial syllable survive.
    CHECK(word_to_string(x.graph, n) == "t a b t^-1");
    Word c = cyclic_reduce(x, w);
    CHECK(word_to_string(x.graph, c) == "a b");

    StaggeredComplex y = p1();
    Word aa = parse_word(y, "a a^-1");
    CHECK(normalize(y, aa).empty());
    Word tt = parse_word(y, "t t^-1");
    CHECK(normalize(y, tt).empty());

    StaggeredComplex z = p2();
    Word xyx = parse_word(z, "x y x^-1");
    Word nz = normalize(z, xyx);
    CHECK(word_to_string(z.graph, nz) == "y");
}

TEST_CASE("compute_exponent finds maximal periods") {
    StaggeredComplex x = p1();
    auto [p4, m4] = compute_exponent(x, parse_word(x, "(a b)^4"));
    CHECK(m4 == 4);
    CHECK(p4.size() == 4);

    auto [p1w, m1] = compute_exponent(x, parse_word(x, "a t b t^-1"));
    CHECK(m1 == 1);
    CHECK(p1w.size() == 4);

    // (a t b t^-1 a t b^2 t^-1)^2: the half rotation is the only period.
    Word w = parse_word(x, "(a t b t^-1 a t b b t^-1)^2");
    auto [p2w, m2] = compute_exponent(x, w);
    CHECK(m2 == 2);
    CHECK(p2w.size() == 9);
    Word c = cyclic_reduce(x, w);
    CHECK(exponent_by_rotation(c.letters) == 2);
}

TEST_CASE("staggering validation") {
    StaggeredComplex x = p1();
    CHECK(validate_staggering(x).empty());

    const char* two =
        "factor A free a\nfactor B free b\n"
        "edge s A B\nedge t A B\norder edges s t\n"
        "relator (a s b s^-1)^4\n"
        "relator (a t b t^-1)^4\n";
    StaggeredComplex y = parse_presentation(two);
    CHECK(validate_staggering(y).empty());
    CHECK(y.relators[0].min_edge == y.relators[0].max_edge);
}

TEST_CASE("min_exponent and the low-exponent flag") {
    StaggeredComplex x = p1();
    auto m = min_exponent(x);
    CHECK(m.value == 4);
    CHECK_FALSE(m.below_four);

    StaggeredComplex y = parse_presentation(
        "factor A free a\nfactor B free b\nedge t A B\nrelator (a b)^2\n");
    auto my = min_exponent(y);
    CHECK(my.value == 2);
    CHECK(my.below_four);

    StaggeredComplex p0 = parse_presentation("factor A free a\nfactor B free b\nedge t A B\n");
    CHECK_THROWS_AS(min_exponent(p0), Error);
}

TEST_CASE("parse -> serialize -> parse is the identity on normalized input") {
    for (const char* text : {P1_TEXT, P2_TEXT}) {
        StaggeredComplex x = parse_presentation(text);
        std::string s1 = serialize(x);
        StaggeredComplex y = parse_presentation(s1);
        CHECK(serialize(y) == s1);
    }
}

TEST_CASE("re-powering the period reproduces the attaching word") {
    StaggeredComplex x = p2();
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Relator& r = x.relators[0];
        Word w;
        int reps = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < reps; ++i)
            w.letters.insert(w.letters.end(), r.attaching.letters.begin(), r.attaching.letters.end());
        auto [p, m] = compute_exponent(x, w);
        CHECK(m % (r.exponent * reps) == 0);
        Word rebuilt;
        for (int i = 0; i < m; ++i)
            rebuilt.letters.insert(rebuilt.letters.end(), p.letters.begin(), p.letters.end());
        CHECK(cyclic_reduce(x, rebuilt) == cyclic_reduce(x, w));
    }
}
