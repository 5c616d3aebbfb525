#include "doctest.h"
#include "fixtures.hpp"

#include "ietpwi/errors.hpp"
#include "ietpwi/rauzy.hpp"

#include <cmath>
#include <random>

using namespace ietpwi;

TEST_CASE("single Rauzy steps on two intervals") {
    auto [a, sa] = rauzy_step(Iet(Permutation::parse_monodromy("2 1"), {0.6, 0.4}));
    CHECK(sa.type == 1);
    CHECK(a.lengths()[0] == doctest::Approx(0.2));
    CHECK(a.lengths()[1] == doctest::Approx(0.4));
    CHECK(a.perm().monodromy() == std::vector<int>{2, 1});

    auto [b, sb] = rauzy_step(Iet(Permutation::parse_monodromy("2 1"), {0.4, 0.6}));
    CHECK(sb.type == 0);
    CHECK(b.lengths()[0] == doctest::Approx(0.4));
    CHECK(b.lengths()[1] == doctest::Approx(0.2));

    try {
        rauzy_step(Iet(Permutation::parse_monodromy("2 1"), {0.5, 0.5}));
        FAIL("expected a tie");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RauzyUndefined);
    }
    CHECK_THROWS_AS(rauzy_type(Iet(Permutation::parse_monodromy("2 1 4 3"), {0.1, 0.2, 0.3, 0.4})), Error);
}

TEST_CASE("golden two-interval trace follows the Euclidean algorithm") {
    const auto t = rauzy_iterate(fixtures::golden2(), 10);
    REQUIRE(t.size() == 10);
    double a = fixtures::golden(), b = 1.0 - fixtures::golden();
    // Fibonacci numbers bound the cocycle entries.
    std::vector<long> fib{0, 1, 1};
    while (fib.size() < 16) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
    for (int n = 1; n <= 10; ++n) {
        if (a > b) a -= b;
        else b -= a;
        CHECK(t.state(n).lengths()[0] == doctest::Approx(a).epsilon(1e-9));
        CHECK(t.state(n).lengths()[1] == doctest::Approx(b).epsilon(1e-9));
        const IntMatrix& B = t.cocycle(n);
        std::set<long> entries;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) entries.insert(B(i, j).convert_to<long>());
        for (long e : entries) CHECK(std::find(fib.begin(), fib.end(), e) != fib.end());
        CHECK(B.determinant() == 1);
    }
    CHECK(rauzy_iterate(fixtures::golden2(), 0).cocycle(0) == IntMatrix::identity(2));
}

TEST_CASE("Zorich blocks") {
    const auto g = zorich_iterate(fixtures::golden2(), 8);
    for (int k = 0; k < g.size(); ++k) CHECK(g.accel[k] == 1);
    // floor(0.85 / 0.1) = 8 consecutive type-0 steps before the type changes.
    const auto z = zorich_iterate(Iet(Permutation::parse_monodromy("2 1"), {0.1, 0.85}), 1);
    CHECK(z.accel[0] == 8);
    CHECK(z.rauzy.steps[0].type == 0);
    CHECK(z.factors[0](0, 1) == 8);
    CHECK(zorich_iterate(fixtures::golden2(), 0).size() == 0);
}

TEST_CASE("cocycle equals brute-force visit counts") {
    CHECK(visit_counts_bruteforce(fixtures::golden2(), 0) == IntMatrix::identity(2));
    CHECK(visit_counts_bruteforce(fixtures::golden2(), 3) == rauzy_iterate(fixtures::golden2(), 3).cocycle(3));
    CHECK(visit_counts_bruteforce(fixtures::fig1(), 8) == rauzy_iterate(fixtures::fig1(), 8).cocycle(8));
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + trial % 4;
        const Iet f(fixtures::random_irreducible(d, rng), fixtures::random_simplex(d, rng));
        const auto t = rauzy_iterate(f, 10);
        for (int n = 0; n <= t.size(); n += 5) CHECK(visit_counts_bruteforce(f, n) == t.cocycle(n));
    }
}

TEST_CASE("length identity, nonnegativity and unimodularity along random traces") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + trial % 4;
        const Iet f(fixtures::random_irreducible(d, rng), fixtures::random_simplex(d, rng));
        const auto t = rauzy_iterate(f, 60);
        for (int n = 1; n <= t.size(); ++n) {
            const IntMatrix& B = t.cocycle(n);
            CHECK(B.nonnegative());
            CHECK(abs(B.determinant()) == 1);
            for (int a = 0; a < d; ++a) {
                double s = 0.0;
                for (int b = 0; b < d; ++b) s += B(b, a).convert_to<double>() * t.state(n).lengths()[b];
                CHECK(std::abs(s - f.lengths()[a]) <= 1e-12 * n * f.lengths()[a]);
            }
        }
    }
}

TEST_CASE("the path continues past double resolution without ties") {
    const auto t = rauzy_iterate(fixtures::fig1(), 800);
    CHECK_FALSE(t.stopped.has_value());
    CHECK(t.size() == 800);
    // The self-similar lengths return to the start of the loop every 11 steps early on.
    for (int k = 1; k <= 8; ++k) CHECK(t.state(11 * k).perm() == t.state(0).perm());
}

TEST_CASE("Rauzy classes against an independent enumeration") {
    const auto g2 = rauzy_class(Permutation::parse_monodromy("2 1"));
    CHECK(g2.vertices.size() == 1);
    CHECK(g2.edges.size() == 2);
    for (const auto& e : g2.edges) CHECK(e.from == e.to);
    CHECK(rauzy_class(Permutation::parse_monodromy("3 2 1")).vertices.size() == 3);
    CHECK(rauzy_class(Permutation::parse_monodromy("4 3 2 1")).vertices.size() == 7);
    for (const char* m : {"3 2 1", "4 3 2 1", "5 4 3 2 1", "4 2 5 1 3", "3 1 4 2"}) {
        const auto p = Permutation::parse_monodromy(m);
        CHECK(rauzy_class(p).vertices.size() == fixtures::bfs_class(p.monodromy()).size());
    }
    const std::string dot = rauzy_class(Permutation::parse_monodromy("4 3 2 1")).to_dot();
    CHECK(dot.find("digraph") != std::string::npos);
}

TEST_CASE("torus projection") {
    const Lift v = to_lift({kPi, kPi / 2});
    const auto id = torus_project(IntMatrix::identity(2), v);
    CHECK(std::abs(wrap_angle(id[0] - kPi)) < 1e-15);
    CHECK(id[1] == doctest::Approx(kPi / 2));
    IntMatrix B(2);
    B(0, 0) = 1, B(0, 1) = 1, B(1, 1) = 1;
    const auto p = torus_project(B, v);
    CHECK(p[0] == doctest::Approx(-kPi / 2));  // 3pi/2 represented in [-pi, pi)
    CHECK(p[1] == doctest::Approx(kPi / 2));
    const auto zero = torus_project(rauzy_iterate(fixtures::fig1(), 50).cocycle(50), to_lift({0, 0, 0, 0}));
    for (double x : zero) CHECK(x == 0.0);
}

TEST_CASE("JSON lines export starts with the identity level") {
    const std::string s = trace_to_jsonl(rauzy_iterate(fixtures::golden2(), 0));
    CHECK(s.find("\"B\":[[1,0],[0,1]]") != std::string::npos);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1);
}

TEST_CASE("path walker follows the trace and outlives double range") {
    const auto t = rauzy_iterate(fixtures::fig1(), 500);
    PathWalker w(fixtures::fig1());
    for (int n = 0; n < 500; ++n) {
        const InductionStep s = w.next();
        CHECK(s.type == t.steps[n].type);
        CHECK(s.winner == t.steps[n].winner);
        CHECK(s.loser == t.steps[n].loser);
    }
    // Two intervals shrink by about e^-1.19 per Gauss step; 2000 steps are far below 1e-308.
    PathWalker g(Iet(Permutation::parse_monodromy("2 1"), {std::exp(-1.0), 1.0 - std::exp(-1.0)}));
    for (int n = 0; n < 2000; ++n) CHECK_NOTHROW(g.next());
}
