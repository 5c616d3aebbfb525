#include "doctest.h"
#include "fixtures.hpp"

#include "ietpwi/errors.hpp"
#include "ietpwi/iet_core.hpp"

#include <random>

using namespace ietpwi;

TEST_CASE("two-interval translation vector and endpoints") {
    const Iet f(Permutation::parse_monodromy("2 1"), {0.6, 0.4});
    CHECK(f.translation()[0] == doctest::Approx(0.4));
    CHECK(f.translation()[1] == doctest::Approx(-0.6));
    CHECK(f.endpoints(0)[0] == 0.0);
    CHECK(f.endpoints(0)[1] == doctest::Approx(0.6));
    CHECK(f.endpoints(0)[2] == doctest::Approx(1.0));
    CHECK(f.apply(0.3) == doctest::Approx(0.7));
    CHECK(f.apply(0.6) == doctest::Approx(0.0));
}

TEST_CASE("identity permutation gives the identity map") {
    const Iet f(Permutation({1, 2}, {1, 2}), {0.6, 0.4});
    CHECK(f.translation()[0] == 0.0);
    CHECK(f.translation()[1] == 0.0);
    for (double x : {0.0, 0.2, 0.6, 0.99}) CHECK(f.apply(x) == x);
    CHECK_FALSE(f.perm().irreducible());
}

TEST_CASE("omega matrix of the symmetric permutations is antisymmetric with the expected entries") {
    const auto om = omega_matrix(Permutation::parse_monodromy("4 3 2 1"));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            CHECK(om[a][b] == -om[b][a]);
            CHECK(om[a][b] == (a < b ? 1 : (a > b ? -1 : 0)));
        }
}

TEST_CASE("irreducibility") {
    CHECK(Permutation::parse_monodromy("2 1").irreducible());
    CHECK_FALSE(Permutation::parse_monodromy("2 1 4 3").irreducible());
    CHECK(Permutation::parse_monodromy("4 3 2 1").irreducible());
    CHECK(Permutation::parse_monodromy("3 1 4 2").irreducible());
}

TEST_CASE("symmetric d=4 lengths build with unit total") {
    const Iet f = fixtures::fig1();
    CHECK(f.length() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(Iet(Permutation::parse_monodromy("2 1"), {0.5, 0.0}), Error);
    try {
        Iet(Permutation::parse_monodromy("2 1"), {0.5, -1.0});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonPositiveLength);
    }
    const Iet f(Permutation::parse_monodromy("2 1"), {0.6, 0.4});
    try {
        f.apply(1.0);
        FAIL("expected OutOfDomain");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutOfDomain);
    }
}

TEST_CASE("apply and apply_inverse are mutually inverse bijections") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 4;
        const Iet f(fixtures::random_irreducible(d, rng), fixtures::random_simplex(d, rng));
        std::uniform_real_distribution<double> u(0.0, f.length());
        for (int k = 0; k < 100; ++k) {
            const double x = u(rng);
            CHECK(f.apply_inverse(f.apply(x)) == doctest::Approx(x).epsilon(1e-12));
            // Translation is constant on each interval.
            const int a = f.locate(x);
            CHECK(f.apply(x) - x == doctest::Approx(f.translation()[a]).epsilon(1e-12));
        }
    }
}

TEST_CASE("canonical relabeling keeps the monodromy") {
    const Permutation p = Permutation::from_rows({2, 0, 1}, {1, 2, 0});
    CHECK(p.canonical().monodromy() == p.monodromy());
    CHECK(p.canonical().row(0) == std::vector<int>{0, 1, 2});
}

TEST_CASE("finite-depth IDOC check") {
    // Rational lengths: an endpoint orbit hits another endpoint.
    CHECK_FALSE(check_idoc_depth(Iet(Permutation::parse_monodromy("2 1"), {0.6, 0.4}), 10));
    CHECK(check_idoc_depth(fixtures::golden2(), 50));
    // Planted coincidence: 0 -> 0.25 -> 0.5 -> 0.75, the interior endpoint, at the third iterate.
    const Iet planted(Permutation::parse_monodromy("2 1"), {0.75, 0.25});
    CHECK(check_idoc_depth(planted, 2));
    CHECK_FALSE(check_idoc_depth(planted, 3));
}
