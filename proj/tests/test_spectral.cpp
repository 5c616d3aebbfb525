#include "doctest.h"
#include "fixtures.hpp"

#include "ietpwi/breaking.hpp"
#include "ietpwi/errors.hpp"
#include "ietpwi/spectral.hpp"

#include <cmath>
#include <random>

using namespace ietpwi;

namespace {

// Rank of an integer matrix by exact fraction-free elimination.
int integer_rank(std::vector<std::vector<long long>> a) {
    const std::size_t rows = a.size(), cols = a.empty() ? 0 : a[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[p], a[r]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            const long long f = a[i][c], g = a[r][c];
            for (std::size_t j = 0; j < cols; ++j) a[i][j] = a[i][j] * g - a[r][j] * f;
            long long h = 0;
            for (long long x : a[i]) h = std::gcd(h, x);
            if (h > 1)
                for (long long& x : a[i]) x /= h;
        }
        ++r;
    }
    return static_cast<int>(r);
}

int genus_oracle(const Permutation& p) {
    const int d = p.d();
    std::vector<std::vector<long long>> om(static_cast<std::size_t>(d), std::vector<long long>(static_cast<std::size_t>(d)));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            om[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                (p.pos(1, b) < p.pos(1, a)) - (p.pos(0, b) < p.pos(0, a));
    return integer_rank(om) / 2;
}

double angle_to(const Lift& v, const std::vector<double>& w) {
    return principal_angle({v}, {to_lift(w)});
}

}  // namespace

TEST_CASE("genus agrees with an exact rank computation") {
    CHECK(genus(Permutation::parse_monodromy("2 1")) == 1);
    CHECK(genus(Permutation::parse_monodromy("3 2 1")) == 1);
    CHECK(genus(Permutation::parse_monodromy("4 3 2 1")) == 2);
    CHECK(genus(Permutation::parse_monodromy("5 4 3 2 1")) == 2);
    CHECK(genus(Permutation::parse_monodromy("6 5 4 3 2 1")) == 3);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        const Permutation p = fixtures::random_irreducible(2 + trial % 6, rng);
        CHECK(genus(p) == genus_oracle(p));
    }
}

TEST_CASE("invariant subspace basis is orthonormal and spans the image of Omega") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Permutation p = fixtures::random_irreducible(2 + trial % 5, rng);
        const auto h = h_pi_basis(p);
        CHECK(h.dim == 2 * genus(p));
        const int d = p.d();
        for (int i = 0; i < h.dim; ++i)
            for (int j = 0; j < h.dim; ++j) {
                double s = 0.0;
                for (int r = 0; r < d; ++r) s += h.basis[i][r] * h.basis[j][r];
                CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
            }
        const Iet f(p, fixtures::random_simplex(d, rng));
        std::vector<double> u = f.translation();
        for (int i = 0; i < h.dim; ++i) {
            double c = 0.0;
            for (int r = 0; r < d; ++r) c += h.basis[i][r] * f.translation()[r];
            for (int r = 0; r < d; ++r) u[r] -= c * h.basis[i][r];
        }
        for (double x : u) CHECK(std::abs(x) < 1e-12);
    }
}

TEST_CASE("two-interval exponents match the continued-fraction growth rate") {
    // For d = 2 a Zorich step is one Gauss-map step; q_n grows like exp(pi^2 / (12 ln 2) n).
    const double levy = kPi * kPi / (12.0 * std::log(2.0));
    const Iet f(Permutation::parse_monodromy("2 1"), {0.318309886183790, 0.681690113816210});
    const auto est = lyapunov_spectrum(f, 40000);
    REQUIRE(est.exponents.size() == 2);
    CHECK(std::abs(est.exponents[0] - levy) < 0.03);
    CHECK(std::abs(est.exponents[0] + est.exponents[1]) < 1e-9);
    CHECK(est.error_bars[0] < 0.02);
    CHECK(est.steps_used == 40000);
    CHECK(est.rauzy_steps > est.steps_used);
}

TEST_CASE("genus-one stable direction is the translation vector") {
    for (const Iet& f : {fixtures::golden2(),
                         Iet(Permutation::parse_monodromy("3 2 1"), {std::sqrt(2.0) - 1.0, 1.0 / kPi, 2.0 - std::sqrt(2.0) - 1.0 / kPi}),
                         Iet(Permutation::parse_monodromy("2 1"), {std::exp(-1.0), 1.0 - std::exp(-1.0)})}) {
        const StableFrame fr = stable_subspace(f, 200);
        REQUIRE(fr.g() == 1);
        CHECK(fr.gap_ratio > 1e10);
        CHECK(angle_to(fr.vectors[0], f.translation()) < 1e-6);
        try {
            sample_theta(fr, f, 0.5, 3);
            FAIL("expected ExhaustedResamples");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ExhaustedResamples);
        }
    }
}

TEST_CASE("stable frame of the symmetric four-interval class") {
    const Iet f = fixtures::fig1();
    const StableFrame fr = stable_subspace(f, 600);
    REQUIRE(fr.g() == 2);
    CHECK(fr.gap_ratio > 1e50);
    // Contains the translation vector, and agrees with a shorter run.
    CHECK(principal_angle(fr.vectors, {to_lift(f.translation())}) < 1e-8);
    const StableFrame shorter = stable_subspace(f, 300);
    CHECK(principal_angle(fr.vectors, shorter.vectors) < 1e-8);
    CHECK(principal_angle(fr.vectors, fr.vectors) < 1e-12);

    const auto trace = rauzy_iterate(f, 2000);
    for (const Lift& v : fr.vectors) {
        Lift small = v;
        for (auto& x : small) x *= 1e-3;
        const auto rep = summability_check(trace, small, 2000);
        CHECK(rep.decays);
        CHECK(rep.terms[2000] < 1e-2 * rep.terms[0]);
    }
    // A direction in H_pi orthogonal to the frame grows.
    const auto h = h_pi_basis(f.perm());
    std::vector<double> w = h.basis[0];
    for (const Lift& v : fr.vectors) {
        double c = 0.0;
        for (int r = 0; r < 4; ++r) c += w[r] * static_cast<double>(v[r]);
        for (int r = 0; r < 4; ++r) w[r] -= c * static_cast<double>(v[r]);
    }
    for (double& x : w) x *= 1e-6;
    const auto rep = summability_check(trace, to_lift(w), 2000);
    CHECK(rep.terms[2000] > 100.0 * rep.terms[0]);
}

TEST_CASE("sampled rotation vectors lie in the frame and have the requested size") {
    const auto& s = fixtures::fig1_sample();
    const StableFrame fr = stable_subspace(fixtures::fig1(), 600);
    CHECK(principal_angle(fr.vectors, {s.v}) < 1e-12);
    CHECK(s.delta == 0.5);
    CHECK(s.angle_to_upsilon >= 1e-8);
    CHECK(s.norm > 0.0);
    CHECK(s.norm <= 0.5 + 1e-12);
    for (std::size_t a = 0; a < 4; ++a) CHECK(s.theta[a] == doctest::Approx(std::remainder(static_cast<double>(s.v[a]), 2 * kPi)));
    const auto again = sample_theta(fr, fixtures::fig1(), 0.5, 1);
    CHECK(again.theta == s.theta);
}

TEST_CASE("summability of the zero vector") {
    const auto trace = rauzy_iterate(fixtures::fig1(), 50);
    const auto rep = summability_check(trace, to_lift({0, 0, 0, 0}), 50);
    CHECK(rep.decays);
    CHECK(rep.sum == 0.0);
    CHECK(rep.terms.size() == 51);
}

TEST_CASE("principal angle") {
    const Lift e1 = to_lift({1, 0, 0}), e2 = to_lift({0, 1, 0}), e3 = to_lift({0, 0, 1});
    CHECK(principal_angle({e1}, {e2}) == doctest::Approx(kPi / 2));
    CHECK(principal_angle({e1, e2}, {to_lift({1, 1, 0})}) < 1e-15);
    CHECK(principal_angle({e1}, {to_lift({1, 1, 0})}) == doctest::Approx(kPi / 4));
    CHECK(principal_angle({e1, e2}, {e3}) == doctest::Approx(kPi / 2));
}

TEST_CASE("long genus-one frame runs past double underflow") {
    const Iet f(Permutation::parse_monodromy("2 1"), {std::exp(-1.0), 1.0 - std::exp(-1.0)});
    const StableFrame fr = stable_subspace(f, 600);
    CHECK(fr.g() == 1);
    CHECK(fr.zorich_steps >= 500);
    CHECK(fr.zorich_steps <= 600);
    CHECK(angle_to(fr.vectors[0], f.translation()) < 1e-12);
}
