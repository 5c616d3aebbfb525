#include "doctest.h"
#include "fixtures.hpp"

#include "ietpwi/errors.hpp"
#include "ietpwi/pwi.hpp"

#include <cmath>
#include <random>

using namespace ietpwi;

namespace {

struct Setup {
    Iet f;
    InductionTrace trace;
    std::vector<std::vector<double>> thetas;
    std::vector<PLCurve> curves;
};

// A rotation vector with no special structure; the identities below hold for any theta.
Setup make_setup(int n, std::vector<double> theta = {0.21, -0.13, 0.08, 0.05}) {
    Setup s;
    s.f = fixtures::fig1();
    s.trace = rauzy_iterate(s.f, n + 5);
    s.thetas = theta_sequence(s.trace, to_lift(theta), n + 5);
    s.curves = breaking_sequence(s.trace, s.thetas, n);
    return s;
}

}  // namespace

TEST_CASE("planar isometry algebra") {
    const PlanarIsometry f{0.7, cplx(1, 2), cplx(-1, 0.5)}, g{-1.1, cplx(0.3, 0), cplx(0, 1)};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 50; ++k) {
        const cplx z(u(rng), u(rng)), w(u(rng), u(rng));
        CHECK(std::abs(compose(f, g)(z) - f(g(z))) < 1e-13);
        CHECK(std::abs(f.inverse()(f(z)) - z) < 1e-13);
        CHECK(std::abs(std::abs(f(z) - f(w)) - std::abs(z - w)) < 1e-12);
    }
    CHECK(std::abs(f(f.a) - f.b) < 1e-15);
    CHECK(std::abs(f.offset() - (f(cplx(0, 0)))) < 1e-15);
}

TEST_CASE("zero rotation: endpoint images and hat maps reduce to the interval exchange") {
    Setup s = make_setup(8, {0, 0, 0, 0});
    for (int m = 0; m <= 8; ++m) {
        const auto ei = endpoint_images(s.curves[8], 8, s.trace, m, s.thetas);
        const Iet& fm = s.trace.state(m);
        for (int j = 0; j <= 4; ++j) {
            CHECK(std::abs(ei.gamma0[j] - fm.endpoints(0)[j]) < 1e-14);
            CHECK(std::abs(ei.xi[j] - fm.endpoints(1)[j]) < 1e-14);
        }
        const auto T = hat_maps(ei, s.trace, s.thetas[m]);
        std::mt19937_64 rng(m);
        std::uniform_real_distribution<double> u(0.0, fm.length());
        for (int k = 0; k < 20; ++k) {
            const double x = u(rng);
            const cplx z(x, 0.37);
            CHECK(std::abs(T[fm.locate(x)](z) - cplx(fm.apply(x), 0.37)) < 1e-13);
        }
    }
}

TEST_CASE("endpoint image chain starts at the curve endpoint") {
    Setup s = make_setup(12);
    const auto ei = endpoint_images(s.curves[12], 12, s.trace, 5, s.thetas);
    CHECK(ei.xi[4] == s.curves[12](s.trace.state(5).endpoints(0)[4]));
}

TEST_CASE("rearranged curve is continuous: consecutive hat images meet the xi chain") {
    Setup s = make_setup(10);
    for (int m = 0; m <= 10; ++m) {
        const auto ei = endpoint_images(s.curves[10], 10, s.trace, m, s.thetas);
        const auto T = hat_maps(ei, s.trace, s.thetas[m]);
        const Permutation& p = s.trace.state(m).perm();
        for (int j = 0; j < 4; ++j) {
            const int a = p.sym(1, j + 1);
            CHECK(std::abs(T[a](ei.gamma0[p.pos(0, a) - 1]) - ei.xi[j]) < 1e-10);
        }
    }
}

TEST_CASE("inductive maps agree with hat maps") {
    Setup s = make_setup(15);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    std::vector<cplx> probes;
    for (int k = 0; k < 50; ++k) probes.emplace_back(u(rng), u(rng));
    for (auto [n, m] : std::vector<std::pair<int, int>>{{15, 7}, {10, 10}, {12, 0}, {15, 14}}) {
        const auto T = inductive_maps(s.trace, s.curves[n], n, m, s.thetas);
        const auto H = hat_maps(endpoint_images(s.curves[n], n, s.trace, m, s.thetas), s.trace, s.thetas[m]);
        for (int a = 0; a < 4; ++a) CHECK(isometry_distance(T[a], H[a], probes) < 1e-9);
    }
    CHECK_THROWS_AS(inductive_maps(s.trace, s.curves[5], 5, 6, s.thetas), Error);
}

TEST_CASE("adapted PWI of the identity curve is the interval exchange") {
    const Iet f = fixtures::fig1();
    const AdaptedPWI pwi = adapted_pwi(PLCurve::identity(f.length()), f, {0, 0, 0, 0});
    double x = 0.1234;
    cplx z(x, 0.0);
    for (int k = 0; k < 30; ++k) {
        z = pwi.apply(z);
        x = f.apply(x);
        CHECK(std::abs(z - cplx(x, 0.0)) < 1e-12);
    }
    CHECK_THROWS_AS(adapted_pwi(PLCurve::identity(2.0), f, {0, 0, 0, 0}), Error);
    try {
        pwi.classify(cplx(0.5, 0.5));
        FAIL("expected UnclassifiablePoint");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnclassifiablePoint);
    }
}

TEST_CASE("adapted PWI maps carry the prescribed angles and are isometries") {
    Setup s = make_setup(20);
    const std::vector<double> paper_theta{4.85, 0.92, 1.31, 1.28};
    const AdaptedPWI pwi = adapted_pwi(s.curves[20], s.f, paper_theta);
    for (int a = 0; a < 4; ++a) {
        CHECK(std::abs(wrap_angle(pwi.maps[a].angle - paper_theta[a])) < 1e-14);
        CHECK(std::abs(std::abs(pwi.maps[a].rotation()) - 1.0) < 1e-15);
    }
    const std::string j = pwi.to_json();
    CHECK(j.find("\"maps\"") != std::string::npos);
}

TEST_CASE("orbits of curve points stay on the limit-curve proxy and follow the IET itinerary") {
    Setup s = make_setup(45, fixtures::fig1_sample().theta);
    const AdaptedPWI pwi = adapted_pwi(s.curves[45], s.f, s.thetas[0]);
    for (double x0 : {0.05, 0.3141, 0.77}) {
        const auto orbit = iterate(pwi, s.curves[45](x0), 25);
        double x = x0;
        for (const auto& p : orbit) {
            CHECK(p.atom == s.f.locate(x));
            CHECK(std::abs(p.z - s.curves[45](x)) < 1e-5);
            x = s.f.apply(x);
        }
    }
    CHECK(orbit_to_csv(iterate(pwi, s.curves[45](0.1), 2)).rfind("step,re,im,atom\n", 0) == 0);
}

TEST_CASE("pivot of a rotation atom is a fixed point") {
    const PlanarIsometry r{0.9, cplx(0.4, 0.1), cplx(0.4, 0.1)};
    cplx z = r.a;
    for (int k = 0; k < 10; ++k) z = r(z);
    CHECK(std::abs(z - r.a) < 1e-15);
}

TEST_CASE("polygonal atoms are validated") {
    const Iet f(Permutation::parse_monodromy("2 1"), {0.6, 0.4});
    const PLCurve id = PLCurve::identity(1.0);
    const Polygon a{{0, -1}, {0.6, -1}, {0.6, 1}, {0, 1}}, b{{0.6, -1}, {1, -1}, {1, 1}, {0.6, 1}};
    const AdaptedPWI ok = adapted_pwi(id, f, {0, 0}, {a, b});
    CHECK(ok.classify(cplx(0.3, 0.5)) == 0);
    CHECK(std::abs(ok.apply(cplx(0.3, 0.5)) - cplx(0.7, 0.5)) < 1e-15);
    const Polygon wide{{0, -1}, {0.8, -1}, {0.8, 1}, {0, 1}};
    try {
        adapted_pwi(id, f, {0, 0}, {wide, b});
        FAIL("expected AtomsOverlap");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AtomsOverlap);
    }
    const Polygon off{{0, 0.5}, {0.6, 0.5}, {0.6, 1}, {0, 1}};
    try {
        adapted_pwi(id, f, {0, 0}, {off, b});
        FAIL("expected AtomMissesCurve");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AtomMissesCurve);
    }
}

TEST_CASE("induced PWI") {
    Setup s = make_setup(50, fixtures::fig1_sample().theta);
    const AdaptedPWI pwi = adapted_pwi(s.curves[50], s.f, s.thetas[0]);
    const AdaptedPWI same = induced_pwi(pwi, s.trace, 0);
    for (int a = 0; a < 4; ++a) CHECK(isometry_distance(same.maps[a], pwi.maps[a], {cplx(0.2, 0.1), cplx(-1, 3)}) < 1e-15);

    for (int n : {1, 3, 6, 10}) {
        const AdaptedPWI ind = induced_pwi(pwi, s.trace, n);
        // Its rotation vector is theta^(n).
        for (int a = 0; a < 4; ++a) CHECK(std::abs(wrap_angle(ind.theta[a] - s.thetas[n][a])) < 1e-10);
        // The restricted curve conjugates the induced IET into it, up to the proxy error.
        const Iet& level = s.trace.state(n);
        std::mt19937_64 rng(n);
        std::uniform_real_distribution<double> u(0.0, level.length());
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double x = u(rng);
            worst = std::max(worst, std::abs(ind.apply(ind.curve(x)) - ind.curve(level.apply(x))));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("first induced map of a type-0 step composes the return word") {
    // d = 2 with lambda_A < lambda_B: the first step has type 0, B wins and A returns through B.
    const Iet f(Permutation::parse_monodromy("2 1"), {0.3, 0.7});
    const auto t = rauzy_iterate(f, 3);
    REQUIRE(t.steps[0].type == 0);
    const AdaptedPWI pwi = adapted_pwi(PLCurve::identity(1.0), f, {0.4, -0.25});
    const AdaptedPWI ind = induced_pwi(pwi, t, 1);
    const int b0 = t.beta(0, 0), b1 = t.beta(1, 0);
    const PlanarIsometry expect = compose(pwi.maps[b0], pwi.maps[b1]);
    CHECK(isometry_distance(ind.maps[b1], expect, {cplx(0, 0), cplx(1, 1), cplx(-2, 0.5)}) < 1e-15);
    CHECK(isometry_distance(ind.maps[b0], pwi.maps[b0], {cplx(0, 0), cplx(1, 1)}) < 1e-15);
}
