#pragma once

#include "ietpwi/numeric.hpp"
#include "ietpwi/rauzy.hpp"

#include <string>
#include <vector>

namespace ietpwi {

// Unit-speed piecewise-linear curve on [0, ell). Segment i runs over [t[i], t[i+1])
// with t[K] = ell, from z[i] to z[i+1] in direction dir[i].
struct PLCurve {
    double ell = 0.0;
    std::vector<double> t;
    std::vector<cplx> z;
    std::vector<cplx> dir;

    static PLCurve identity(double ell);
    // Parametrized by cumulative chord length.
    static PLCurve from_vertices(const std::vector<cplx>& vertices);

    std::size_t segments() const { return dir.size(); }
    double seg_begin(std::size_t i) const { return t[i]; }
    double seg_end(std::size_t i) const { return i + 1 < t.size() ? t[i + 1] : ell; }
    std::size_t segment_of(double x) const;
    // Defined on [0, ell]; at ell by continuity.
    cplx operator()(double x) const;
    PLCurve restricted(double new_ell) const;
};

// Throws NonUnitSpeed if some chord differs from its parameter length by more than tol,
// or if the arc length differs from ell by more than tol per segment.
void check_pl_invariants(const PLCurve& curve, double tol = 1e-12);

struct IntervalSeq {
    std::vector<double> y;
    double delta = 0.0;
    std::size_t size() const { return y.size(); }
};

struct BreakResult {
    PLCurve curve;
    std::vector<cplx> eps_bar;
    std::vector<cplx> eps_under;
};

BreakResult breaking_operator(const PLCurve& curve, double phi, const IntervalSeq& J);

IntervalSeq breaking_intervals(const InductionTrace& trace, int n, long budget = 10000000);

// theta^(n), n = 0..N, as representatives in [-pi, pi).
std::vector<std::vector<double>> theta_sequence(const InductionTrace& trace, const Lift& theta, int N);

// Angle used to build gamma^(n+1) from gamma^(n): theta^(n)_{beta_1,n}.
double breaking_angle(const InductionTrace& trace, const std::vector<std::vector<double>>& thetas, int n);

std::vector<PLCurve> breaking_sequence(const InductionTrace& trace, const std::vector<std::vector<double>>& thetas, int N);

double sup_distance(const PLCurve& a, const PLCurve& b);

std::string curve_to_csv(const PLCurve& curve);
std::string curve_to_svg(const PLCurve& curve, double stroke_width = 0.002, int pixels = 800);
std::string curve_to_json(const PLCurve& curve);

}  // namespace ietpwi
