#include "ietpwi/breaking.hpp"
#include "ietpwi/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ietpwi {

PLCurve PLCurve::identity(double ell) {
    PLCurve c;
    c.ell = ell;
    c.t = {0.0};
    c.z = {cplx(0.0, 0.0), cplx(ell, 0.0)};
    c.dir = {cplx(1.0, 0.0)};
    return c;
}

PLCurve PLCurve::from_vertices(const std::vector<cplx>& vertices) {
    if (vertices.size() < 2) throw Error(ErrorKind::InvalidInput, "a curve needs at least two vertices");
    PLCurve c;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
        const cplx step = vertices[i + 1] - vertices[i];
        const double len = std::abs(step);
        if (!(len > 0.0)) throw Error(ErrorKind::InvalidInput, "repeated vertex");
        c.t.push_back(s);
        c.dir.push_back(step / len);
        s += len;
    }
    c.z = vertices;
    c.ell = s;
    return c;
}

std::size_t PLCurve::segment_of(double x) const {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return 0;
    return static_cast<std::size_t>(it - t.begin()) - 1;
}

cplx PLCurve::operator()(double x) const {
    const std::size_t i = segment_of(x);
    return z[i] + (x - t[i]) * dir[i];
}

PLCurve PLCurve::restricted(double new_ell) const {
    if (!(new_ell > 0.0 && new_ell <= ell)) throw Error(ErrorKind::DomainMismatch, "restriction outside the domain");
    PLCurve c;
    c.ell = new_ell;
    for (std::size_t i = 0; i < t.size() && t[i] < new_ell; ++i) {
        c.t.push_back(t[i]);
        c.z.push_back(z[i]);
        c.dir.push_back(dir[i]);
    }
    c.z.push_back((*this)(new_ell));
    return c;
}

void check_pl_invariants(const PLCurve& c, double tol) {
    const std::size_t k = c.segments();
    if (k == 0 || c.t.size() != k || c.z.size() != k + 1 || c.t[0] != 0.0)
        throw Error(ErrorKind::NonUnitSpeed, "malformed curve storage");
    const double scale = std::max(1.0, c.ell);
    double arc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double len = c.seg_end(i) - c.seg_begin(i);
        if (!(len > 0.0)) throw Error(ErrorKind::NonUnitSpeed, "breakpoints not strictly increasing");
        if (std::abs(std::abs(c.dir[i]) - 1.0) > tol) throw Error(ErrorKind::NonUnitSpeed, "tangent is not a unit vector");
        const double chord = std::abs(c.z[i + 1] - c.z[i]);
        if (std::abs(chord - len) > tol * scale)
            throw Error(ErrorKind::NonUnitSpeed, "segment " + std::to_string(i) + " chord differs from its parameter length");
        if (std::abs(c.z[i] + len * c.dir[i] - c.z[i + 1]) > tol * scale)
            throw Error(ErrorKind::NonUnitSpeed, "segment " + std::to_string(i) + " is discontinuous");
        arc += chord;
    }
    if (std::abs(arc - c.ell) > tol * scale * static_cast<double>(k)) throw Error(ErrorKind::NonUnitSpeed, "arc length differs from domain length");
}

namespace {

// Nearest value among sorted breakpoints and ell, if within tol.
double snap(const PLCurve& c, double p, double tol) {
    if (std::abs(p - c.ell) <= tol) return c.ell;
    auto it = std::lower_bound(c.t.begin(), c.t.end(), p);
    double best = p, gap = tol;
    if (it != c.t.end() && std::abs(*it - p) <= gap) best = *it, gap = std::abs(*it - p);
    if (it != c.t.begin() && std::abs(*(it - 1) - p) <= gap) best = *(it - 1);
    return best;
}

// Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2.
struct DD {
    double hi = 0.0, lo = 0.0;
};

DD to_dd(const PathReal& x) {
    const double hi = x.convert_to<double>();
    return {hi, PathReal(x - hi).convert_to<double>()};
}

DD add(DD a, DD b) {
    const double s = a.hi + b.hi, bb = s - a.hi;
    const double e = (a.hi - (s - bb)) + (b.hi - bb) + a.lo + b.lo;
    const double hi = s + e;
    return {hi, e - (hi - s)};
}

}  // namespace

BreakResult breaking_operator(const PLCurve& c, double phi, const IntervalSeq& J) {
    const double ell = c.ell;
    const double tol = 1e-12 * ell;
    if (J.size() == 0) throw Error(ErrorKind::IntervalOutOfRange, "empty interval sequence");
    if (!(J.delta > 0.0)) throw Error(ErrorKind::IntervalOutOfRange, "interval width must be positive");
    for (std::size_t k = 0; k < J.size(); ++k) {
        if (J.y[k] < -tol || J.y[k] + J.delta > ell + tol) throw Error(ErrorKind::IntervalOutOfRange, "interval outside [0, ell)");
        if (k + 1 < J.size() && J.y[k] + J.delta > J.y[k + 1] + tol) throw Error(ErrorKind::IntervalOutOfRange, "intervals not ordered and disjoint");
    }
    check_pl_invariants(c, 1e-9);

    const std::size_t r = J.size();
    const double snap_tol = 1e-10 * ell;
    std::vector<double> ys(r), es(r);
    for (std::size_t k = 0; k < r; ++k) {
        ys[k] = snap(c, std::max(0.0, J.y[k]), snap_tol);
        if (k > 0 && std::abs(ys[k] - es[k - 1]) <= snap_tol) ys[k] = es[k - 1];
        es[k] = snap(c, std::min(ell, J.y[k] + J.delta), snap_tol);
    }

    const cplx w = std::polar(1.0, phi);
    const cplx one_minus_w = 1.0 - w;
    BreakResult out;
    out.eps_bar.resize(r);
    out.eps_under.resize(r);
    for (std::size_t k = 0; k < r; ++k) {
        const cplx prev = k == 0 ? cplx(0.0, 0.0) : out.eps_under[k - 1];
        out.eps_bar[k] = c(ys[k]) * one_minus_w + prev;
        if (k == 0) out.eps_under[k] = (c(ys[0]) - c(es[0])) * one_minus_w;
        else out.eps_under[k] = out.eps_bar[k] - c(es[k]) * one_minus_w;
    }

    // Merge the new breakpoints into the old ones.
    std::vector<double> fresh;
    fresh.reserve(2 * r);
    for (std::size_t k = 0; k < r; ++k) {
        fresh.push_back(ys[k]);
        if (es[k] < ell) fresh.push_back(es[k]);
    }
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());

    PLCurve& g = out.curve;
    g.ell = ell;
    g.t.reserve(c.t.size() + fresh.size());
    std::vector<cplx> old_z;
    old_z.reserve(c.t.size() + fresh.size() + 1);
    std::size_t i = 0, f = 0;
    while (i < c.t.size() || f < fresh.size()) {
        double x;
        if (f == fresh.size() || (i < c.t.size() && c.t[i] <= fresh[f])) {
            x = c.t[i];
            if (f < fresh.size() && fresh[f] == x) ++f;
            g.t.push_back(x);
            old_z.push_back(c.z[i]);
            g.dir.push_back(c.dir[i]);
            ++i;
        } else {
            x = fresh[f++];
            const std::size_t s = i - 1;  // fresh[f] > t[0] = 0, so i >= 1
            g.t.push_back(x);
            old_z.push_back(c.z[s] + (x - c.t[s]) * c.dir[s]);
            g.dir.push_back(c.dir[s]);
        }
    }
    old_z.push_back(c.z.back());

    // Three-branch formula at every vertex (the last vertex is x = ell).
    g.z.resize(old_z.size());
    long k = -1;
    for (std::size_t v = 0; v < old_z.size(); ++v) {
        const double x = v < g.t.size() ? g.t[v] : ell;
        while (k + 1 < static_cast<long>(r) && ys[static_cast<std::size_t>(k + 1)] <= x) ++k;
        const bool inside = k >= 0 && x < es[static_cast<std::size_t>(k)];
        if (k < 0) g.z[v] = old_z[v];
        else if (inside) g.z[v] = old_z[v] * w + out.eps_bar[static_cast<std::size_t>(k)];
        else g.z[v] = old_z[v] + out.eps_under[static_cast<std::size_t>(k)];
        if (v < g.dir.size() && inside) g.dir[v] *= w;
    }
    return out;
}

IntervalSeq breaking_intervals(const InductionTrace& trace, int n, long budget) {
    if (n < 1 || n > trace.size()) throw Error(ErrorKind::LevelMismatch, "level outside the induction trace");
    const Iet& f = trace.state(0);
    const int d = f.d();
    // The tower is built on the extended-precision lengths the path was computed from; the
    // rounded double IET drifts from them by ~1e-18 |B_R^(n)|.
    const auto prev = trace.lengths_at(n - 1);
    PathReal top_hp = 0, top_prev_hp = 0;
    for (const auto& l : prev) top_prev_hp += l;
    const InductionStep& step = trace.steps[static_cast<std::size_t>(n - 1)];
    top_hp = top_prev_hp - prev[static_cast<std::size_t>(step.loser)];
    const auto om = omega_matrix(f.perm());
    std::vector<DD> ups(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        PathReal u = 0;
        for (int b = 0; b < d; ++b) u += om[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * trace.origin_lengths[static_cast<std::size_t>(b)];
        ups[static_cast<std::size_t>(a)] = to_dd(u);
    }
    const double top_prev = top_prev_hp.convert_to<double>();
    const double top = top_hp.convert_to<double>();
    IntervalSeq J;
    J.delta = prev[static_cast<std::size_t>(step.loser)].convert_to<double>();
    DD y = to_dd(top_hp);
    long used = 0;
    for (;;) {
        J.y.push_back(y.hi);
        // A floor lies inside one atom, so its midpoint is located safely in double.
        const double mid = std::clamp(y.hi + 0.5 * J.delta, 0.0, std::nextafter(f.length(), 0.0));
        y = add(y, ups[static_cast<std::size_t>(f.locate(mid))]);
        if (++used > budget) throw Error(ErrorKind::BudgetExceeded, "return time exceeds the iteration budget");
        if (y.hi + 0.5 * J.delta < top_prev) break;
    }
    if (!(y.hi + 0.5 * J.delta < top)) throw std::logic_error("first return of the removed interval misses the induced interval");
    std::sort(J.y.begin(), J.y.end());

    // Each floor lies inside or outside every removed piece [|lambda^(m)|, |lambda^(m-1)|).
    const double tol = 1e-9 * f.length();
    for (double yk : J.y) {
        const double mid = yk + 0.5 * J.delta;
        for (int m = 1; m <= n; ++m) {
            const double lo = trace.state(m).length(), hi = trace.state(m - 1).length();
            if (mid >= lo && mid < hi && (yk < lo - tol || yk + J.delta > hi + tol))
                throw std::logic_error("tower floor straddles an induction boundary");
        }
    }
    return J;
}

std::vector<std::vector<double>> theta_sequence(const InductionTrace& trace, const Lift& theta, int N) {
    if (N < 0 || N > trace.size()) throw Error(ErrorKind::LevelMismatch, "theta sequence longer than the trace");
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(N + 1));
    for (int n = 0; n <= N; ++n) out.push_back(torus_project(trace.cocycle(n), theta));
    return out;
}

double breaking_angle(const InductionTrace& trace, const std::vector<std::vector<double>>& thetas, int n) {
    return thetas.at(static_cast<std::size_t>(n))[static_cast<std::size_t>(trace.beta(1, n))];
}

std::vector<PLCurve> breaking_sequence(const InductionTrace& trace, const std::vector<std::vector<double>>& thetas, int N) {
    if (N < 0 || N > trace.size() || N >= static_cast<int>(thetas.size()) + 1)
        throw Error(ErrorKind::LevelMismatch, "breaking sequence longer than the trace");
    std::vector<PLCurve> curves{PLCurve::identity(trace.state(0).length())};
    for (int n = 1; n <= N; ++n) {
        const IntervalSeq J = breaking_intervals(trace, n);
        curves.push_back(breaking_operator(curves.back(), breaking_angle(trace, thetas, n - 1), J).curve);
    }
    return curves;
}

double sup_distance(const PLCurve& a, const PLCurve& b) {
    if (std::abs(a.ell - b.ell) > 1e-12 * std::max(a.ell, b.ell)) throw Error(ErrorKind::DomainMismatch, "curves have different domains");
    double best = std::abs(a.z.back() - b.z.back());
    for (double x : a.t) best = std::max(best, std::abs(a(x) - b(x)));
    for (double x : b.t) best = std::max(best, std::abs(a(x) - b(x)));
    return best;
}

std::string curve_to_csv(const PLCurve& c) {
    std::ostringstream out;
    out.precision(17);
    out << "x,re,im\n";
    for (std::size_t i = 0; i < c.z.size(); ++i) {
        const double x = i < c.t.size() ? c.t[i] : c.ell;
        out << x << "," << c.z[i].real() << "," << c.z[i].imag() << "\n";
    }
    return out.str();
}

std::string curve_to_svg(const PLCurve& c, double stroke_width, int pixels) {
    double x0 = c.z[0].real(), x1 = x0, y0 = c.z[0].imag(), y1 = y0;
    for (const auto& p : c.z) {
        x0 = std::min(x0, p.real()), x1 = std::max(x1, p.real());
        y0 = std::min(y0, p.imag()), y1 = std::max(y1, p.imag());
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-300});
    const double margin = 0.05 * span;
    x0 -= margin, y0 -= margin, x1 += margin, y1 += margin;
    const double w = x1 - x0, h = y1 - y0;
    std::ostringstream out;
    out.precision(10);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels << "\" height=\""
        << static_cast<int>(pixels * h / w) << "\" viewBox=\"" << x0 << " " << -y1 << " " << w << " " << h << "\">\n";
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"" << stroke_width * span << "\" points=\"";
    for (const auto& p : c.z) out << p.real() << "," << -p.imag() << " ";
    out << "\"/>\n</svg>\n";
    return out.str();
}

std::string curve_to_json(const PLCurve& c) {
    nlohmann::json j;
    j["ell"] = c.ell;
    j["t"] = c.t;
    std::vector<double> re, im;
    for (const auto& p : c.z) re.push_back(p.real()), im.push_back(p.imag());
    j["re"] = re;
    j["im"] = im;
    return j.dump();
}

}  // namespace ietpwi
