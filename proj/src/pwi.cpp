#include "ietpwi/pwi.hpp"
#include "ietpwi/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ietpwi {

PlanarIsometry compose(const PlanarIsometry& f, const PlanarIsometry& g) {
    return {wrap_angle(f.angle + g.angle), g.a, f.rotation() * (g.b - f.a) + f.b};
}

double isometry_distance(const PlanarIsometry& f, const PlanarIsometry& g, const std::vector<cplx>& probes) {
    double d = 0.0;
    for (const auto& z : probes) d = std::max(d, std::abs(f(z) - g(z)));
    return d;
}

EndpointImages endpoint_images(const PLCurve& curve_n, int n, const InductionTrace& trace, int m,
                               const std::vector<std::vector<double>>& thetas) {
    if (m < 0 || m > n || m > trace.size() || m >= static_cast<int>(thetas.size()))
        throw Error(ErrorKind::LevelMismatch, "endpoint images need m <= n within the trace");
    const Iet& s = trace.state(m);
    const Permutation& p = s.perm();
    const int d = s.d();
    const auto& th = thetas[static_cast<std::size_t>(m)];
    EndpointImages ei;
    ei.n = n;
    ei.m = m;
    for (int j = 0; j <= d; ++j) {
        ei.gamma0.push_back(curve_n(s.endpoints(0)[static_cast<std::size_t>(j)]));
        ei.gamma1.push_back(curve_n(s.endpoints(1)[static_cast<std::size_t>(j)]));
    }
    ei.xi.assign(static_cast<std::size_t>(d + 1), cplx(0.0, 0.0));
    ei.xi[static_cast<std::size_t>(d)] = ei.gamma0[static_cast<std::size_t>(d)];
    for (int j = d - 1; j >= 0; --j) {
        const int s1 = p.sym(1, j + 1);
        const int k = p.pos(0, s1);  // pi^(j+1)
        ei.xi[static_cast<std::size_t>(j)] =
            std::polar(1.0, th[static_cast<std::size_t>(s1)]) *
                (ei.gamma0[static_cast<std::size_t>(k - 1)] - ei.gamma0[static_cast<std::size_t>(k)]) +
            ei.xi[static_cast<std::size_t>(j + 1)];
    }
    return ei;
}

std::vector<PlanarIsometry> hat_maps(const EndpointImages& ei, const InductionTrace& trace, const std::vector<double>& theta_m) {
    const Permutation& p = trace.state(ei.m).perm();
    std::vector<PlanarIsometry> maps;
    for (int a = 0; a < p.d(); ++a)
        maps.push_back({theta_m[static_cast<std::size_t>(a)], ei.gamma0[static_cast<std::size_t>(p.pos(0, a))],
                        ei.xi[static_cast<std::size_t>(p.pos(1, a))]});
    return maps;
}

std::vector<PlanarIsometry> inductive_maps(const InductionTrace& trace, const PLCurve& curve_n, int n, int m,
                                           const std::vector<std::vector<double>>& thetas) {
    if (m < 0 || m > n) throw Error(ErrorKind::LevelMismatch, "inductive maps need m <= n");
    auto T = hat_maps(endpoint_images(curve_n, n, trace, n, thetas), trace, thetas[static_cast<std::size_t>(n)]);
    for (int k = n; k > m; --k) {
        const int b0 = trace.beta(0, k - 1), b1 = trace.beta(1, k - 1);
        auto& t0 = T[static_cast<std::size_t>(b0)];
        auto& t1 = T[static_cast<std::size_t>(b1)];
        if (trace.steps[static_cast<std::size_t>(k - 1)].type == 0) t1 = compose(t0.inverse(), t1);
        else t0 = compose(t0, t1.inverse());
    }
    return T;
}

std::pair<double, double> nearest_parameter(const PLCurve& c, cplx z) {
    double best_x = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.segments(); ++i) {
        const double len = c.seg_end(i) - c.seg_begin(i);
        const double s = std::clamp(((z - c.z[i]) * std::conj(c.dir[i])).real(), 0.0, len);
        const double dist = std::abs(c.z[i] + s * c.dir[i] - z);
        if (dist < best_d) best_d = dist, best_x = c.seg_begin(i) + s;
    }
    return {best_x, best_d};
}

SegmentGrid::SegmentGrid(const PLCurve& c, double radius) : radius_(radius) {
    double xa = c.z[0].real(), xb = xa, ya = c.z[0].imag(), yb = ya;
    for (const auto& p : c.z) {
        xa = std::min(xa, p.real()), xb = std::max(xb, p.real());
        ya = std::min(ya, p.imag()), yb = std::max(yb, p.imag());
    }
    const double k = static_cast<double>(std::max<std::size_t>(c.segments(), 1));
    const double span = std::max({xb - xa, yb - ya, radius, 1e-300});
    // Cells no smaller than the search radius, or every segment lands in many cells.
    h_ = std::max({std::sqrt(std::max(xb - xa, span * 1e-3) * std::max(yb - ya, span * 1e-3) / (2.0 * k)), span * 1e-6, radius});
    x0_ = xa - radius - h_;
    y0_ = ya - radius - h_;
    nx_ = static_cast<long>((xb - xa + 2 * radius) / h_) + 3;
    ny_ = static_cast<long>((yb - ya + 2 * radius) / h_) + 3;
    cells_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t i = 0; i < c.segments(); ++i) {
        const cplx a = c.z[i], b = c.z[i + 1];
        const long ia = static_cast<long>((std::min(a.real(), b.real()) - radius - x0_) / h_);
        const long ib = static_cast<long>((std::max(a.real(), b.real()) + radius - x0_) / h_);
        const long ja = static_cast<long>((std::min(a.imag(), b.imag()) - radius - y0_) / h_);
        const long jb = static_cast<long>((std::max(a.imag(), b.imag()) + radius - y0_) / h_);
        for (long u = std::max(ia, 0L); u <= std::min(ib, nx_ - 1); ++u)
            for (long v = std::max(ja, 0L); v <= std::min(jb, ny_ - 1); ++v)
                cells_[static_cast<std::size_t>(u * ny_ + v)].push_back(i);
    }
}

std::optional<std::pair<double, double>> SegmentGrid::nearest(const PLCurve& c, cplx z) const {
    const double fx = (z.real() - x0_) / h_, fy = (z.imag() - y0_) / h_;
    if (!(fx >= 0 && fy >= 0 && fx < static_cast<double>(nx_) && fy < static_cast<double>(ny_))) return std::nullopt;
    const auto& cell = cells_[static_cast<std::size_t>(static_cast<long>(fx) * ny_ + static_cast<long>(fy))];
    std::optional<std::pair<double, double>> best;
    for (std::size_t i : cell) {
        const double len = c.seg_end(i) - c.seg_begin(i);
        const double s = std::clamp(((z - c.z[i]) * std::conj(c.dir[i])).real(), 0.0, len);
        const double dist = std::abs(c.z[i] + s * c.dir[i] - z);
        if (dist <= radius_ && (!best || dist < best->second)) best = std::make_pair(c.seg_begin(i) + s, dist);
    }
    return best;
}

namespace {

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Counter-clockwise orientation assumed after normalization.
Polygon ccw(Polygon p) {
    double area = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) area += cross(p[i], p[(i + 1) % p.size()]);
    if (area < 0) std::reverse(p.begin(), p.end());
    return p;
}

bool inside_convex(const Polygon& p, cplx z, double tol) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        const cplx e = p[(i + 1) % p.size()] - p[i];
        if (cross(e, z - p[i]) < -tol * std::abs(e)) return false;
    }
    return true;
}

// Separating axis test for interiors of convex polygons.
bool interiors_overlap(const Polygon& a, const Polygon& b, double tol) {
    for (const Polygon* p : {&a, &b})
        for (std::size_t i = 0; i < p->size(); ++i) {
            const cplx e = (*p)[(i + 1) % p->size()] - (*p)[i];
            const cplx nrm = cplx(e.imag(), -e.real()) / std::abs(e);
            double lo_a = 1e300, hi_a = -1e300, lo_b = 1e300, hi_b = -1e300;
            for (const auto& v : a) {
                const double s = (v * std::conj(nrm)).real();
                lo_a = std::min(lo_a, s), hi_a = std::max(hi_a, s);
            }
            for (const auto& v : b) {
                const double s = (v * std::conj(nrm)).real();
                lo_b = std::min(lo_b, s), hi_b = std::max(hi_b, s);
            }
            if (hi_a <= lo_b + tol || hi_b <= lo_a + tol) return false;
        }
    return true;
}

}  // namespace

int AdaptedPWI::classify(cplx z) const {
    const double ell = curve.ell;
    if (!atoms.empty()) {
        int hit = -1;
        for (std::size_t a = 0; a < atoms.size(); ++a)
            if (inside_convex(atoms[a], z, 1e-12 * ell)) {
                if (hit >= 0) throw Error(ErrorKind::UnclassifiablePoint, "point on a shared atom boundary");
                hit = static_cast<int>(a);
            }
        if (hit < 0) throw Error(ErrorKind::UnclassifiablePoint, "point outside all atoms");
        return hit;
    }
    double x = 0.0;
    if (grid) {
        const auto hit = grid->nearest(curve, z);
        if (!hit) throw Error(ErrorKind::UnclassifiablePoint, "point is not on the curve");
        x = hit->first;
    } else {
        const auto [px, dist] = nearest_parameter(curve, z);
        if (dist > classify_tol) throw Error(ErrorKind::UnclassifiablePoint, "point is not on the curve");
        x = px;
    }
    return iet.locate(std::min(x, std::nextafter(ell, 0.0)));
}

std::string AdaptedPWI::to_json() const {
    nlohmann::json j;
    j["theta"] = theta;
    j["maps"] = nlohmann::json::array();
    for (std::size_t a = 0; a < maps.size(); ++a)
        j["maps"].push_back({{"symbol", symbol_name(static_cast<int>(a))},
                             {"angle", maps[a].angle},
                             {"a", {maps[a].a.real(), maps[a].a.imag()}},
                             {"b", {maps[a].b.real(), maps[a].b.imag()}}});
    return j.dump(2);
}

AdaptedPWI adapted_pwi(const PLCurve& limit_curve, const Iet& iet, const std::vector<double>& theta,
                       const std::vector<Polygon>& atoms) {
    if (std::abs(limit_curve.ell - iet.length()) > 1e-12 * iet.length())
        throw Error(ErrorKind::DomainMismatch, "curve domain differs from |lambda|");
    if (static_cast<int>(theta.size()) != iet.d()) throw Error(ErrorKind::InvalidInput, "rotation vector has the wrong size");
    AdaptedPWI pwi;
    pwi.iet = iet;
    pwi.curve = limit_curve;
    pwi.classify_tol = 1e-6 * iet.length();
    pwi.grid = std::make_shared<SegmentGrid>(limit_curve, pwi.classify_tol);
    for (int a = 0; a < iet.d(); ++a) {
        pwi.theta.push_back(wrap_angle(theta[static_cast<std::size_t>(a)]));
        const double left = iet.left(a);
        pwi.maps.push_back({pwi.theta.back(), limit_curve(left), limit_curve(iet.apply(left))});
    }
    if (!atoms.empty()) {
        if (static_cast<int>(atoms.size()) != iet.d()) throw Error(ErrorKind::InvalidInput, "need one atom per symbol");
        for (const auto& p : atoms) pwi.atoms.push_back(ccw(p));
        const double tol = 1e-12 * iet.length();
        for (std::size_t a = 0; a < pwi.atoms.size(); ++a)
            for (std::size_t b = a + 1; b < pwi.atoms.size(); ++b)
                if (interiors_overlap(pwi.atoms[a], pwi.atoms[b], tol))
                    throw Error(ErrorKind::AtomsOverlap, "atoms " + symbol_name(static_cast<int>(a)) + " and " + symbol_name(static_cast<int>(b)) + " overlap");
        for (int a = 0; a < iet.d(); ++a) {
            const double lo = iet.left(a), hi = iet.right(a);
            for (int s = 0; s <= 20; ++s) {
                const double x = lo + (hi - lo) * (1e-9 + (1 - 2e-9) * s / 20.0);
                if (!inside_convex(pwi.atoms[static_cast<std::size_t>(a)], limit_curve(x), tol))
                    throw Error(ErrorKind::AtomMissesCurve, "atom " + symbol_name(a) + " misses its curve piece");
            }
        }
    }
    return pwi;
}

AdaptedPWI induced_pwi(const AdaptedPWI& pwi, const InductionTrace& trace, int n, long budget) {
    if (n < 0 || n > trace.size()) throw Error(ErrorKind::LevelMismatch, "level outside the induction trace");
    const Iet& f = pwi.iet;
    const Iet& level = trace.state(n);
    AdaptedPWI out;
    out.iet = level;
    out.curve = n == 0 ? pwi.curve : pwi.curve.restricted(level.length());
    out.classify_tol = pwi.classify_tol;
    out.grid = std::make_shared<SegmentGrid>(out.curve, out.classify_tol);
    long used = 0;
    for (int a = 0; a < level.d(); ++a) {
        double x = 0.5 * (level.left(a) + level.right(a));
        PlanarIsometry map{0.0, cplx(0.0, 0.0), cplx(0.0, 0.0)};
        do {
            if (++used > budget) throw Error(ErrorKind::BudgetExceeded, "return word exceeds the budget");
            map = compose(pwi.maps[static_cast<std::size_t>(f.locate(x))], map);
            x = f.apply(x);
        } while (x >= level.length());
        out.maps.push_back(map);
        out.theta.push_back(map.angle);
    }
    return out;
}

std::vector<OrbitPoint> iterate(const AdaptedPWI& pwi, cplx z, int k) {
    std::vector<OrbitPoint> orbit;
    for (int s = 0; s <= k; ++s) {
        const int atom = pwi.classify(z);
        orbit.push_back({s, z, atom});
        if (s < k) z = pwi.maps[static_cast<std::size_t>(atom)](z);
    }
    return orbit;
}

std::string orbit_to_csv(const std::vector<OrbitPoint>& orbit) {
    std::ostringstream out;
    out.precision(17);
    out << "step,re,im,atom\n";
    for (const auto& p : orbit) out << p.step << "," << p.z.real() << "," << p.z.imag() << "," << symbol_name(p.atom) << "\n";
    return out.str();
}

}  // namespace ietpwi
