#include "ietpwi/verify.hpp"
#include "ietpwi/errors.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace ietpwi {

nlohmann::json CheckResult::to_json() const {
    return {{"check", check}, {"defect", defect}, {"tol", tol}, {"pass", pass}, {"n", n}, {"m", m}, {"meta", meta}};
}

CheckResult make_check(std::string name, double defect, double tol, int n, int m, nlohmann::json meta) {
    CheckResult c;
    c.check = std::move(name);
    c.defect = std::isfinite(defect) ? std::abs(defect) : std::numeric_limits<double>::max();
    c.tol = tol;
    c.pass = std::isfinite(defect) && c.defect <= tol;
    c.n = n;
    c.m = m;
    c.meta = std::move(meta);
    return c;
}

bool VerificationReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

double VerificationReport::max_defect(const std::string& name) const {
    double d = 0.0;
    for (const auto& c : checks)
        if (name.empty() || c.check == name) d = std::max(d, c.defect);
    return d;
}

void VerificationReport::append(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    return j;
}

int thread_budget() {
    if (const char* env = std::getenv("IETPWI_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs body(i) for i in [0, count) on up to thread_budget() workers.
template <class F>
void parallel_for(std::size_t count, F body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

bool near_any(double x, const std::vector<double>& points, double tol) {
    auto it = std::lower_bound(points.begin(), points.end(), x - tol);
    return it != points.end() && *it <= x + tol;
}

}  // namespace

double embedding_defect(const PLCurve& gamma, const AdaptedPWI& pwi, const Iet& iet, int samples) {
    const double ell = iet.length();
    if (std::abs(gamma.ell - ell) > 1e-12 * ell) throw Error(ErrorKind::DomainMismatch, "curve domain differs from |lambda|");
    std::vector<double> xs;
    for (int i = 0; i < samples; ++i) xs.push_back((i + 0.5) * ell / samples);
    xs.insert(xs.end(), gamma.t.begin(), gamma.t.end());
    const auto& disc = iet.endpoints(0);
    const double excl = 1e-10 * ell;
    std::vector<double> kept;
    for (double x : xs)
        if (x >= 0.0 && x < ell && !near_any(x, disc, excl)) kept.push_back(x);
    std::vector<double> worst(kept.size(), 0.0);
    parallel_for(kept.size(), [&](std::size_t i) {
        const double x = kept[i];
        // gamma(I_a) lies in atom a, so the map is picked by the parameter; on a
        // self-intersecting curve a geometric lookup would be ambiguous.
        const auto& T = pwi.maps[static_cast<std::size_t>(iet.locate(x))];
        worst[i] = std::abs(gamma(iet.apply(x)) - T(gamma(x)));
    });
    return worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

VerificationReport quasi_embedding_suite(const InductionTrace& trace, const std::vector<PLCurve>& curves,
                                         const std::vector<std::vector<double>>& thetas, int N, std::uint64_t seed) {
    if (N < 0 || N >= static_cast<int>(curves.size()) || N > trace.size() || N >= static_cast<int>(thetas.size()))
        throw Error(ErrorKind::LevelMismatch, "suite depth exceeds the supplied curves");
    std::vector<std::pair<int, int>> pairs;
    for (int n = 0; n <= N; ++n)
        for (int m = 0; m <= n; ++m) pairs.emplace_back(n, m);
    std::vector<CheckResult> agreement(pairs.size()), quasi(pairs.size());
    const double ell = trace.state(0).length();

    parallel_for(pairs.size(), [&](std::size_t idx) {
        const auto [n, m] = pairs[idx];
        const PLCurve& g = curves[static_cast<std::size_t>(n)];
        const Iet& fm = trace.state(m);
        const double top = fm.length(), bottom = trace.state(n).length();
        std::mt19937_64 rng(seed + 7919 * idx);
        std::uniform_real_distribution<double> unif(0.0, top);

        std::vector<double> xs;
        for (int k = m; k <= n; ++k) {
            const Iet& s = trace.state(k);
            for (int a = 0; a < s.d(); ++a) xs.push_back(0.5 * (s.left(a) + s.right(a)));
        }
        for (std::size_t i = 0; i < g.segments(); ++i) {
            const double mid = 0.5 * (g.seg_begin(i) + g.seg_end(i));
            if (mid < top) xs.push_back(mid);
        }
        for (int r = 0; r < 100; ++r) xs.push_back(unif(rng));

        const auto& disc = fm.endpoints(0);
        const double excl = 1e-10 * ell;
        const auto T = inductive_maps(trace, g, n, m, thetas);
        const auto That = hat_maps(endpoint_images(g, n, trace, m, thetas), trace, thetas[static_cast<std::size_t>(m)]);

        double qdef = 0.0;
        std::size_t used = 0;
        std::vector<cplx> probes;
        for (double x : xs) {
            if (x < 0.0 || x >= top || near_any(x, disc, excl)) continue;
            probes.push_back(g(x));
            const double fx = fm.apply(x);
            if (fx < bottom) continue;
            ++used;
            const int a = fm.locate(x);
            qdef = std::max(qdef, std::abs(T[static_cast<std::size_t>(a)](g(x)) - g(fx)));
        }
        std::uniform_real_distribution<double> box(-ell, 2.0 * ell);
        for (int r = 0; r < 20; ++r) probes.emplace_back(box(rng), box(rng) - 0.5 * ell);
        double adef = 0.0;
        for (std::size_t a = 0; a < T.size(); ++a) adef = std::max(adef, isometry_distance(T[a], That[a], probes));

        const double tol = 1e-9 * (1 + n);
        agreement[idx] = make_check("map_agreement", adef, tol, n, m, {{"probes", probes.size()}});
        quasi[idx] = make_check("quasi_embedding", qdef, tol, n, m, {{"samples", used}});
    });
    VerificationReport rep;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        rep.checks.push_back(agreement[i]);
        rep.checks.push_back(quasi[i]);
    }
    return rep;
}

VerificationReport convergence_report(const InductionTrace& trace, const std::vector<PLCurve>& curves,
                                      const std::vector<std::vector<double>>& thetas) {
    if (curves.size() < 3) throw Error(ErrorKind::InvalidInput, "need at least three curves");
    const std::size_t levels = curves.size();
    if (thetas.size() + 1 < levels) throw Error(ErrorKind::LevelMismatch, "rotation sequence shorter than the curves");
    const double ell = curves[0].ell;
    VerificationReport rep;

    std::vector<double> dist;
    for (const auto& th : thetas) dist.push_back(torus_distance_to_zero(th));
    std::vector<double> inc;
    double cone = 0.0, dsum = 0.0;
    for (std::size_t n = 0; n + 1 < levels; ++n) {
        const double phi = breaking_angle(trace, thetas, static_cast<int>(n));
        const double step = sup_distance(curves[n], curves[n + 1]);
        inc.push_back(step);
        const double bound = 4.0 * ell * std::abs(std::sin(phi / 2.0));
        rep.checks.push_back(make_check("increment_bound", step, bound + 1e-12 * ell, static_cast<int>(n + 1), static_cast<int>(n),
                                        {{"phi", phi}, {"bound", bound}}));
        cone += std::abs(phi);
        dsum += dist[n];
        double steepest = 0.0;
        for (const auto& w : curves[n + 1].dir) steepest = std::max(steepest, std::abs(std::arg(w)));
        rep.checks.push_back(make_check("lipschitz_cone", steepest, dsum + 1e-12, static_cast<int>(n + 1), -1,
                                        {{"sum_abs_phi", cone}, {"sum_dT", dsum}}));
    }
    // Empirical constant of the telescoped bound over pairs (n, n + 2^j) and (n, last).
    double C = 0.0;
    for (std::size_t n = 0; n + 1 < levels; ++n) {
        std::vector<std::size_t> targets;
        for (std::size_t gap = 1; n + gap < levels; gap *= 2) targets.push_back(n + gap);
        targets.push_back(levels - 1);
        for (std::size_t m : targets) {
            double s = 0.0;
            for (std::size_t k = n; k < m; ++k) s += dist[k];
            if (s > 0.0) C = std::max(C, sup_distance(curves[n], curves[m]) / (ell * s));
        }
    }
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < inc.size(); ++i) {
        total += inc[i];
        if (4 * i >= 3 * inc.size()) tail += inc[i];
    }
    rep.checks.push_back(make_check("telescoped_constant", C, 4.0, -1, -1,
                                    {{"increments", inc}, {"increment_tail_ratio", total > 0 ? tail / total : 0.0}}));
    return rep;
}

namespace {

using Rational = boost::multiprecision::mpq_rational;

int sign_exact(cplx a, cplx b, cplx c) {
    const Rational ax(a.real()), ay(a.imag()), bx(b.real()), by(b.imag()), cx(c.real()), cy(c.imag());
    const Rational v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

// Orientation of (a, b, c) with a floating filter and an exact rational fallback.
int orient(cplx a, cplx b, cplx c) {
    const double l = (b.real() - a.real()) * (c.imag() - a.imag());
    const double r = (b.imag() - a.imag()) * (c.real() - a.real());
    const double det = l - r;
    const double bound = 1e-14 * (std::abs(l) + std::abs(r));
    if (det > bound) return 1;
    if (det < -bound) return -1;
    return sign_exact(a, b, c);
}

bool on_segment(cplx a, cplx b, cplx p) {
    return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
           std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
}

bool segments_meet(cplx p1, cplx p2, cplx q1, cplx q2) {
    const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2), o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

}  // namespace

InjectivityResult injectivity(const PLCurve& gamma) {
    const std::size_t k = gamma.segments();
    const auto& z = gamma.z;
    InjectivityResult res;
    // Adjacent segments may only meet at the shared vertex: reject a fold back along the same line.
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const cplx u = z[i] - z[i + 1], v = z[i + 2] - z[i + 1];
        if (orient(z[i], z[i + 1], z[i + 2]) == 0 && (u * std::conj(v)).real() > 0) {
            res.injective = false;
            res.witness = std::make_pair(i, i + 1);
            return res;
        }
    }
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    auto lo = [&](std::size_t i) { return std::min(z[i].real(), z[i + 1].real()); };
    auto hi = [&](std::size_t i) { return std::max(z[i].real(), z[i + 1].real()); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo(a) < lo(b); });
    std::optional<std::pair<std::size_t, std::size_t>> first;
    for (std::size_t p = 0; p < k; ++p) {
        const std::size_t i = order[p];
        for (std::size_t q = p + 1; q < k && lo(order[q]) <= hi(i); ++q) {
            const std::size_t j = order[q];
            const std::size_t a = std::min(i, j), b = std::max(i, j);
            if (b == a + 1) continue;
            const double ylo_a = std::min(z[a].imag(), z[a + 1].imag()), yhi_a = std::max(z[a].imag(), z[a + 1].imag());
            const double ylo_b = std::min(z[b].imag(), z[b + 1].imag()), yhi_b = std::max(z[b].imag(), z[b + 1].imag());
            if (yhi_a < ylo_b || yhi_b < ylo_a) continue;
            if (segments_meet(z[a], z[a + 1], z[b], z[b + 1]) && (!first || std::make_pair(a, b) < *first))
                first = std::make_pair(a, b);
        }
    }
    if (first) {
        res.injective = false;
        res.witness = first;
    }
    return res;
}

std::vector<double> discontinuity_cuts(const Iet& iet, int depth) {
    const double ell = iet.length();
    std::vector<double> cuts{0.0, ell};
    const auto& ends = iet.endpoints(0);
    for (int j = 1; j < iet.d(); ++j) {
        double x = ends[static_cast<std::size_t>(j)];
        for (int k = 0; k <= depth; ++k) {
            cuts.push_back(x);
            x = iet.apply(x);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> out;
    for (double c : cuts)
        if (out.empty() || c - out.back() > 1e-12 * ell) out.push_back(c);
    return out;
}

namespace {

// RMS distance to the total-least-squares line.
double line_residual(const std::vector<cplx>& pts) {
    cplx c(0.0, 0.0);
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : pts) {
        const Eigen::Vector2d v((p - c).real(), (p - c).imag());
        cov += v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    return std::sqrt(std::max(0.0, es.eigenvalues()(0)) / static_cast<double>(pts.size()));
}

// Algebraic circle fit followed by one Gauss-Newton step on the geometric residuals.
double circle_residual(const std::vector<cplx>& pts) {
    const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
    cplx c0(0.0, 0.0);
    for (const auto& p : pts) c0 += p;
    c0 /= static_cast<double>(pts.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx p = pts[static_cast<std::size_t>(i)] - c0;
        A(i, 0) = p.real();
        A(i, 1) = p.imag();
        A(i, 2) = 1.0;
        rhs(i) = -std::norm(p);
    }
    const Eigen::Vector3d s = A.colPivHouseholderQr().solve(rhs);
    cplx center(-s(0) / 2.0, -s(1) / 2.0);
    double r2 = std::norm(center) - s(2);
    if (!std::isfinite(r2) || r2 <= 0.0) return std::numeric_limits<double>::infinity();
    double r = std::sqrt(r2);
    auto rms = [&](cplx ctr, double rad) {
        double acc = 0.0;
        for (const auto& q : pts) {
            const double e = std::abs(q - c0 - ctr) - rad;
            acc += e * e;
        }
        return std::sqrt(acc / static_cast<double>(pts.size()));
    };
    Eigen::MatrixXd Jm(n, 3);
    Eigen::VectorXd res(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx d = pts[static_cast<std::size_t>(i)] - c0 - center;
        const double dist = std::max(std::abs(d), 1e-300);
        Jm(i, 0) = -d.real() / dist;
        Jm(i, 1) = -d.imag() / dist;
        Jm(i, 2) = -1.0;
        res(i) = dist - r;
    }
    const Eigen::Vector3d delta = Jm.colPivHouseholderQr().solve(-res);
    const cplx refined_center = center + cplx(delta(0), delta(1));
    const double refined_r = r + delta(2);
    return std::min(rms(center, r), rms(refined_center, refined_r));
}

}  // namespace

CheckResult NontrivialityReport::check() const {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : segments)
        segs.push_back({{"a", s.a}, {"b", s.b}, {"vertices", s.vertices}, {"line", s.line_residual},
                        {"circle", s.circle_residual}, {"degenerate", s.degenerate}});
    // Passes iff the best segment score reaches the threshold.
    return make_check("nontriviality", std::max(0.0, tol - best_score), 0.0, -1, -1,
                      {{"best_score", best_score}, {"threshold", tol}, {"segments", segs},
                       {"note", "threshold is a convention, not a derived modulus"}});
}

NontrivialityReport nontriviality(const PLCurve& gamma, const std::vector<double>& cut_params, double tol) {
    std::vector<double> cuts{0.0, gamma.ell};
    for (double c : cut_params)
        if (c > 0.0 && c < gamma.ell) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    NontrivialityReport rep;
    rep.tol = tol;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        SegmentFit fit;
        fit.a = cuts[c];
        fit.b = cuts[c + 1];
        const double len = fit.b - fit.a;
        if (!(len > 0.0)) continue;
        std::vector<double> params{fit.a};
        for (double t : gamma.t)
            if (t > fit.a && t < fit.b) params.push_back(t);
        params.push_back(fit.b);
        fit.vertices = params.size();
        if (fit.vertices < 4) {
            fit.degenerate = true;
            rep.segments.push_back(fit);
            continue;
        }
        // Arc-length-uniform samples plus every vertex.
        std::vector<double> xs = params;
        const int dense = 400;
        for (int i = 1; i < dense; ++i) xs.push_back(fit.a + len * i / dense);
        std::sort(xs.begin(), xs.end());
        std::vector<cplx> pts;
        for (double x : xs) pts.push_back(gamma(x));
        fit.line_residual = line_residual(pts) / len;
        fit.circle_residual = circle_residual(pts) / len;
        rep.best_score = std::max(rep.best_score, std::min(fit.line_residual, fit.circle_residual));
        rep.segments.push_back(fit);
    }
    rep.nontrivial = rep.best_score > tol;
    return rep;
}

double isometry_defect(const PLCurve& gamma, int samples) {
    const std::size_t k = gamma.segments();
    std::vector<double> arc(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) arc[i + 1] = arc[i] + std::abs(gamma.z[i + 1] - gamma.z[i]);
    auto defect_at = [&](double x) {
        const std::size_t i = gamma.segment_of(x);
        const double seg = gamma.seg_end(i) - gamma.seg_begin(i);
        const double frac = seg > 0 ? (x - gamma.seg_begin(i)) / seg : 0.0;
        return std::abs(arc[i] + frac * (arc[i + 1] - arc[i]) - x);
    };
    double worst = std::abs(arc[k] - gamma.ell);
    for (int s = 0; s < samples; ++s) worst = std::max(worst, defect_at(gamma.ell * s / samples));
    for (double t : gamma.t) worst = std::max(worst, defect_at(t));
    return worst;
}

}  // namespace ietpwi
