#include "ietpwi/spectral.hpp"
#include "ietpwi/breaking.hpp"
#include "ietpwi/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace ietpwi {

namespace {

using HPVec = std::vector<HPReal>;

HPReal dot(const HPVec& a, const HPVec& b) {
    HPReal s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Modified Gram-Schmidt, applied twice; returns the diagonal of R.
std::vector<HPReal> orthonormalize(std::vector<HPVec>& cols, std::vector<std::vector<HPReal>>* r_out = nullptr) {
    const std::size_t k = cols.size();
    std::vector<std::vector<HPReal>> R(k, std::vector<HPReal>(k, HPReal(0)));
    for (std::size_t j = 0; j < k; ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < j; ++i) {
                const HPReal c = dot(cols[i], cols[j]);
                R[i][j] += c;
                for (std::size_t t = 0; t < cols[j].size(); ++t) cols[j][t] -= c * cols[i][t];
            }
        const HPReal nrm = sqrt(dot(cols[j], cols[j]));
        R[j][j] = nrm;
        for (auto& x : cols[j]) x /= nrm;
    }
    std::vector<HPReal> diag;
    for (std::size_t j = 0; j < k; ++j) diag.push_back(R[j][j]);
    if (r_out) *r_out = std::move(R);
    return diag;
}

std::vector<HPVec> h_pi_basis_hp(const Permutation& perm) {
    const auto om = omega_matrix(perm);
    const int d = perm.d();
    std::vector<HPVec> basis;
    for (int c = 0; c < d; ++c) {
        HPVec v(static_cast<std::size_t>(d));
        for (int r = 0; r < d; ++r) v[static_cast<std::size_t>(r)] = om[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const HPReal s = dot(b, v);
                for (int r = 0; r < d; ++r) v[static_cast<std::size_t>(r)] -= s * b[static_cast<std::size_t>(r)];
            }
        const HPReal nrm = sqrt(dot(v, v));
        if (nrm < HPReal("1e-20")) continue;
        for (auto& x : v) x /= nrm;
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace

InvariantSubspace h_pi_basis(const Permutation& perm) {
    if (!perm.irreducible()) throw Error(ErrorKind::Reducible, "H_pi of a reducible permutation");
    const auto om = omega_matrix(perm);
    const int d = perm.d();
    Eigen::MatrixXd A(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A(r, c) = om[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, rank);
    InvariantSubspace h;
    h.dim = rank;
    for (int c = 0; c < rank; ++c) {
        std::vector<double> col(static_cast<std::size_t>(d));
        for (int r = 0; r < d; ++r) col[static_cast<std::size_t>(r)] = Q(r, c);
        h.basis.push_back(std::move(col));
    }
    return h;
}

int genus(const Permutation& perm) { return h_pi_basis(perm).dim / 2; }

LyapunovEstimate lyapunov_spectrum(const Iet& iet, long m, int batches) {
    if (m < 1) throw Error(ErrorKind::InvalidInput, "need at least one Zorich step");
    batches = static_cast<int>(std::clamp<long>(batches, 1, m));
    const InvariantSubspace h = h_pi_basis(iet.perm());
    const int d = iet.d(), k = h.dim;
    Eigen::MatrixXd X(d, k);
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < d; ++r) X(r, c) = h.basis[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];

    std::vector<std::vector<double>> batch_sums(static_cast<std::size_t>(batches), std::vector<double>(static_cast<std::size_t>(k), 0.0));
    std::vector<long> batch_len(static_cast<std::size_t>(batches), 0);
    Iet state = iet.normalized();
    LyapunovEstimate est;
    for (long s = 0; s < m; ++s) {
        const int type = rauzy_type(state);
        do {
            auto [next, step] = rauzy_step(state);
            X.row(step.loser) += X.row(step.winner);
            state = std::move(next);
            ++est.rauzy_steps;
        } while (rauzy_type(state) == type);
        state = state.normalized();
        // Re-orthonormalize every Zorich step.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
        const auto b = static_cast<std::size_t>(s * batches / m);
        for (int c = 0; c < k; ++c) {
            batch_sums[b][static_cast<std::size_t>(c)] += std::log(std::abs(R(c, c)));
            if (R(c, c) < 0) Q.col(c) *= -1.0;
        }
        ++batch_len[b];
        X = Q;
    }
    est.steps_used = m;
    std::vector<std::pair<double, double>> out;
    for (int c = 0; c < k; ++c) {
        double total = 0.0;
        std::vector<double> rates;
        for (int b = 0; b < batches; ++b) {
            total += batch_sums[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
            rates.push_back(batch_sums[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] / static_cast<double>(batch_len[static_cast<std::size_t>(b)]));
        }
        const double mean = total / static_cast<double>(m);
        double var = 0.0;
        for (double r : rates) var += (r - mean) * (r - mean);
        const double se = batches > 1 ? std::sqrt(var / (batches - 1) / batches) : 0.0;
        out.emplace_back(mean, se);
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (auto& [e, se] : out) est.exponents.push_back(e), est.error_bars.push_back(se);
    return est;
}

std::vector<std::vector<double>> StableFrame::as_doubles() const {
    std::vector<std::vector<double>> out;
    for (const auto& v : vectors) out.push_back(to_doubles(v));
    return out;
}

StableFrame stable_subspace(const Iet& iet, int m) {
    if (m < 1) throw Error(ErrorKind::InvalidInput, "need at least one Zorich step");
    const std::vector<HPVec> Q0 = h_pi_basis_hp(iet.perm());
    const std::size_t k = Q0.size(), g = k / 2;
    const int d = iet.d();

    // Forward: push the H_pi frame through the Zorich blocks of the same path rauzy_iterate follows,
    // keeping the triangular factors.
    std::vector<HPVec> X = Q0;
    std::vector<std::vector<std::vector<HPReal>>> Rs;
    // The extended-precision path runs out after a few hundred Zorich steps when the lengths
    // fall below its resolution; the frame then uses the complete blocks seen so far.
    PathWalker walker(iet);
    std::vector<InductionStep> steps;
    std::vector<std::size_t> block_end;
    try {
        steps.push_back(walker.next());
        while (static_cast<int>(block_end.size()) < m) {
            steps.push_back(walker.next());
            if (steps.back().type != steps[steps.size() - 2].type) block_end.push_back(steps.size() - 1);
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::RauzyUndefined || block_end.empty()) throw;
    }
    StableFrame frame;
    std::size_t n = 0;
    for (std::size_t end : block_end) {
        for (; n < end; ++n) {
            const auto& step = steps[n];
            for (auto& col : X) col[static_cast<std::size_t>(step.loser)] += col[static_cast<std::size_t>(step.winner)];
        }
        std::vector<std::vector<HPReal>> R;
        orthonormalize(X, &R);
        Rs.push_back(std::move(R));
    }
    frame.rauzy_steps = static_cast<int>(n);
    frame.zorich_steps = static_cast<int>(block_end.size());

    // Backward orthogonal iteration on R^T = R_0^T ... R_{m-1}^T: its leading columns span the
    // expanding right-singular directions; the trailing g columns are the contracting ones.
    std::vector<HPVec> Y(k, HPVec(k, HPReal(0)));
    for (std::size_t i = 0; i < k; ++i) Y[i][i] = 1;
    std::vector<HPReal> logs(k, HPReal(0));
    for (auto it = Rs.rbegin(); it != Rs.rend(); ++it) {
        const auto& R = *it;
        for (auto& col : Y) {
            HPVec next(k, HPReal(0));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j <= i; ++j) next[i] += R[j][i] * col[j];
            col = std::move(next);
        }
        const auto diag = orthonormalize(Y);
        for (std::size_t i = 0; i < k; ++i) logs[i] += log(diag[i]);
    }
    for (const auto& l : logs) frame.log_singular.push_back(l.convert_to<double>());
    frame.gap_ratio = std::exp(frame.log_singular[g - 1] - frame.log_singular[g]);
    for (std::size_t c = g; c < k; ++c) {
        Lift v(static_cast<std::size_t>(d), HPReal(0));
        for (std::size_t i = 0; i < k; ++i)
            for (int r = 0; r < d; ++r) v[static_cast<std::size_t>(r)] += Q0[i][static_cast<std::size_t>(r)] * Y[c][i];
        frame.vectors.push_back(std::move(v));
    }
    if (frame.gap_ratio < 10.0) throw Error(ErrorKind::InsufficientGap, "singular-value gap at position g below 10");
    return frame;
}

double principal_angle(const std::vector<Lift>& a, const std::vector<Lift>& b) {
    // Largest angle = asin of the largest residual of the smaller frame projected onto the larger.
    std::vector<HPVec> B = a.size() > b.size() ? a : b;
    orthonormalize(B);
    std::vector<HPVec> A = a.size() > b.size() ? b : a;
    orthonormalize(A);
    const std::size_t ka = A.size(), kb = B.size();
    Eigen::MatrixXd M(static_cast<Eigen::Index>(ka), static_cast<Eigen::Index>(kb));
    for (std::size_t i = 0; i < ka; ++i)
        for (std::size_t j = 0; j < kb; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dot(A[i], B[j]).convert_to<double>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const double smin = svd.singularValues().minCoeff();
    // Residual form is accurate for tiny angles.
    double worst = 0.0;
    for (std::size_t i = 0; i < ka; ++i) {
        HPVec r = A[i];
        for (const auto& bv : B) {
            const HPReal c = dot(bv, A[i]);
            for (std::size_t t = 0; t < r.size(); ++t) r[t] -= c * bv[t];
        }
        worst = std::max(worst, sqrt(dot(r, r)).convert_to<double>());
    }
    return smin > 0.5 ? std::asin(std::min(1.0, worst * std::sqrt(static_cast<double>(ka)))) : std::acos(std::clamp(smin, 0.0, 1.0));
}

ThetaSample sample_theta(const StableFrame& frame, const Iet& iet, double delta, std::uint64_t seed, int n_check) {
    if (!(delta > 0.0 && delta < kPi)) throw Error(ErrorKind::InvalidInput, "delta must lie in (0, pi)");
    const int d = iet.d();
    const std::size_t g = frame.vectors.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    const HPVec ups = to_lift(iet.translation());
    const InductionTrace trace = rauzy_iterate(iet, n_check);
    ThetaSample out;
    out.delta = delta;
    for (int attempt = 1; attempt <= 100; ++attempt) {
        out.attempts = attempt;
        HPVec w(static_cast<std::size_t>(d), HPReal(0));
        for (std::size_t i = 0; i < g; ++i) {
            const double c = normal(rng);
            for (int r = 0; r < d; ++r) w[static_cast<std::size_t>(r)] += c * frame.vectors[i][static_cast<std::size_t>(r)];
        }
        const HPReal wn = sqrt(dot(w, w));
        const double u = unif(rng);
        for (auto& x : w) x *= delta * u / wn;
        // Angle between span(v) and span(upsilon^(0)).
        const HPReal proj = dot(w, ups) / dot(ups, ups);
        HPVec perp = w;
        for (std::size_t r = 0; r < perp.size(); ++r) perp[r] -= proj * ups[r];
        const double angle = atan2(sqrt(dot(perp, perp)), abs(proj) * sqrt(dot(ups, ups))).convert_to<double>();
        if (angle < 1e-8) {
            ++out.wss_rejections;
            continue;
        }
        bool hits_zero = false;
        const int levels = std::min(n_check, trace.size());
        for (int n = 0; n <= levels && !hits_zero; ++n)
            hits_zero = torus_distance_to_zero(torus_project(trace.cocycle(n), w)) < 1e-12;
        if (hits_zero) {
            ++out.zero_rejections;
            continue;
        }
        out.v = w;
        out.theta = torus_project(IntMatrix::identity(d), w);
        out.norm = (delta * u);
        out.angle_to_upsilon = angle;
        return out;
    }
    throw Error(ErrorKind::ExhaustedResamples, "no admissible sample in 100 attempts (" + std::to_string(out.wss_rejections) +
                                                   " strongly-stable hits, " + std::to_string(out.zero_rejections) + " zero-preimage hits)");
}

SummabilityReport summability_check(const InductionTrace& trace, const Lift& theta, int N) {
    const auto thetas = theta_sequence(trace, theta, N);
    SummabilityReport rep;
    for (const auto& t : thetas) rep.terms.push_back(torus_distance_to_zero(t));
    rep.n_star = static_cast<int>(std::min_element(rep.terms.begin(), rep.terms.end()) - rep.terms.begin());
    const int quarter_start = rep.n_star - rep.n_star / 4;
    for (int n = 0; n <= rep.n_star; ++n) {
        rep.sum += rep.terms[static_cast<std::size_t>(n)];
        if (n > quarter_start || (rep.n_star < 4 && n == rep.n_star)) rep.tail += rep.terms[static_cast<std::size_t>(n)];
    }
    rep.K = rep.terms[0] > 0 ? rep.sum / rep.terms[0] : 0.0;
    rep.decays = rep.sum == 0.0 || (rep.tail < 0.05 * rep.sum && rep.terms[static_cast<std::size_t>(rep.n_star)] < 1e-6);
    return rep;
}

}  // namespace ietpwi
