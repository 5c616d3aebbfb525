#include "ietpwi/rauzy.hpp"

#include "json.hpp"
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

namespace ietpwi {

IntMatrix elementary_factor(int d, const InductionStep& step) {
    IntMatrix m = IntMatrix::identity(d);
    m(step.loser, step.winner) += 1;
    return m;
}

int rauzy_type(const Iet& iet) {
    if (!iet.perm().irreducible()) throw Error(ErrorKind::Reducible, "Rauzy induction needs an irreducible permutation");
    const int d = iet.d();
    const double l0 = iet.lengths()[static_cast<std::size_t>(iet.perm().sym(0, d))];
    const double l1 = iet.lengths()[static_cast<std::size_t>(iet.perm().sym(1, d))];
    if (std::abs(l0 - l1) <= 1e-12 * iet.length()) throw Error(ErrorKind::RauzyUndefined, "last subintervals tie");
    return l0 > l1 ? 0 : 1;
}

Permutation rauzy_move(const Permutation& perm, int type) {
    const int d = perm.d();
    const int b0 = perm.sym(0, d);
    const int b1 = perm.sym(1, d);
    std::vector<int> top = perm.row(0), bottom = perm.row(1);
    if (type == 0) {
        bottom.pop_back();
        auto it = std::find(bottom.begin(), bottom.end(), b0);
        bottom.insert(it + 1, b1);
    } else {
        top.pop_back();
        auto it = std::find(top.begin(), top.end(), b1);
        top.insert(it + 1, b0);
    }
    return Permutation::from_rows(top, bottom);
}

std::pair<Iet, InductionStep> rauzy_step(const Iet& iet) {
    const int type = rauzy_type(iet);
    const int d = iet.d();
    InductionStep step;
    step.type = type;
    step.winner = iet.perm().sym(type, d);
    step.loser = iet.perm().sym(1 - type, d);
    std::vector<double> lambda = iet.lengths();
    lambda[static_cast<std::size_t>(step.winner)] -= lambda[static_cast<std::size_t>(step.loser)];
    return {Iet(rauzy_move(iet.perm(), type), std::move(lambda)), step};
}

int InductionTrace::beta(int eps, int n) const {
    const Iet& s = state(n);
    return s.perm().sym(eps, s.d());
}

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<PathReal> completed_lengths(const std::vector<double>& lambda) {
    std::uint64_t seed = 0x1234567887654321ULL;
    for (double x : lambda) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        seed ^= bits + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
    }
    std::vector<PathReal> out;
    for (double x : lambda) {
        PathReal u = 0, scale = 1;
        for (int w = 0; w < 16; ++w) {
            scale = ldexp(scale, -64);
            u += PathReal(splitmix(seed)) * scale;
        }
        out.push_back(PathReal(x) * (1 + ldexp(u - 0.5, -60)));
    }
    return out;
}

}  // namespace

void InductionTrace::extend(int more) {
    if (path_lengths.empty()) origin_lengths = path_lengths = completed_lengths(states.back().lengths());
    for (int k = 0; k < more && !stopped; ++k) {
        try {
            const Iet& cur = states.back();
            const int d = cur.d();
            InductionStep step;
            step.type = rauzy_type(cur);
            step.winner = cur.perm().sym(step.type, d);
            step.loser = cur.perm().sym(1 - step.type, d);
            path_lengths[static_cast<std::size_t>(step.winner)] -= path_lengths[static_cast<std::size_t>(step.loser)];
            std::vector<double> lambda;
            for (const auto& l : path_lengths) lambda.push_back(l.convert_to<double>());
            Iet next(rauzy_move(cur.perm(), step.type), std::move(lambda));
            IntMatrix b = products.back();
            // B_R^(n+1) = B_n B_R^(n)
            b.add_row(step.loser, step.winner);
            states.push_back(std::move(next));
            steps.push_back(step);
            products.push_back(std::move(b));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RauzyUndefined) throw;
            stopped = e;
        }
    }
}

PathWalker::PathWalker(const Iet& iet) : perm_(iet.perm()), lengths_(completed_lengths(iet.lengths())) {
    if (!perm_.irreducible()) throw Error(ErrorKind::Reducible, "Rauzy induction needs an irreducible permutation");
}

InductionStep PathWalker::next() {
    const int d = perm_.d();
    const PathReal& l0 = lengths_[static_cast<std::size_t>(perm_.sym(0, d))];
    const PathReal& l1 = lengths_[static_cast<std::size_t>(perm_.sym(1, d))];
    PathReal total = 0;
    for (const auto& l : lengths_) total += l;
    if (abs(l0 - l1) <= 1e-12 * total) throw Error(ErrorKind::RauzyUndefined, "last subintervals tie");
    InductionStep step;
    step.type = l0 > l1 ? 0 : 1;
    step.winner = perm_.sym(step.type, d);
    step.loser = perm_.sym(1 - step.type, d);
    lengths_[static_cast<std::size_t>(step.winner)] -= lengths_[static_cast<std::size_t>(step.loser)];
    perm_ = rauzy_move(perm_, step.type);
    return step;
}

std::vector<PathReal> InductionTrace::lengths_at(int n) const {
    if (n < 0 || n > size()) throw Error(ErrorKind::LevelMismatch, "level outside the induction trace");
    std::vector<PathReal> l = origin_lengths;
    for (int k = 0; k < n; ++k) {
        const InductionStep& s = steps[static_cast<std::size_t>(k)];
        l[static_cast<std::size_t>(s.winner)] -= l[static_cast<std::size_t>(s.loser)];
    }
    return l;
}

InductionTrace rauzy_iterate(const Iet& iet, int n) {
    InductionTrace t;
    t.states.push_back(iet);
    t.products.push_back(IntMatrix::identity(iet.d()));
    t.extend(n);
    return t;
}

ZorichTrace zorich_iterate(const Iet& iet, int m) {
    ZorichTrace z;
    z.rauzy = rauzy_iterate(iet, 0);
    z.partial_sums.push_back(0);
    const int d = iet.d();
    for (int k = 0; k < m; ++k) {
        const int type = rauzy_type(z.rauzy.states.back());
        IntMatrix factor = IntMatrix::identity(d);
        int count = 0;
        do {
            z.rauzy.extend(1);
            if (z.rauzy.stopped) throw *z.rauzy.stopped;
            const auto& s = z.rauzy.steps.back();
            factor.add_row(s.loser, s.winner);
            ++count;
        } while (rauzy_type(z.rauzy.states.back()) == type);
        z.accel.push_back(count);
        z.partial_sums.push_back(z.partial_sums.back() + count);
        z.factors.push_back(std::move(factor));
    }
    return z;
}

IntMatrix visit_counts_bruteforce(const Iet& iet, int n, long budget) {
    InductionTrace t = rauzy_iterate(iet, n);
    if (t.stopped) throw *t.stopped;
    const Iet& level = t.state(n);
    const double top = level.length();
    const int d = iet.d();
    IntMatrix counts(d);
    long used = 0;
    for (int a = 0; a < d; ++a) {
        double x = 0.5 * (level.left(a) + level.right(a));
        do {
            if (++used > budget) throw Error(ErrorKind::BudgetExceeded, "visit-count budget exhausted");
            counts(a, iet.locate(x)) += 1;
            x = iet.apply(x);
        } while (x >= top);
    }
    return counts;
}

int RauzyGraph::index_of(const Permutation& perm) const {
    const Permutation c = perm.canonical();
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (vertices[i] == c) return static_cast<int>(i);
    return -1;
}

namespace {

std::string mono_string(const Permutation& p) {
    std::string s;
    for (int v : p.monodromy()) s += (s.empty() ? "" : " ") + std::to_string(v);
    return s;
}

}  // namespace

std::string RauzyGraph::to_dot() const {
    std::ostringstream out;
    out << "digraph rauzy {\n";
    for (std::size_t i = 0; i < vertices.size(); ++i)
        out << "  v" << i << " [label=\"" << mono_string(vertices[i]) << "\"];\n";
    for (const auto& e : edges)
        out << "  v" << e.from << " -> v" << e.to << " [label=\"" << e.label << "\"];\n";
    out << "}\n";
    return out.str();
}

RauzyGraph rauzy_class(const Permutation& perm) {
    if (!perm.irreducible()) throw Error(ErrorKind::Reducible, "Rauzy class of a reducible permutation");
    std::map<std::vector<int>, Permutation> seen;
    std::deque<Permutation> queue{perm.canonical()};
    seen.emplace(perm.monodromy(), perm.canonical());
    while (!queue.empty()) {
        Permutation p = queue.front();
        queue.pop_front();
        for (int type = 0; type < 2; ++type) {
            Permutation q = rauzy_move(p, type).canonical();
            if (seen.emplace(q.monodromy(), q).second) queue.push_back(q);
        }
    }
    RauzyGraph g;
    for (auto& [mono, p] : seen) g.vertices.push_back(p);
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
        for (int type = 0; type < 2; ++type)
            g.edges.push_back({static_cast<int>(i), g.index_of(rauzy_move(g.vertices[i], type)), type});
    return g;
}

std::vector<double> torus_project(const IntMatrix& B, const Lift& v) {
    const int d = B.dim();
    if (static_cast<int>(v.size()) != d) throw Error(ErrorKind::InvalidInput, "torus point dimension differs from matrix");
    // Products B_ij v_j are exact at this precision, and so is the integer quotient by 2pi.
    const mpfr_prec_t prec = static_cast<mpfr_prec_t>(B.max_bits() + 2 * mpfr_get_prec(v[0].backend().data()) + 64);
    mpfr_t acc, term, twopi, q;
    mpfr_inits2(prec, acc, term, twopi, q, static_cast<mpfr_ptr>(nullptr));
    mpfr_const_pi(twopi, MPFR_RNDN);
    mpfr_mul_2ui(twopi, twopi, 1, MPFR_RNDN);
    std::vector<double> out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        mpfr_set_zero(acc, 1);
        for (int j = 0; j < d; ++j) {
            mpfr_mul_z(term, v[static_cast<std::size_t>(j)].backend().data(), B(i, j).backend().data(), MPFR_RNDN);
            mpfr_add(acc, acc, term, MPFR_RNDN);
        }
        mpfr_div(q, acc, twopi, MPFR_RNDN);
        mpfr_rint(q, q, MPFR_RNDN);
        mpfr_mul(q, q, twopi, MPFR_RNDN);
        mpfr_sub(acc, acc, q, MPFR_RNDN);
        out[static_cast<std::size_t>(i)] = wrap_angle(mpfr_get_d(acc, MPFR_RNDN));
    }
    mpfr_clears(acc, term, twopi, q, static_cast<mpfr_ptr>(nullptr));
    return out;
}

std::string trace_to_jsonl(const InductionTrace& trace) {
    std::ostringstream out;
    const int d = trace.state(0).d();
    for (int n = 0; n <= trace.size(); ++n) {
        nlohmann::json j;
        j["n"] = n;
        j["perm"] = trace.state(n).perm().to_string();
        j["lambda"] = trace.state(n).lengths();
        if (n > 0) {
            const auto& s = trace.steps[static_cast<std::size_t>(n - 1)];
            j["type"] = s.type;
            j["winner"] = symbol_name(s.winner);
            j["loser"] = symbol_name(s.loser);
        }
        // Entries beyond 64 bits are written as decimal strings.
        nlohmann::json rows = nlohmann::json::array();
        const IntMatrix& b = trace.cocycle(n);
        for (int r = 0; r < d; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < d; ++c) {
                if (b(r, c) <= std::numeric_limits<std::int64_t>::max()) row.push_back(b(r, c).convert_to<std::int64_t>());
                else row.push_back(b(r, c).str());
            }
            rows.push_back(row);
        }
        j["B"] = rows;
        out << j.dump() << "\n";
    }
    return out.str();
}

}  // namespace ietpwi
