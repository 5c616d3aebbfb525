#include "ietpwi/iet_core.hpp"
#include "ietpwi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ietpwi {

namespace {

std::vector<int> invert(const std::vector<int>& p) {
    std::vector<int> row(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) row[static_cast<std::size_t>(p[a] - 1)] = static_cast<int>(a);
    return row;
}

void check_bijection(const std::vector<int>& p, int d) {
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    for (int x : p) {
        if (x < 1 || x > d || seen[static_cast<std::size_t>(x - 1)])
            throw Error(ErrorKind::InvalidInput, "not a bijection onto {1..d}");
        seen[static_cast<std::size_t>(x - 1)] = true;
    }
}

}  // namespace

std::string symbol_name(int symbol) {
    if (symbol < 26) return std::string(1, static_cast<char>('A' + symbol));
    return "S" + std::to_string(symbol);
}

Permutation::Permutation(std::vector<int> pi0, std::vector<int> pi1) : pi0_(std::move(pi0)), pi1_(std::move(pi1)) {
    const int d = static_cast<int>(pi0_.size());
    if (d < 2 || static_cast<int>(pi1_.size()) != d) throw Error(ErrorKind::InvalidInput, "permutation needs d >= 2 symbols");
    check_bijection(pi0_, d);
    check_bijection(pi1_, d);
    row0_ = invert(pi0_);
    row1_ = invert(pi1_);
}

Permutation Permutation::from_monodromy(const std::vector<int>& mono) {
    std::vector<int> id(mono.size());
    for (std::size_t a = 0; a < mono.size(); ++a) id[a] = static_cast<int>(a) + 1;
    return Permutation(id, mono);
}

Permutation Permutation::parse_monodromy(const std::string& text) {
    std::istringstream in(text);
    std::vector<int> mono;
    std::string tok;
    while (in >> tok) {
        try {
            mono.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidInput, "bad permutation token '" + tok + "'");
        }
    }
    return from_monodromy(mono);
}

Permutation Permutation::from_rows(const std::vector<int>& top, const std::vector<int>& bottom) {
    std::vector<int> p0(top.size()), p1(bottom.size());
    for (std::size_t j = 0; j < top.size(); ++j) p0.at(static_cast<std::size_t>(top[j])) = static_cast<int>(j) + 1;
    for (std::size_t j = 0; j < bottom.size(); ++j) p1.at(static_cast<std::size_t>(bottom[j])) = static_cast<int>(j) + 1;
    return Permutation(p0, p1);
}

std::vector<int> Permutation::monodromy() const {
    std::vector<int> m(static_cast<std::size_t>(d()));
    for (int j = 1; j <= d(); ++j) m[static_cast<std::size_t>(j - 1)] = pi1_[static_cast<std::size_t>(row0_[static_cast<std::size_t>(j - 1)])];
    return m;
}

std::vector<int> Permutation::monodromy_inverse() const {
    std::vector<int> m(static_cast<std::size_t>(d()));
    for (int j = 1; j <= d(); ++j) m[static_cast<std::size_t>(j - 1)] = pi0_[static_cast<std::size_t>(row1_[static_cast<std::size_t>(j - 1)])];
    return m;
}

bool Permutation::irreducible() const {
    const auto mono = monodromy();
    int prefix_max = 0;
    for (int k = 1; k < d(); ++k) {
        prefix_max = std::max(prefix_max, mono[static_cast<std::size_t>(k - 1)]);
        if (prefix_max == k) return false;
    }
    return true;
}

Permutation Permutation::canonical() const { return from_monodromy(monodromy()); }

std::string Permutation::to_string() const {
    std::string s;
    for (int j = 1; j <= d(); ++j) s += symbol_name(sym(0, j)) + (j < d() ? " " : "");
    s += " / ";
    for (int j = 1; j <= d(); ++j) s += symbol_name(sym(1, j)) + (j < d() ? " " : "");
    return s;
}

std::vector<std::vector<int>> omega_matrix(const Permutation& perm) {
    const int d = perm.d();
    std::vector<std::vector<int>> om(static_cast<std::size_t>(d), std::vector<int>(static_cast<std::size_t>(d), 0));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            int v = 0;
            if (perm.pos(1, b) < perm.pos(1, a)) v += 1;
            if (perm.pos(0, b) < perm.pos(0, a)) v -= 1;
            om[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
        }
    return om;
}

Iet::Iet(Permutation perm, std::vector<double> lengths) : perm_(std::move(perm)), lambda_(std::move(lengths)) {
    const int d = perm_.d();
    if (static_cast<int>(lambda_.size()) != d) throw Error(ErrorKind::InvalidInput, "length vector size differs from d");
    for (double l : lambda_)
        if (!(l > 0.0) || !std::isfinite(l)) throw Error(ErrorKind::NonPositiveLength, "lengths must be positive");
    const auto om = omega_matrix(perm_);
    upsilon_.assign(static_cast<std::size_t>(d), 0.0);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) upsilon_[static_cast<std::size_t>(a)] += om[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * lambda_[static_cast<std::size_t>(b)];
    ends0_.assign(static_cast<std::size_t>(d + 1), 0.0);
    ends1_.assign(static_cast<std::size_t>(d + 1), 0.0);
    for (int j = 1; j <= d; ++j) {
        ends0_[static_cast<std::size_t>(j)] = ends0_[static_cast<std::size_t>(j - 1)] + lambda_[static_cast<std::size_t>(perm_.sym(0, j))];
        ends1_[static_cast<std::size_t>(j)] = ends1_[static_cast<std::size_t>(j - 1)] + lambda_[static_cast<std::size_t>(perm_.sym(1, j))];
    }
    total_ = ends0_.back();
    // Both grids must end at the same point even after rounding.
    ends1_.back() = total_;
}

int Iet::locate(double x) const {
    if (!(x >= 0.0 && x < total_)) throw Error(ErrorKind::OutOfDomain, "x outside [0, |lambda|)");
    auto it = std::upper_bound(ends0_.begin(), ends0_.end(), x);
    int j = static_cast<int>(it - ends0_.begin());
    return perm_.sym(0, std::min(j, d()));
}

int Iet::locate_image(double y) const {
    if (!(y >= 0.0 && y < total_)) throw Error(ErrorKind::OutOfDomain, "y outside [0, |lambda|)");
    auto it = std::upper_bound(ends1_.begin(), ends1_.end(), y);
    int j = static_cast<int>(it - ends1_.begin());
    return perm_.sym(1, std::min(j, d()));
}

double Iet::apply(double x) const {
    const int a = locate(x);
    double y = x + upsilon_[static_cast<std::size_t>(a)];
    return std::clamp(y, 0.0, std::nextafter(total_, 0.0));
}

double Iet::apply_inverse(double y) const {
    const int a = locate_image(y);
    double x = y - upsilon_[static_cast<std::size_t>(a)];
    return std::clamp(x, 0.0, std::nextafter(total_, 0.0));
}

Iet Iet::normalized() const {
    std::vector<double> l = lambda_;
    for (double& x : l) x /= total_;
    return Iet(perm_, l);
}

bool check_idoc_depth(const Iet& iet, int n_max) {
    const int d = iet.d();
    const double tol = 1e-12 * iet.length();
    const auto& e0 = iet.endpoints(0);
    // Left endpoints of I_beta with pi0(beta) != 1.
    std::vector<double> targets(e0.begin() + 1, e0.end() - 1);
    for (int j = 0; j < d; ++j) {
        double x = e0[static_cast<std::size_t>(j)];
        for (int n = 1; n <= n_max; ++n) {
            x = iet.apply(x);
            for (double t : targets)
                if (std::abs(x - t) <= tol) return false;
        }
    }
    return true;
}

}  // namespace ietpwi
