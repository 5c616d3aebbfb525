#pragma once

#include "ietpwi/numeric.hpp"

#include <string>
#include <vector>

namespace ietpwi {

// Symbols are 0..d-1 (printed as A, B, C, ...); positions are 1..d.
class Permutation {
public:
    Permutation() = default;
    // pi0[a], pi1[a] are the top and bottom positions of symbol a.
    Permutation(std::vector<int> pi0, std::vector<int> pi1);

    // pi0 = identity, pi1(a) = mono[a].
    static Permutation from_monodromy(const std::vector<int>& mono);
    // Parses "4 3 2 1".
    static Permutation parse_monodromy(const std::string& text);
    // Top and bottom rows as symbol sequences.
    static Permutation from_rows(const std::vector<int>& top, const std::vector<int>& bottom);

    int d() const { return static_cast<int>(pi0_.size()); }
    int pos(int eps, int symbol) const { return eps == 0 ? pi0_[symbol] : pi1_[symbol]; }
    int sym(int eps, int position) const { return eps == 0 ? row0_[position - 1] : row1_[position - 1]; }
    const std::vector<int>& pi0() const { return pi0_; }
    const std::vector<int>& pi1() const { return pi1_; }
    std::vector<int> row(int eps) const { return eps == 0 ? row0_ : row1_; }

    // pi~(j) = pi1(pi0^{-1}(j)) and its inverse pi^(j) = pi0(pi1^{-1}(j)), j = 1..d.
    std::vector<int> monodromy() const;
    std::vector<int> monodromy_inverse() const;

    bool irreducible() const;
    // Relabels symbols so that the top row is A B C ...
    Permutation canonical() const;
    std::string to_string() const;

    bool operator==(const Permutation& o) const { return pi0_ == o.pi0_ && pi1_ == o.pi1_; }

private:
    std::vector<int> pi0_, pi1_, row0_, row1_;
};

std::string symbol_name(int symbol);

std::vector<std::vector<int>> omega_matrix(const Permutation& perm);

class Iet {
public:
    Iet() = default;
    Iet(Permutation perm, std::vector<double> lengths);

    const Permutation& perm() const { return perm_; }
    const std::vector<double>& lengths() const { return lambda_; }
    int d() const { return perm_.d(); }
    double length() const { return total_; }
    // upsilon = Omega_pi(lambda)
    const std::vector<double>& translation() const { return upsilon_; }
    // x_{eps,j}, j = 0..d
    const std::vector<double>& endpoints(int eps) const { return eps == 0 ? ends0_ : ends1_; }
    double left(int symbol) const { return ends0_[perm_.pos(0, symbol) - 1]; }
    double right(int symbol) const { return ends0_[perm_.pos(0, symbol)]; }

    int locate(double x) const;
    int locate_image(double y) const;
    double apply(double x) const;
    double apply_inverse(double y) const;

    Iet normalized() const;

private:
    Permutation perm_;
    std::vector<double> lambda_, upsilon_, ends0_, ends1_;
    double total_ = 0.0;
};

bool check_idoc_depth(const Iet& iet, int n_max);

}  // namespace ietpwi
