#pragma once

#include "ietpwi/iet_core.hpp"
#include "ietpwi/spectral.hpp"

#include <cmath>
#include <algorithm>
#include <random>
#include <set>
#include <vector>

namespace fixtures {

// Self-similar lengths for the symmetric d=4 class: the Perron vector of a closed
// Rauzy loop, close to (0.43, 0.34, 0.12, 0.11).
inline const std::vector<double> kFig1Lambda{0.42766821540768709301, 0.33826121271771642765, 0.11964992384533627744,
                                             0.1144206480292602019};

inline ietpwi::Iet fig1() { return ietpwi::Iet(ietpwi::Permutation::parse_monodromy("4 3 2 1"), kFig1Lambda); }

inline double golden() { return (std::sqrt(5.0) - 1.0) / 2.0; }

inline ietpwi::Iet golden2() {
    return ietpwi::Iet(ietpwi::Permutation::parse_monodromy("2 1"), {golden(), 1.0 - golden()});
}

inline std::vector<double> random_simplex(int d, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> l;
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += l.emplace_back(e(rng));
    for (double& x : l) x /= s;
    return l;
}

// Uniformly random irreducible monodromy by rejection.
inline ietpwi::Permutation random_irreducible(int d, std::mt19937_64& rng) {
    std::vector<int> m(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) m[static_cast<std::size_t>(i)] = i + 1;
    for (;;) {
        std::shuffle(m.begin(), m.end(), rng);
        const auto p = ietpwi::Permutation::from_monodromy(m);
        if (p.irreducible()) return p;
    }
}

// Independent enumeration of a Rauzy class on monodromy vectors, pi0 = identity.
inline std::vector<int> move_mono(const std::vector<int>& mono, int type) {
    const int d = static_cast<int>(mono.size());
    // rows of symbols; symbol j-1 sits at top position j
    std::vector<int> top(d), bot(d);
    for (int j = 0; j < d; ++j) top[j] = j;
    for (int a = 0; a < d; ++a) bot[mono[a] - 1] = a;
    const int b0 = top.back(), b1 = bot.back();
    if (type == 0) {
        bot.pop_back();
        bot.insert(std::find(bot.begin(), bot.end(), b0) + 1, b1);
    } else {
        top.pop_back();
        top.insert(std::find(top.begin(), top.end(), b1) + 1, b0);
    }
    std::vector<int> pos_bot(d), out(d);
    for (int j = 0; j < d; ++j) pos_bot[bot[j]] = j + 1;
    for (int j = 0; j < d; ++j) out[j] = pos_bot[top[j]];
    return out;
}

inline std::set<std::vector<int>> bfs_class(const std::vector<int>& start) {
    std::set<std::vector<int>> seen{start};
    std::vector<std::vector<int>> queue{start};
    for (std::size_t i = 0; i < queue.size(); ++i)
        for (int t = 0; t < 2; ++t) {
            auto next = move_mono(queue[i], t);
            if (seen.insert(next).second) queue.push_back(next);
        }
    return seen;
}

// Stable-subspace sample for the Fig. 1 lengths, computed once per process.
inline const ietpwi::ThetaSample& fig1_sample() {
    static const ietpwi::ThetaSample s = [] {
        const auto f = fig1();
        return ietpwi::sample_theta(ietpwi::stable_subspace(f, 600), f, 0.5, 1);
    }();
    return s;
}

}  // namespace fixtures
