#pragma once

#include "ietpwi/errors.hpp"
#include "ietpwi/iet_core.hpp"
#include "ietpwi/numeric.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ietpwi {

struct InductionStep {
    int type = 0;
    int winner = 0;
    int loser = 0;
};

// 1 + E_{loser,winner}: row of the loser gains the row of the winner.
IntMatrix elementary_factor(int d, const InductionStep& step);

// Type the next Rauzy step would have; throws RauzyUndefined on a tie.
int rauzy_type(const Iet& iet);
Permutation rauzy_move(const Permutation& perm, int type);
std::pair<Iet, InductionStep> rauzy_step(const Iet& iet);

struct InductionTrace {
    std::vector<Iet> states;              // (lambda^(n), pi^(n)), n = 0..size()
    std::vector<InductionStep> steps;     // step n maps states[n] to states[n+1]
    std::vector<IntMatrix> products;      // B_R^(n)
    std::optional<Error> stopped;         // set when a tie ended the run early
    std::vector<PathReal> path_lengths;   // extended-precision lambda of the last state
    std::vector<PathReal> origin_lengths; // extended-precision lambda^(0)

    int size() const { return static_cast<int>(steps.size()); }
    const Iet& state(int n) const { return states.at(static_cast<std::size_t>(n)); }
    const IntMatrix& cocycle(int n) const { return products.at(static_cast<std::size_t>(n)); }
    // Last symbols beta_eps of pi^(n).
    int beta(int eps, int n) const;

    void extend(int more);
    // Extended-precision lambda^(n), replayed from origin_lengths.
    std::vector<PathReal> lengths_at(int n) const;
};

// Walks the extended-precision path of rauzy_iterate without double states, so it never
// underflows; only step types and winners/losers are available.
class PathWalker {
public:
    explicit PathWalker(const Iet& iet);
    InductionStep next();
    const Permutation& perm() const { return perm_; }

private:
    Permutation perm_;
    std::vector<PathReal> lengths_;
};

// The double lengths are completed below their last bit by a deterministic pseudo-random tail,
// so the path continues past the point where the rational input itself would tie.
InductionTrace rauzy_iterate(const Iet& iet, int n);

struct ZorichTrace {
    InductionTrace rauzy;
    std::vector<int> accel;               // n(Z^k)
    std::vector<long> partial_sums;       // s^m, m = 0..size()
    std::vector<IntMatrix> factors;       // B_Z of each block

    int size() const { return static_cast<int>(accel.size()); }
};

ZorichTrace zorich_iterate(const Iet& iet, int m);

IntMatrix visit_counts_bruteforce(const Iet& iet, int n, long budget = 10000000);

struct RauzyEdge {
    int from = 0;
    int to = 0;
    int label = 0;
};

struct RauzyGraph {
    std::vector<Permutation> vertices;  // canonical form, sorted by monodromy
    std::vector<RauzyEdge> edges;
    int index_of(const Permutation& perm) const;
    std::string to_dot() const;
};

RauzyGraph rauzy_class(const Permutation& perm);

// B v mod 2pi for any lift v of the torus point; coordinates in [-pi, pi).
std::vector<double> torus_project(const IntMatrix& B, const Lift& v);

// One JSON object per level n = 0..size(): state, step into it and B_R^(n).
std::string trace_to_jsonl(const InductionTrace& trace);

}  // namespace ietpwi
