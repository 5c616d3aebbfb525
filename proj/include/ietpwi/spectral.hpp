#pragma once

#include "ietpwi/iet_core.hpp"
#include "ietpwi/numeric.hpp"
#include "ietpwi/rauzy.hpp"

#include <cstdint>
#include <vector>

namespace ietpwi {

struct InvariantSubspace {
    std::vector<std::vector<double>> basis;  // orthonormal columns spanning Omega_pi(R^d)
    int dim = 0;
};

InvariantSubspace h_pi_basis(const Permutation& perm);
int genus(const Permutation& perm);

struct LyapunovEstimate {
    std::vector<double> exponents;   // per Zorich step, decreasing
    std::vector<double> error_bars;  // standard error over batches
    long steps_used = 0;
    long rauzy_steps = 0;
};

LyapunovEstimate lyapunov_spectrum(const Iet& iet, long m, int batches = 20);

struct StableFrame {
    std::vector<Lift> vectors;           // g orthonormal vectors in H_pi
    std::vector<double> log_singular;    // log singular values of the restricted product, decreasing
    double gap_ratio = 0.0;              // sigma_g / sigma_{g+1}
    int zorich_steps = 0;
    long rauzy_steps = 0;

    int g() const { return static_cast<int>(vectors.size()); }
    std::vector<std::vector<double>> as_doubles() const;
};

StableFrame stable_subspace(const Iet& iet, int m);

// Largest principal angle between the spans of two frames.
double principal_angle(const std::vector<Lift>& a, const std::vector<Lift>& b);

struct ThetaSample {
    Lift v;
    std::vector<double> theta;  // p(v) in [-pi, pi)
    double delta = 0.0;
    double norm = 0.0;
    double angle_to_upsilon = 0.0;
    int attempts = 0;
    int wss_rejections = 0;
    int zero_rejections = 0;
};

ThetaSample sample_theta(const StableFrame& frame, const Iet& iet, double delta, std::uint64_t seed, int n_check = 50);

struct SummabilityReport {
    std::vector<double> terms;  // d_T(theta^(n), 0), n = 0..N
    double sum = 0.0;           // over 0..n_star
    double tail = 0.0;          // last quarter of 0..n_star
    int n_star = 0;             // float-noise horizon: first global minimum of the terms
    double K = 0.0;             // sum / d_T(theta, 0)
    bool decays = false;
};

SummabilityReport summability_check(const InductionTrace& trace, const Lift& theta, int N);

}  // namespace ietpwi
