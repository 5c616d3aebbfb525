#pragma once

#include "ietpwi/breaking.hpp"
#include "ietpwi/iet_core.hpp"
#include "ietpwi/pwi.hpp"
#include "ietpwi/rauzy.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ietpwi {

struct CheckResult {
    std::string check;
    double defect = 0.0;
    double tol = 0.0;
    bool pass = true;
    int n = -1;
    int m = -1;
    nlohmann::json meta = nlohmann::json::object();

    nlohmann::json to_json() const;
};

CheckResult make_check(std::string name, double defect, double tol, int n = -1, int m = -1,
                       nlohmann::json meta = nlohmann::json::object());

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool pass() const;
    // Largest defect among checks with the given name, or among all checks.
    double max_defect(const std::string& name = "") const;
    void append(const VerificationReport& other);
    nlohmann::json to_json() const;
};

// Worker count from IETPWI_THREADS, else the hardware concurrency.
int thread_budget();

// sup |gamma(f(x)) - T(gamma(x))| over a grid plus the curve breakpoints.
double embedding_defect(const PLCurve& gamma, const AdaptedPWI& pwi, const Iet& iet, int samples = 10000);

// Map agreement |T - T^| and the quasi-embedding defect for every 0 <= m <= n <= N.
VerificationReport quasi_embedding_suite(const InductionTrace& trace, const std::vector<PLCurve>& curves,
                                         const std::vector<std::vector<double>>& thetas, int N, std::uint64_t seed = 1);

// Per-step increment bounds, empirical telescoping constant and the Lipschitz cone.
VerificationReport convergence_report(const InductionTrace& trace, const std::vector<PLCurve>& curves,
                                      const std::vector<std::vector<double>>& thetas);

struct InjectivityResult {
    bool injective = true;
    std::optional<std::pair<std::size_t, std::size_t>> witness;  // segment indices
};

InjectivityResult injectivity(const PLCurve& gamma);

// {0, ell} and the images f^k of the interior top endpoints, k = 0..depth.
std::vector<double> discontinuity_cuts(const Iet& iet, int depth = 2);

struct SegmentFit {
    double a = 0.0, b = 0.0;
    std::size_t vertices = 0;
    double line_residual = 0.0;
    double circle_residual = 0.0;
    bool degenerate = false;
};

struct NontrivialityReport {
    std::vector<SegmentFit> segments;
    double best_score = 0.0;  // max over segments of min(line, circle)
    double tol = 1e-3;
    bool nontrivial = false;
    CheckResult check() const;
};

NontrivialityReport nontriviality(const PLCurve& gamma, const std::vector<double>& cut_params, double tol = 1e-3);

// sup |arc length of gamma over [0, x] - x|.
double isometry_defect(const PLCurve& gamma, int samples = 10000);

}  // namespace ietpwi
