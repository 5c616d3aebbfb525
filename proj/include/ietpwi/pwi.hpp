#pragma once

#include "ietpwi/breaking.hpp"
#include "ietpwi/iet_core.hpp"
#include "ietpwi/rauzy.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ietpwi {

// z -> e^{i angle} (z - a) + b
struct PlanarIsometry {
    double angle = 0.0;
    cplx a{0.0, 0.0};
    cplx b{0.0, 0.0};

    cplx rotation() const { return std::polar(1.0, angle); }
    cplx operator()(cplx z) const { return rotation() * (z - a) + b; }
    PlanarIsometry inverse() const { return {-angle, b, a}; }
    // offset eta in z -> e^{i angle} z + eta
    cplx offset() const { return b - rotation() * a; }
};

// (f o g)(z) = f(g(z))
PlanarIsometry compose(const PlanarIsometry& f, const PlanarIsometry& g);
// max |f(z) - g(z)| over the given probe points
double isometry_distance(const PlanarIsometry& f, const PlanarIsometry& g, const std::vector<cplx>& probes);

struct EndpointImages {
    int n = 0, m = 0;
    std::vector<cplx> gamma0, gamma1, xi;  // indices 0..d
};

EndpointImages endpoint_images(const PLCurve& curve_n, int n, const InductionTrace& trace, int m,
                               const std::vector<std::vector<double>>& thetas);

std::vector<PlanarIsometry> hat_maps(const EndpointImages& ei, const InductionTrace& trace, const std::vector<double>& theta_m);

// T^{(n,m)} by downward recursion from T^{(n,n)} = hat maps at level n.
std::vector<PlanarIsometry> inductive_maps(const InductionTrace& trace, const PLCurve& curve_n, int n, int m,
                                           const std::vector<std::vector<double>>& thetas);

using Polygon = std::vector<cplx>;

// Uniform bucket grid over the segments of a curve, for nearest-point queries within a radius.
class SegmentGrid {
public:
    SegmentGrid(const PLCurve& curve, double radius);
    // Parameter and distance of the closest curve point within the radius, if any.
    std::optional<std::pair<double, double>> nearest(const PLCurve& curve, cplx z) const;

private:
    double radius_ = 0.0, h_ = 1.0, x0_ = 0.0, y0_ = 0.0;
    long nx_ = 1, ny_ = 1;
    std::vector<std::vector<std::size_t>> cells_;
};

struct AdaptedPWI {
    Iet iet;
    PLCurve curve;
    std::vector<double> theta;
    std::vector<PlanarIsometry> maps;
    std::vector<Polygon> atoms;  // optional convex atoms, one per symbol
    double classify_tol = 0.0;
    std::shared_ptr<const SegmentGrid> grid;

    // Atom of z; the curve-parameter rule projects z onto the curve.
    int classify(cplx z) const;
    cplx apply(cplx z) const { return maps[static_cast<std::size_t>(classify(z))](z); }
    std::string to_json() const;
};

AdaptedPWI adapted_pwi(const PLCurve& limit_curve, const Iet& iet, const std::vector<double>& theta,
                       const std::vector<Polygon>& atoms = {});

// Parameter of the closest curve point and its distance.
std::pair<double, double> nearest_parameter(const PLCurve& curve, cplx z);

AdaptedPWI induced_pwi(const AdaptedPWI& pwi, const InductionTrace& trace, int n, long budget = 10000000);

struct OrbitPoint {
    int step = 0;
    cplx z;
    int atom = 0;
};

std::vector<OrbitPoint> iterate(const AdaptedPWI& pwi, cplx z, int k);
std::string orbit_to_csv(const std::vector<OrbitPoint>& orbit);

}  // namespace ietpwi
