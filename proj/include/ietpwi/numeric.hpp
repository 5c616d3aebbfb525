#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace ietpwi {

using BigInt = boost::multiprecision::mpz_int;
// 50 significant digits; enough to follow stable directions far past double noise.
using HPReal = boost::multiprecision::mpfr_float_50;
using cplx = std::complex<double>;

// Lengths along a Rauzy path; about 1000 bits keep the path free of rounding ties for thousands of steps.
using PathReal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<300>>;

// A point of the torus given by one of its lifts to R^d.
using Lift = std::vector<HPReal>;

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Representative of t mod 2pi in [-pi, pi).
double wrap_angle(double t);

// Euclidean norm of the coordinatewise representatives in [-pi, pi).
double torus_distance_to_zero(const std::vector<double>& theta);

Lift to_lift(const std::vector<double>& v);
std::vector<double> to_doubles(const Lift& v);

// Dense square matrix of arbitrary-precision integers.
class IntMatrix {
public:
    IntMatrix() = default;
    explicit IntMatrix(int d);

    static IntMatrix identity(int d);

    int dim() const { return d_; }
    BigInt& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * d_ + j)]; }
    const BigInt& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * d_ + j)]; }

    IntMatrix operator*(const IntMatrix& o) const;
    IntMatrix transpose() const;
    bool operator==(const IntMatrix& o) const = default;

    // Row operation row(dst) += row(src); equals left multiplication by 1 + E_{dst,src}.
    void add_row(int dst, int src);
    BigInt row_sum(int i) const;
    BigInt determinant() const;
    std::size_t max_bits() const;
    bool nonnegative() const;

private:
    int d_ = 0;
    std::vector<BigInt> a_;
};

}  // namespace ietpwi
