#include "ietpwi/numeric.hpp"
#include "ietpwi/errors.hpp"

#include <cmath>

namespace ietpwi {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NonPositiveLength: return "NonPositiveLength";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::RauzyUndefined: return "RauzyUndefined";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::IntervalOutOfRange: return "IntervalOutOfRange";
    case ErrorKind::NonUnitSpeed: return "NonUnitSpeed";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::LevelMismatch: return "LevelMismatch";
    case ErrorKind::AtomsOverlap: return "AtomsOverlap";
    case ErrorKind::AtomMissesCurve: return "AtomMissesCurve";
    case ErrorKind::UnclassifiablePoint: return "UnclassifiablePoint";
    case ErrorKind::InsufficientGap: return "InsufficientGap";
    case ErrorKind::ExhaustedResamples: return "ExhaustedResamples";
    case ErrorKind::DegenerateSegment: return "DegenerateSegment";
    case ErrorKind::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

double wrap_angle(double t) {
    double r = std::fmod(t + kPi, kTwoPi);
    if (r < 0) r += kTwoPi;
    r -= kPi;
    return r >= kPi ? r - kTwoPi : r;
}

double torus_distance_to_zero(const std::vector<double>& theta) {
    double s = 0.0;
    for (double t : theta) {
        double w = wrap_angle(t);
        s += w * w;
    }
    return std::sqrt(s);
}

Lift to_lift(const std::vector<double>& v) {
    Lift out;
    out.reserve(v.size());
    for (double x : v) out.emplace_back(x);
    return out;
}

std::vector<double> to_doubles(const Lift& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(x.convert_to<double>());
    return out;
}

IntMatrix::IntMatrix(int d) : d_(d), a_(static_cast<std::size_t>(d * d)) {}

IntMatrix IntMatrix::identity(int d) {
    IntMatrix m(d);
    for (int i = 0; i < d; ++i) m(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
    IntMatrix r(d_);
    for (int i = 0; i < d_; ++i)
        for (int k = 0; k < d_; ++k) {
            if ((*this)(i, k) == 0) continue;
            for (int j = 0; j < d_; ++j) r(i, j) += (*this)(i, k) * o(k, j);
        }
    return r;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix r(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

void IntMatrix::add_row(int dst, int src) {
    for (int j = 0; j < d_; ++j) (*this)(dst, j) += (*this)(src, j);
}

BigInt IntMatrix::row_sum(int i) const {
    BigInt s = 0;
    for (int j = 0; j < d_; ++j) s += (*this)(i, j);
    return s;
}

// Fraction-free Bareiss elimination.
BigInt IntMatrix::determinant() const {
    if (d_ == 0) return 1;
    std::vector<BigInt> m = a_;
    auto at = [&](int i, int j) -> BigInt& { return m[static_cast<std::size_t>(i * d_ + j)]; };
    int sign = 1;
    BigInt prev = 1;
    for (int k = 0; k < d_ - 1; ++k) {
        if (at(k, k) == 0) {
            int p = k + 1;
            while (p < d_ && at(p, k) == 0) ++p;
            if (p == d_) return 0;
            for (int j = 0; j < d_; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (int i = k + 1; i < d_; ++i)
            for (int j = k + 1; j < d_; ++j) at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
        prev = at(k, k);
    }
    return sign * at(d_ - 1, d_ - 1);
}

std::size_t IntMatrix::max_bits() const {
    std::size_t b = 1;
    for (const auto& x : a_)
        if (x != 0) b = std::max<std::size_t>(b, boost::multiprecision::msb(boost::multiprecision::abs(x)) + 1);
    return b;
}

bool IntMatrix::nonnegative() const {
    for (const auto& x : a_)
        if (x < 0) return false;
    return true;
}

}  // namespace ietpwi
