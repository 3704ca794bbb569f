#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace slelab {

using Cpx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

// Point at infinity is a label, never a coordinate fed into arithmetic.
inline Cpx infinity_point() {
    return Cpx(std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity());
}
inline bool is_infinity_point(const Cpx& z) {
    return std::isinf(z.real()) || std::isinf(z.imag());
}
inline bool is_finite_point(const Cpx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline double sq(double x) { return x * x; }
inline double abs2(const Cpx& z) { return z.real() * z.real() + z.imag() * z.imag(); }

// Square root with image in the closed upper half plane (cut along [0, inf)).
// Boundary values follow the limit from Im > 0, which signed zeros preserve.
inline Cpx sqrt_upper(const Cpx& w) {
    return Cpx(0.0, 1.0) * std::sqrt(-w);
}

// arccos branch with image in {Re in (-pi, pi], Im >= 0}.  Of the two roots
// q, 1/q of q^2 - 2*eta*q + 1 = 0 it keeps |q| <= 1, so Im(acos) = -ln|q| >= 0.
inline Cpx acos_upper(const Cpx& eta) {
    Cpx s = std::sqrt(eta * eta - 1.0);
    Cpx q1 = eta - s, q2 = eta + s;
    Cpx q = (std::abs(q1) <= std::abs(q2)) ? q1 : q2;
    Cpx lg = std::log(q);
    return Cpx(lg.imag(), -lg.real());
}

// Reduce x into (-pi/2, pi/2]; the angular chart of the disk has period pi.
inline double wrap_half_period(double x) {
    double y = std::remainder(x, kPi);
    if (y <= -kPi / 2.0) y += kPi;
    return y;
}

inline double clampd(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace slelab
