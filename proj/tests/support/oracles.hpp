#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core/geometry.hpp"

namespace slelab::oracles {

// Half-plane capacity of a hull grown from the real axis, estimated from
// Brownian walks launched high above it: y * E^{iy}[Im B_exit] tends to the
// capacity as y grows, with only odd-power corrections, so a two-height
// Richardson combination leaves an O(y^-4) residual.
double brownian_hcap(const PolylineCurve& curve, std::uint64_t seed, long long n_walks);

// log conformal radius of (unit disk minus curve) seen from the origin,
// estimated as E^0[log |B_exit|].
double brownian_log_cr(const PolylineCurve& curve, std::uint64_t seed, long long n_walks);

// CDF at theta of the density proportional to sin^p on (0, pi).
double sin_power_cdf(double theta, double p);

// Two-sided Kolmogorov-Smirnov distance between a sample and a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace slelab::oracles
