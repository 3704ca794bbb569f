#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"
#include "core/walks.hpp"

namespace slelab::oracles {

namespace {

double mean_exit_height(const DomainModel& dom, double launch_y, std::uint64_t seed,
                        std::uint64_t salt, long long n) {
    double sum = 0.0;
    for (long long k = 0; k < n; ++k) {
        RngStream rng(seed, salt * 0x100000000ull + static_cast<std::uint64_t>(k));
        const WalkOutcome out =
            walk_to_boundary(dom, Cpx(0.0, launch_y), WalkScheme::wos(), {}, rng);
        sum += std::max(0.0, out.exit_point.imag());
    }
    return sum / static_cast<double>(n);
}

}  // namespace

double brownian_hcap(const PolylineCurve& curve, std::uint64_t seed, long long n_walks) {
    double reach = 1.0;
    for (const Cpx& z : curve.points) reach = std::max(reach, std::abs(z));
    const double r1 = 8.0 * reach;
    const double r2 = 2.0 * r1;
    const DomainModel dom = DomainModel::slit_half_plane(curve);
    // The far-height mean is smaller and enters the combination with weight 4,
    // so it gets the larger share of the walk budget.
    const double a1 = r1 * mean_exit_height(dom, r1, seed, 1, n_walks);
    const double a2 = r2 * mean_exit_height(dom, r2, seed, 2, 3 * n_walks);
    return (4.0 * a2 - a1) / 3.0;
}

double brownian_log_cr(const PolylineCurve& curve, std::uint64_t seed, long long n_walks) {
    const DomainModel dom = DomainModel::slit_disk({curve});
    double sum = 0.0;
    for (long long k = 0; k < n_walks; ++k) {
        RngStream rng(seed, static_cast<std::uint64_t>(k));
        const WalkOutcome out =
            walk_to_boundary(dom, Cpx(0.0, 0.0), WalkScheme::wos(), {}, rng);
        sum += std::log(std::max(1e-12, std::abs(out.exit_point)));
    }
    return sum / static_cast<double>(n_walks);
}

double sin_power_cdf(double theta, double p) {
    theta = std::clamp(theta, 0.0, M_PI);
    const auto f = [p](double x) { return std::pow(std::sin(x), p); };
    const auto simpson = [&f](double hi) {
        const int n = 4096;  // even
        const double h = hi / n;
        double s = 0.0;
        for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
        return (s + f(0.0) + f(hi)) * h / 3.0;  // endpoint sin=0 needs p > -1
    };
    return simpson(theta) / simpson(M_PI);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

}  // namespace slelab::oracles
