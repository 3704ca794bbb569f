#include "fitting.hpp"

#include <algorithm>
#include <cmath>

#include "complexutil.hpp"
#include "errors.hpp"

namespace slelab {

ExponentFit fit_exponent(std::vector<FitCell> cells, long long min_hits) {
    ExponentFit fit;
    double S = 0.0, Sx = 0.0, Sy = 0.0, Sxx = 0.0, Sxy = 0.0;
    int used = 0;
    for (FitCell& c : cells) {
        c.included = c.hits >= min_hits && c.p_hat > 0.0 && c.std_err > 0.0;
        if (!c.included) continue;
        const double y = -std::log(c.p_hat);
        const double sigma = c.std_err / c.p_hat;
        const double w = 1.0 / (sigma * sigma);
        S += w;
        Sx += w * c.x;
        Sy += w * y;
        Sxx += w * c.x * c.x;
        Sxy += w * c.x * y;
        ++used;
    }
    if (used < 2) fail_invalid("exponent fit needs at least two usable cells");
    const double det = S * Sxx - Sx * Sx;
    if (!(det > 1e-12 * S * Sxx)) fail_invalid("exponent fit design is singular");
    fit.slope = (S * Sxy - Sx * Sy) / det;
    fit.intercept = (Sxx * Sy - Sx * Sxy) / det;
    fit.slope_std_err = std::sqrt(S / det);

    const double ybar = Sy / S;
    double ss_tot = 0.0, ss_res = 0.0;
    for (const FitCell& c : cells) {
        if (!c.included) continue;
        const double y = -std::log(c.p_hat);
        const double sigma = c.std_err / c.p_hat;
        const double w = 1.0 / (sigma * sigma);
        const double yhat = fit.slope * c.x + fit.intercept;
        ss_tot += w * (y - ybar) * (y - ybar);
        ss_res += w * (y - yhat) * (y - yhat);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.cells = std::move(cells);
    return fit;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) fail_invalid("KS statistic needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max(std::abs(f - double(i + 1) / n), std::abs(f - double(i) / n)));
    }
    return d;
}

namespace {

double ks_tail(double lambda) {
    // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) fail_invalid("two-sample KS needs samples on both sides");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    const double na = double(a.size()), nb = double(b.size());
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) {
            ++i;
        } else {
            ++j;
        }
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    TwoSampleKs out;
    out.statistic = d;
    const double ne = std::sqrt(na * nb / (na + nb));
    out.p_value = ks_tail((ne + 0.12 + 0.11 / ne) * d);
    return out;
}

StationaryThetaCdf::StationaryThetaCdf(double kappa, int panels) : kappa_(kappa) {
    if (!(kappa > 0.0)) fail_invalid("kappa must be positive");
    if (panels < 16) fail_invalid("too few quadrature panels");
    const double a = 2.0 / kappa;
    const double p = 4.0 * a;
    grid_.resize(size_t(panels) + 1);
    cdf_.resize(size_t(panels) + 1);
    const double h = kPi / panels;
    double acc = 0.0;
    double prev = 0.0;  // sin(0)^p with p > 0
    grid_[0] = 0.0;
    cdf_[0] = 0.0;
    for (int i = 1; i <= panels; ++i) {
        const double t = h * i;
        const double f = std::pow(std::sin(std::min(t, kPi)), p);
        acc += 0.5 * h * (prev + f);
        prev = f;
        grid_[size_t(i)] = t;
        cdf_[size_t(i)] = acc;
    }
    const double total = cdf_.back();
    for (double& v : cdf_) v /= total;
}

double StationaryThetaCdf::operator()(double theta) const {
    if (theta <= 0.0) return 0.0;
    if (theta >= kPi) return 1.0;
    const size_t i =
        size_t(std::upper_bound(grid_.begin(), grid_.end(), theta) - grid_.begin()) - 1;
    const size_t j = std::min(i + 1, grid_.size() - 1);
    if (j == i) return cdf_[i];
    const double f = (theta - grid_[i]) / (grid_[j] - grid_[i]);
    return cdf_[i] + f * (cdf_[j] - cdf_[i]);
}

}  // namespace slelab
