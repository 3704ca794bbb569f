#pragma once

#include <functional>
#include <vector>

namespace slelab {

// One empirical probability at abscissa x.
struct FitCell {
    double x = 0.0;
    double p_hat = 0.0;
    double std_err = 0.0;
    long long hits = 0;
    long long n = 0;
    bool included = true;  // set false when the cell is too thin to use
};

struct ExponentFit {
    double slope = 0.0;  // p(x) ~ C e^{-slope * x}
    double intercept = 0.0;
    double slope_std_err = 0.0;
    double r2 = 0.0;
    std::vector<FitCell> cells;
};

// Weighted least squares of -log p_hat against x.  Weights are the inverse
// variances of log p_hat (delta method: se / p).  Cells with fewer than
// min_hits successes are excluded from the regression and flagged.
ExponentFit fit_exponent(std::vector<FitCell> cells, long long min_hits = 10);

// One-sample Kolmogorov-Smirnov distance against a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample KS distance with the asymptotic p-value.
struct TwoSampleKs {
    double statistic = 0.0;
    double p_value = 0.0;
};
TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b);

// CDF of the stationary law of the radial angle process, density
// proportional to sin(theta)^{4a} on (0, pi).  Tabulated by quadrature at
// construction; evaluation interpolates the table.
class StationaryThetaCdf {
  public:
    explicit StationaryThetaCdf(double kappa, int panels = 4096);
    double operator()(double theta) const;
    double kappa() const { return kappa_; }

  private:
    double kappa_;
    std::vector<double> grid_;
    std::vector<double> cdf_;
};

}  // namespace slelab
