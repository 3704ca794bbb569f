#pragma once

#include <vector>

#include "rng.hpp"

namespace slelab {

// Angle diffusion d(Theta) = m * a * cot(Theta) dt + dW on (0, pi), a = 2/kappa.
// m = 1 is the boundary-point angle under the plain flow (noise = -dU);
// m = 2 is the two-sided case, where the driving satisfies
// dU = -a cot(Theta) dt - dW and the stationary density is prop. to sin^{4a}.
struct ThetaPath {
    std::vector<double> times;   // integration grid, substeps included
    std::vector<double> theta;   // same size as times
    std::vector<double> du;      // driving increment over (times[i], times[i+1])
    std::vector<double> dw;      // noise increment over the same interval
    int drift_multiple = 1;
    double kappa = 0.0;
    long long bridge_splits = 0;  // emergency halvings beyond the dt cap rule
};

// Integrates with dt <= 0.05 * min(theta, pi - theta)^2 near the poles; a
// proposal leaving (0, pi) is bridge-halved, and a step that cannot be saved
// raises a numeric failure (values are never clamped).
ThetaPath simulate_theta(double kappa, double theta0, double t_max, double dt_base,
                         int drift_multiple, RngStream& rng, bool record_path = true);

// Endpoint-only variant for long stationarity runs.
double simulate_theta_endpoint(double kappa, double theta0, double t_max, double dt_base,
                               int drift_multiple, RngStream& rng);

// Incremental driving generator for the two-sided sampler: aggregates the
// sub-stepped SDE over fixed grid cells of width dt_grid.
class TwoSidedDriving {
public:
    TwoSidedDriving(double kappa, double theta0, double dt_grid, RngStream* rng);

    struct Step {
        double du;     // driving increment over the grid cell
        double theta;  // angle at the end of the cell
    };
    Step advance();

    double theta() const { return theta_; }
    long long bridge_splits() const { return bridge_splits_; }

private:
    double kappa_, a_, dt_grid_;
    double theta_;
    RngStream* rng_;
    long long bridge_splits_ = 0;
};

}  // namespace slelab
