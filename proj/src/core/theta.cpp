#include "theta.hpp"

#include <algorithm>
#include <cmath>

#include "complexutil.hpp"
#include "errors.hpp"

namespace slelab {

namespace {

constexpr double kCapFactor = 0.05;   // dt <= 0.05 * dist-to-pole^2
constexpr double kDtFloor = 1e-15;
constexpr int kMaxSplitDepth = 60;

struct EmState {
    double a;
    int m;
    double theta;
    RngStream* rng;
    ThetaPath* rec;         // optional
    double du_cell = 0.0;   // accumulated driving over the current cell
    long long splits = 0;

    void commit(double dt, double dw) {
        const double cot = std::cos(theta) / std::sin(theta);
        const double dth = m * a * cot * dt + dw;
        const double next = theta + dth;
        if (!(next > 0.0 && next < kPi)) {
            fail_numeric("theta step left (0, pi) after maximal splitting");
        }
        double du;
        if (m == 1) {
            du = -dw;  // noise is -dU by construction
        } else {
            du = -a * cot * dt - dw;
        }
        du_cell += du;
        theta = next;
        if (rec) {
            rec->times.push_back(rec->times.back() + dt);
            rec->theta.push_back(theta);
            rec->du.push_back(du);
            rec->dw.push_back(dw);
        }
    }

    bool fits(double dt, double dw) const {
        const double cot = std::cos(theta) / std::sin(theta);
        const double next = theta + m * a * cot * dt + dw;
        return next > 0.0 && next < kPi;
    }

    void step(double dt, double dw, int depth) {
        if (fits(dt, dw) || depth >= kMaxSplitDepth) {
            commit(dt, dw);
            return;
        }
        ++splits;
        const double left = 0.5 * dw + 0.5 * std::sqrt(dt) * rng->gaussian();
        step(0.5 * dt, left, depth + 1);
        step(0.5 * dt, dw - left, depth + 1);
    }

    // Advances by dt_cell, holding every substep below both dt_base and the
    // pole-distance cap.
    void cell(double dt_cell, double dt_base) {
        double rem = dt_cell;
        while (rem > 0.0) {
            const double dist = std::min(theta, kPi - theta);
            const double cap = kCapFactor * dist * dist;
            if (cap < kDtFloor) {
                fail_numeric("theta reached the pole beyond integrable resolution");
            }
            double dt = std::min({rem, dt_base, cap});
            if (rem - dt < kDtFloor) dt = rem;
            step(dt, rng->gaussian_dt(dt), 0);
            rem -= dt;
        }
    }
};

void validate(double kappa, double theta0, double dt_base) {
    if (!(kappa > 0.0 && kappa <= 4.0)) fail_invalid("kappa must lie in (0, 4]");
    if (!(theta0 > 0.0 && theta0 < kPi)) fail_invalid("theta0 must lie in (0, pi)");
    if (!(dt_base > 0.0)) fail_invalid("dt_base must be positive");
}

}  // namespace

ThetaPath simulate_theta(double kappa, double theta0, double t_max, double dt_base,
                         int drift_multiple, RngStream& rng, bool record_path) {
    validate(kappa, theta0, dt_base);
    if (drift_multiple != 1 && drift_multiple != 2) {
        fail_invalid("drift multiple must be 1 or 2");
    }
    if (!(t_max >= 0.0)) fail_invalid("t_max must be nonnegative");

    ThetaPath path;
    path.drift_multiple = drift_multiple;
    path.kappa = kappa;
    path.times.push_back(0.0);
    path.theta.push_back(theta0);

    EmState st{2.0 / kappa, drift_multiple, theta0, &rng,
               record_path ? &path : nullptr};
    double t = 0.0;
    while (t < t_max) {
        const double dt = std::min(dt_base, t_max - t);
        st.cell(dt, dt_base);
        t += dt;
    }
    if (!record_path) {
        path.times = {0.0, t_max};
        path.theta = {theta0, st.theta};
    }
    path.bridge_splits = st.splits;
    return path;
}

double simulate_theta_endpoint(double kappa, double theta0, double t_max, double dt_base,
                               int drift_multiple, RngStream& rng) {
    return simulate_theta(kappa, theta0, t_max, dt_base, drift_multiple, rng, false)
        .theta.back();
}

TwoSidedDriving::TwoSidedDriving(double kappa, double theta0, double dt_grid, RngStream* rng)
    : kappa_(kappa), a_(2.0 / kappa), dt_grid_(dt_grid), theta_(theta0), rng_(rng) {
    validate(kappa, theta0, dt_grid);
}

TwoSidedDriving::Step TwoSidedDriving::advance() {
    EmState st{a_, 2, theta_, rng_, nullptr};
    st.cell(dt_grid_, dt_grid_);
    theta_ = st.theta;
    bridge_splits_ += st.splits;
    return {st.du_cell, theta_};
}

}  // namespace slelab
