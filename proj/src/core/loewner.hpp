#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "complexutil.hpp"
#include "geometry.hpp"
#include "rng.hpp"
#include "theta.hpp"

namespace slelab {

// Piecewise-constant driving record: values[k] at knot times[k], held on
// [times[k], times[k+1]) during the flow.
struct DrivingFunction {
    std::vector<double> times;
    std::vector<double> values;
};

struct SleCurveSample {
    std::string kind;  // "chordal" | "radial" | "two_sided_radial"
    double kappa = 0.0;
    double theta = 0.0;  // two-sided opening angle, else 0
    double dt_base = 0.0;
    std::string stop_criterion;
    PolylineCurve curve;  // tips at the driving knots
    DrivingFunction driving;
};

// Chordal hull in the upper half plane, capacity parametrized with
// hcap(t) = a t, a = 2/kappa. Each committed step welds in a straight
// slit matched to the knot pair (dt, du): the driving runs square-root
// shaped between consecutive knots, so each piece attaches at the
// previous tip and the trace never jumps along the boundary.
class ChordalHull {
public:
    explicit ChordalHull(double kappa);

    void push(double dt, double du);
    std::size_t steps() const { return al_.size(); }
    double time() const { return t_.back(); }
    double u_end() const { return u_.back(); }
    double a() const { return a_; }

    Cpx tip() const { return tip_with(0.0, 0.0); }
    // Tip if one more step (dt, du) were committed; state is unchanged.
    Cpx tip_with(double dt, double du) const;

    // Forward transport of an interior point through all committed maps.
    // deriv (optional) accumulates the complex derivative of the map.
    // Returns the image; sets *swallowed and stops early if the point is
    // absorbed by the hull.
    Cpx map_forward(Cpx z, Cpx* deriv = nullptr, bool* swallowed = nullptr) const;
    // Inverse transport of a point of the reference half plane.
    Cpx map_back(Cpx w) const;

    const std::vector<double>& knot_times() const { return t_; }
    const std::vector<double>& knot_values() const { return u_; }

private:
    double a_;
    std::vector<double> t_, u_;    // knots, size steps()+1
    std::vector<double> uL_;       // base driving value per step (left knot)
    std::vector<double> al_, ell_; // slit angle / pi and preimage width per step
};

// Radial hull in the unit disk, curve started at z = 1, flow normalized at 0
// so the conformal radius of 0 is exp(-2 a t). Internally the point
// e^{2iL} is tracked as s = e^{i(L - u)} relative to the current driving,
// so each elementary map is one square root plus a rotation.
class RadialHull {
public:
    explicit RadialHull(double kappa);

    void push(double dt, double du);
    std::size_t steps() const { return f_.size(); }
    double time() const { return t_.back(); }
    double u_end() const { return u_.back(); }
    double a() const { return a_; }
    double conformal_radius() const;  // of the origin in the slit disk

    Cpx tip() const { return tip_with(0.0, 0.0); }
    Cpx tip_with(double dt, double du) const;

    Cpx map_forward(Cpx z, Cpx* deriv = nullptr, bool* swallowed = nullptr) const;
    Cpx map_back(Cpx w) const;

    const std::vector<double>& knot_times() const { return t_; }
    const std::vector<double>& knot_values() const { return u_; }

private:
    double a_;
    std::vector<double> t_, u_;
    std::vector<double> uL_;
    std::vector<double> f_;    // e^{a dt} per step
    std::vector<Cpx> rot_;     // e^{i du} per step
};

// Adaptive tracing ----------------------------------------------------------

struct TraceLimits {
    double t_cap = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 400000;
    double dt_min = 1e-12;
    double dt_max = 0.0;  // 0: capped at dt_base (uniform unless refined)
};

struct TraceHooks {
    // Target chord length near tip position z; return 0 for "no constraint".
    std::function<double(const Cpx&)> delta_target;
    // Observes each committed chord; return true to stop the trace.
    std::function<bool(const Cpx&, const Cpx&, double)> on_segment;
};

// Samplers -------------------------------------------------------------------
// delta_max > 0 turns on spatial refinement of the uniform dt_base grid:
// any step whose tip chord exceeds delta_max is bridge-halved in place.
SleCurveSample sample_chordal(double kappa, double dt_base, double t_max,
                              RngStream& rng, double delta_max = 0.0);
SleCurveSample sample_radial(double kappa, double dt_base, double t_max,
                             RngStream& rng, double delta_max = 0.0);
// Two-sided radial through the origin with initial opening angle theta; runs
// until the conformal radius of the origin drops to cr_stop.
SleCurveSample sample_two_sided_radial(double kappa, double theta, double dt_base,
                                       double cr_stop, RngStream& rng,
                                       double delta_rel = 0.0);

// Experiment-grade tracers with full hook control. The hull argument carries
// the state and can be inspected afterwards.
SleCurveSample trace_chordal(ChordalHull& hull, double dt_base, const TraceLimits& lim,
                             const TraceHooks& hooks, RngStream& rng);
SleCurveSample trace_radial(RadialHull& hull, double dt_base, const TraceLimits& lim,
                            const TraceHooks& hooks, RngStream& rng);
// Driving comes from the two-sided angle SDE at grid dt_base; coarse steps
// aggregate whole grid cells, so refinement never regenerates randomness.
SleCurveSample trace_two_sided(RadialHull& hull, double kappa, double theta,
                               double dt_base, const TraceLimits& lim,
                               const TraceHooks& hooks, RngStream& rng);

// Green's function normalization; c_hat is a fixed reference constant.
struct GreensParams {
    double kappa = 0.0;
    double c_hat = 1.0;
    double a() const { return 2.0 / kappa; }
    double d() const { return 1.0 + kappa / 8.0; }
};

// c_hat * (Im zeta)^(d-2) * sin(arg zeta)^(4a-1) on the upper half plane.
double greens_half_plane(Cpx zeta, const GreensParams& gp);
// c_hat * sin(theta)^(4a-1): two-sided chart at the disk center, marked
// boundary points 1 and e^{2 i theta}.
double greens_disk_center(double theta, const GreensParams& gp);
// sin(arg(g(zeta) - u_end)) under the committed chordal flow; returns NaN if
// zeta has been swallowed.
double sle_sin_function(const ChordalHull& hull, Cpx zeta);

}  // namespace slelab
