#pragma once

#include <string>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace slelab {

struct WalkScheme {
    enum class Type { WalkOnSpheres, FixedStep };
    Type type = Type::WalkOnSpheres;
    double h = 0.0;  // FixedStep only; 0 picks 1e-3 * domain scale

    static WalkScheme wos() { return WalkScheme{}; }
    static WalkScheme fixed_step(double h = 0.0) {
        return WalkScheme{Type::FixedStep, h};
    }
};

// Sets whose first visit is recorded during a walk.  CircleArc wraps a
// crosscut; Segment is an interval in the plane; TwoRays is the real-axis
// complement (-inf,a] U [b,inf) of a bounded window, i.e. one crosscut of
// the extended line through infinity.
struct TrackedSet {
    enum class Kind { CircleArc, Segment, TwoRays };
    Kind kind = Kind::Segment;
    Crosscut arc;
    Cpx a{0.0, 0.0}, b{0.0, 0.0};

    static TrackedSet from_crosscut(const Crosscut& c);
    static TrackedSet segment(const Cpx& a, const Cpx& b);
    static TrackedSet two_rays(double a, double b);

    double distance(const Cpx& z) const;
    bool segment_crosses(const Cpx& z0, const Cpx& z1, double* t_first = nullptr) const;
};

struct WalkOptions {
    double eps_abs = 0.0;  // absorption shell; 0 picks 1e-4 * domain scale
    long long step_budget = 10000000;
    // Stop at the first tracked-set visit instead of recording and walking on.
    bool absorb_tracked = false;
};

struct WalkOutcome {
    Cpx exit_point{0.0, 0.0};
    int exit_piece = -1;
    std::string exit_label;
    std::vector<char> visited;   // one flag per tracked set
    int tracked_hit = -1;        // absorbing mode: which set ended the walk
    long long steps = 0;
};

WalkOutcome walk_to_boundary(const DomainModel& domain, const Cpx& start,
                             const WalkScheme& scheme, const std::vector<TrackedSet>& tracked,
                             RngStream& rng, const WalkOptions& opts = WalkOptions{});

// Piecewise Brownian increments with per-step durations.
struct BrownianIncrements {
    std::vector<double> dw;
    std::vector<double> dt;
};

// Conditionally refine each increment into `factor` sub-increments (factor a
// power of two) using Brownian bridge midpoints; endpoint sums are exact.
BrownianIncrements brownian_bridge_refine(const BrownianIncrements& coarse, int factor,
                                          RngStream& rng);

}  // namespace slelab
