#pragma once

#include <string>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"
#include "walks.hpp"

namespace slelab {

struct MeasureEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    long long n = 0;
    double ci_lo = 0.0, ci_hi = 0.0;

    static MeasureEstimate from_bernoulli(long long hits, long long n, double scale = 1.0);
    // mean and centered second-moment sum (sum of (x - mean)^2).
    static MeasureEstimate from_moments(double mean, double m2, long long n);
};

// P{exit through the boundary pieces carrying target_label}.
MeasureEstimate harmonic_measure(const DomainModel& domain, const Cpx& z,
                                 const std::string& target_label, long long n, RngStream& rng,
                                 const WalkScheme& scheme = WalkScheme::wos(),
                                 const WalkOptions& opts = WalkOptions{});

// P{some tracked set is visited before absorption}.
MeasureEstimate visit_probability(const DomainModel& domain, const Cpx& z,
                                  const std::vector<TrackedSet>& tracked, long long n,
                                  RngStream& rng, const WalkScheme& scheme = WalkScheme::wos(),
                                  const WalkOptions& opts = WalkOptions{});

// One side of an excursion-measure estimate.  Launch points are sampled
// uniformly by arc length; interior sets absorb walks on both sides unless a
// normal sign picks one.
struct ExcSide {
    enum class Kind { PieceLabel, Circle, Arc, Polyline };
    Kind kind = Kind::PieceLabel;
    std::string label;
    CircleSpec circle;
    Crosscut arc;
    PolylineCurve curve;
    // Circles/arcs: +1 launches outward, -1 inward.  Polylines: 0 samples
    // both sides (the set is a two-sided slit), +1/-1 restricts to the left/
    // right of the traversal direction.
    int normal_sign = 0;

    static ExcSide piece(std::string label);
    static ExcSide circle_set(const CircleSpec& c, int normal_sign);
    static ExcSide arc_set(const Crosscut& c, int normal_sign);
    static ExcSide polyline(PolylineCurve c, int normal_sign = 0);

    double length() const;  // includes both sides for two-sided polylines
    // Point at arc-length fraction u plus the unit offset direction; side
    // picks the face for two-sided polylines.
    void point_normal(double u, int side, Cpx* v, Cpx* nrm) const;
    bool is_boundary_piece() const { return kind == Kind::PieceLabel; }
    TrackedSet as_tracked() const;  // interior kinds only
};

struct ExcursionResult {
    MeasureEstimate at_eps;       // (length/eps)-scaled hit rate at epsilon
    MeasureEstimate at_half_eps;  // same at epsilon/2
    double richardson = 0.0;      // 2*at_half_eps - at_eps (removes O(eps))
    double richardson_std_err = 0.0;
    double epsilon = 0.0;
    long long resampled = 0;  // launches that needed a locally smaller offset
};

// Estimate of exc_D(V, W) = int_V lim eps^-1 h_{D \ (V u W)}(v + eps n_v, W).
// Runs n launches at epsilon and n at epsilon/2.
ExcursionResult excursion_measure(const DomainModel& domain, const ExcSide& V, const ExcSide& W,
                                  double epsilon, long long n, RngStream& rng,
                                  const WalkOptions& opts = WalkOptions{});

// Exact values for the rectangle [0,L] x [0,pi]: excursion measure between
// the two vertical sides, and the extremal length of the crossing family.
double rectangle_excursion_exact(double L);
double rectangle_extremal_length(double L);
// Exact excursion measure between the two circles of an annulus with radii
// e^{-r} > e^{-s}.
double annulus_excursion_exact(double r, double s);

struct CrosscutVisitStats {
    MeasureEstimate expected_visits;
    MeasureEstimate hit_circle_prob;
    std::vector<MeasureEstimate> per_crosscut;
    std::vector<Crosscut> crosscuts;
};

// FixedStep walks from z counting distinct crosscuts of the circle visited
// before absorption.
CrosscutVisitStats crosscut_visit_stats(const DomainModel& domain, const Cpx& z,
                                        const CircleSpec& circle, long long n, RngStream& rng,
                                        const WalkScheme& scheme = WalkScheme::fixed_step(),
                                        const WalkOptions& opts = WalkOptions{});

struct CrosscutSumResult {
    std::vector<ExcursionResult> per_crosscut;  // exc(V, eta) for each crosscut
    ExcursionResult whole;                      // exc(V, full target circle)
    double sum_mean = 0.0;
    double sum_std_err = 0.0;
};

// Excursion from circle C_r to each crosscut of C_s and to the whole circle.
CrosscutSumResult excursion_sum_over_crosscuts(const DomainModel& domain, const CircleSpec& source,
                                               const CircleSpec& target, double epsilon,
                                               long long n, RngStream& rng);

}  // namespace slelab
