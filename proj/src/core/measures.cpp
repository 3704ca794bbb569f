#include "measures.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace slelab {

MeasureEstimate MeasureEstimate::from_bernoulli(long long hits, long long n, double scale) {
    if (n <= 0) fail_invalid("estimate needs at least one sample");
    MeasureEstimate e;
    const double p = double(hits) / double(n);
    e.mean = scale * p;
    e.std_err = scale * std::sqrt(std::max(0.0, p * (1.0 - p) / double(n)));
    e.n = n;
    e.ci_lo = e.mean - 1.96 * e.std_err;
    e.ci_hi = e.mean + 1.96 * e.std_err;
    return e;
}

MeasureEstimate MeasureEstimate::from_moments(double mean, double m2, long long n) {
    if (n <= 0) fail_invalid("estimate needs at least one sample");
    MeasureEstimate e;
    e.mean = mean;
    e.std_err = n > 1 ? std::sqrt(std::max(0.0, m2 / (double(n) * double(n - 1)))) : 0.0;
    e.n = n;
    e.ci_lo = e.mean - 1.96 * e.std_err;
    e.ci_hi = e.mean + 1.96 * e.std_err;
    return e;
}

namespace {

std::vector<int> pieces_with_label(const DomainModel& domain, const std::string& label) {
    std::vector<int> out;
    for (size_t i = 0; i < domain.pieces().size(); ++i) {
        if (domain.pieces()[i].label == label) out.push_back(int(i));
    }
    if (out.empty()) fail_invalid("no boundary piece carries label '" + label + "'");
    return out;
}

}  // namespace

MeasureEstimate harmonic_measure(const DomainModel& domain, const Cpx& z,
                                 const std::string& target_label, long long n, RngStream& rng,
                                 const WalkScheme& scheme, const WalkOptions& opts) {
    const std::vector<int> targets = pieces_with_label(domain, target_label);
    long long hits = 0;
    for (long long i = 0; i < n; ++i) {
        WalkOutcome out = walk_to_boundary(domain, z, scheme, {}, rng, opts);
        if (std::find(targets.begin(), targets.end(), out.exit_piece) != targets.end()) ++hits;
    }
    return MeasureEstimate::from_bernoulli(hits, n);
}

MeasureEstimate visit_probability(const DomainModel& domain, const Cpx& z,
                                  const std::vector<TrackedSet>& tracked, long long n,
                                  RngStream& rng, const WalkScheme& scheme,
                                  const WalkOptions& opts) {
    WalkOptions wo = opts;
    wo.absorb_tracked = true;  // any first visit decides the indicator
    long long hits = 0;
    for (long long i = 0; i < n; ++i) {
        WalkOutcome out = walk_to_boundary(domain, z, scheme, tracked, rng, wo);
        if (out.tracked_hit >= 0) ++hits;
    }
    return MeasureEstimate::from_bernoulli(hits, n);
}

// ExcSide ---------------------------------------------------------------------

ExcSide ExcSide::piece(std::string label) {
    ExcSide s;
    s.kind = Kind::PieceLabel;
    s.label = std::move(label);
    return s;
}

ExcSide ExcSide::circle_set(const CircleSpec& c, int normal_sign) {
    if (normal_sign == 0) fail_invalid("circle excursion side needs a normal sign");
    ExcSide s;
    s.kind = Kind::Circle;
    s.circle = c;
    s.normal_sign = normal_sign;
    return s;
}

ExcSide ExcSide::arc_set(const Crosscut& c, int normal_sign) {
    ExcSide s;
    s.kind = Kind::Arc;
    s.arc = c;
    s.normal_sign = normal_sign;
    return s;
}

ExcSide ExcSide::polyline(PolylineCurve c, int normal_sign) {
    if (c.points.size() < 2) fail_invalid("polyline excursion side needs >= 2 points");
    ExcSide s;
    s.kind = Kind::Polyline;
    s.curve = std::move(c);
    s.normal_sign = normal_sign;
    return s;
}

double ExcSide::length() const {
    switch (kind) {
        case Kind::PieceLabel:
            fail_invalid("piece-label side length requires the domain");
        case Kind::Circle:
            return 2.0 * kPi * circle.radius();
        case Kind::Arc:
            return arc.length() * (normal_sign == 0 ? 2.0 : 1.0);
        case Kind::Polyline: {
            double len = 0.0;
            for (size_t i = 0; i + 1 < curve.points.size(); ++i)
                len += std::abs(curve.points[i + 1] - curve.points[i]);
            return len * (normal_sign == 0 ? 2.0 : 1.0);
        }
    }
    return 0.0;
}

void ExcSide::point_normal(double u, int side, Cpx* v, Cpx* nrm) const {
    const int sgn = normal_sign != 0 ? normal_sign : side;
    switch (kind) {
        case Kind::PieceLabel:
            fail_invalid("piece-label sides are sampled via the domain");
        case Kind::Circle: {
            const double phi = 2.0 * kPi * u;
            const Cpx dir(std::cos(phi), std::sin(phi));
            *v = circle.center + circle.radius() * dir;
            *nrm = double(sgn) * dir;
            return;
        }
        case Kind::Arc: {
            const double span = arc.angular_measure();
            const double phi = arc.ang0 + u * span;
            const Cpx dir(std::cos(phi), std::sin(phi));
            *v = arc.circle.center + arc.circle.radius() * dir;
            *nrm = double(sgn) * dir;
            return;
        }
        case Kind::Polyline: {
            double total = 0.0;
            for (size_t i = 0; i + 1 < curve.points.size(); ++i)
                total += std::abs(curve.points[i + 1] - curve.points[i]);
            double want = u * total;
            for (size_t i = 0; i + 1 < curve.points.size(); ++i) {
                const double seg = std::abs(curve.points[i + 1] - curve.points[i]);
                if (want <= seg || i + 2 == curve.points.size()) {
                    const double f = seg > 0.0 ? std::min(1.0, want / seg) : 0.0;
                    const Cpx tan = (curve.points[i + 1] - curve.points[i]) / seg;
                    *v = curve.points[i] + f * (curve.points[i + 1] - curve.points[i]);
                    *nrm = double(sgn) * Cpx(-tan.imag(), tan.real());
                    return;
                }
                want -= seg;
            }
            fail_numeric("polyline sampling fell off the end");
        }
    }
}

TrackedSet ExcSide::as_tracked() const {
    switch (kind) {
        case Kind::Circle: {
            Crosscut full;
            full.circle = circle;
            full.closed = true;
            full.ang0 = 0.0;
            full.ang1 = 2.0 * kPi;
            return TrackedSet::from_crosscut(full);
        }
        case Kind::Arc:
            return TrackedSet::from_crosscut(arc);
        default:
            fail_invalid("this excursion side has no single tracked-set form");
    }
}

// Excursion estimate ------------------------------------------------------------

namespace {

// Uniform-by-length launch sampling, resolved against the domain for
// boundary-piece sides.
struct LaunchSampler {
    struct Part {
        bool is_arc = false;
        Cpx a{0.0, 0.0}, b{0.0, 0.0};  // segment
        Cpx center{0.0, 0.0};
        double radius = 0.0, ang0 = 0.0, span = 0.0;  // arc
        double len = 0.0;
        int sign = 0;  // fixed normal sign; 0 = both sides
    };
    std::vector<Part> parts;
    std::vector<double> cum;
    double total = 0.0;

    void add(const Part& p) {
        parts.push_back(p);
        total += p.len * (p.sign == 0 ? 2.0 : 1.0);
        cum.push_back(total);
    }

    void sample(RngStream& rng, Cpx* v, Cpx* nrm) const {
        const double want = rng.uniform01() * total;
        size_t i = size_t(std::lower_bound(cum.begin(), cum.end(), want) - cum.begin());
        if (i >= parts.size()) i = parts.size() - 1;
        const Part& p = parts[i];
        const double prev = i == 0 ? 0.0 : cum[i - 1];
        double local = want - prev;
        int side = p.sign;
        if (p.sign == 0) {
            const double one = p.len;
            side = local < one ? 1 : -1;
            if (local >= one) local -= one;
        }
        const double u = p.len > 0.0 ? std::min(1.0, local / p.len) : 0.0;
        if (p.is_arc) {
            const double phi = p.ang0 + u * p.span;
            const Cpx dir(std::cos(phi), std::sin(phi));
            *v = p.center + p.radius * dir;
            *nrm = double(side) * dir;
        } else {
            const Cpx d = p.b - p.a;
            const Cpx tan = d / std::abs(d);
            *v = p.a + u * d;
            *nrm = double(side) * Cpx(-tan.imag(), tan.real());
        }
    }
};

LaunchSampler build_sampler(const DomainModel& domain, const ExcSide& side) {
    LaunchSampler s;
    auto add_segment = [&](const Cpx& a, const Cpx& b, int sign) {
        LaunchSampler::Part p;
        p.a = a;
        p.b = b;
        p.len = std::abs(b - a);
        p.sign = sign;
        if (p.len > 0.0) s.add(p);
    };
    auto add_arc = [&](const Cpx& c, double R, double ang0, double span, int sign) {
        LaunchSampler::Part p;
        p.is_arc = true;
        p.center = c;
        p.radius = R;
        p.ang0 = ang0;
        p.span = span;
        p.len = R * span;
        p.sign = sign;
        if (p.len > 0.0) s.add(p);
    };

    switch (side.kind) {
        case ExcSide::Kind::PieceLabel: {
            const double probe = 1e-7 * domain.scale();
            for (int idx : pieces_with_label(domain, side.label)) {
                const BoundaryPiece& bp = domain.pieces()[size_t(idx)];
                if (bp.kind == BoundaryPiece::Kind::Segment) {
                    const Cpx mid = 0.5 * (bp.a + bp.b);
                    const Cpx tan = (bp.b - bp.a) / std::abs(bp.b - bp.a);
                    const Cpx left(-tan.imag(), tan.real());
                    const int sign = domain.contains(mid + probe * left) ? 1 : -1;
                    add_segment(bp.a, bp.b, sign);
                } else if (bp.kind == BoundaryPiece::Kind::Arc) {
                    const double span = bp.ang1 - bp.ang0;
                    const double mid = bp.ang0 + 0.5 * span;
                    const Cpx dir(std::cos(mid), std::sin(mid));
                    const Cpx probe_pt =
                        bp.circle.center + (bp.circle.radius() + probe) * dir;
                    const int sign = domain.contains(probe_pt) ? 1 : -1;
                    add_arc(bp.circle.center, bp.circle.radius(), bp.ang0, span, sign);
                } else {
                    fail_invalid("unsupported boundary piece kind for excursion side");
                }
            }
            break;
        }
        case ExcSide::Kind::Circle:
            add_arc(side.circle.center, side.circle.radius(), 0.0, 2.0 * kPi,
                    side.normal_sign);
            break;
        case ExcSide::Kind::Arc:
            add_arc(side.arc.circle.center, side.arc.circle.radius(), side.arc.ang0,
                    side.arc.angular_measure(), side.normal_sign);
            break;
        case ExcSide::Kind::Polyline:
            for (size_t i = 0; i + 1 < side.curve.points.size(); ++i)
                add_segment(side.curve.points[i], side.curve.points[i + 1], side.normal_sign);
            break;
    }
    if (s.total <= 0.0) fail_invalid("excursion side has zero length");
    return s;
}

std::vector<TrackedSet> side_tracked(const ExcSide& side) {
    std::vector<TrackedSet> out;
    switch (side.kind) {
        case ExcSide::Kind::PieceLabel:
            break;  // the domain already absorbs there
        case ExcSide::Kind::Circle:
        case ExcSide::Kind::Arc:
            out.push_back(side.as_tracked());
            break;
        case ExcSide::Kind::Polyline:
            for (size_t i = 0; i + 1 < side.curve.points.size(); ++i)
                out.push_back(TrackedSet::segment(side.curve.points[i], side.curve.points[i + 1]));
            break;
    }
    return out;
}

struct Pass {
    double mean = 0.0, m2 = 0.0;
    long long n = 0, resampled = 0;
};

}  // namespace

ExcursionResult excursion_measure(const DomainModel& domain, const ExcSide& V, const ExcSide& W,
                                  double epsilon, long long n, RngStream& rng,
                                  const WalkOptions& opts) {
    if (!(epsilon > 0.0)) fail_invalid("epsilon must be positive");
    if (n <= 0) fail_invalid("sample count must be positive");

    const LaunchSampler sampler = build_sampler(domain, V);
    std::vector<TrackedSet> tracked = side_tracked(V);
    const int n_v = int(tracked.size());
    std::vector<TrackedSet> wt = side_tracked(W);
    tracked.insert(tracked.end(), wt.begin(), wt.end());
    std::vector<int> w_pieces;
    if (W.is_boundary_piece()) w_pieces = pieces_with_label(domain, W.label);

    WalkOptions wo = opts;
    wo.absorb_tracked = true;

    auto run_pass = [&](double eps) {
        Pass pass;
        for (long long i = 0; i < n; ++i) {
            Cpx v, nrm;
            sampler.sample(rng, &v, &nrm);
            double el = eps;
            int tries = 0;
            Cpx z0 = v + el * nrm;
            while (tries < 9 && !domain.contains(z0)) {
                ++tries;
                el *= 0.5;
                z0 = v + el * nrm;
            }
            double x = 0.0;
            if (tries < 9) {
                if (tries > 0) ++pass.resampled;
                WalkOutcome out = walk_to_boundary(domain, z0, WalkScheme::wos(), tracked, rng, wo);
                bool success;
                if (out.tracked_hit >= 0) {
                    success = out.tracked_hit >= n_v;
                } else {
                    success = !w_pieces.empty() &&
                              std::find(w_pieces.begin(), w_pieces.end(), out.exit_piece) !=
                                  w_pieces.end();
                }
                if (success) x = sampler.total / el;
            } else {
                ++pass.resampled;  // no valid offset found; counts as a miss
            }
            ++pass.n;
            const double d = x - pass.mean;
            pass.mean += d / double(pass.n);
            pass.m2 += d * (x - pass.mean);
        }
        return pass;
    };

    const Pass full = run_pass(epsilon);
    const Pass half = run_pass(0.5 * epsilon);

    ExcursionResult res;
    res.epsilon = epsilon;
    res.at_eps = MeasureEstimate::from_moments(full.mean, full.m2, full.n);
    res.at_half_eps = MeasureEstimate::from_moments(half.mean, half.m2, half.n);
    res.richardson = 2.0 * res.at_half_eps.mean - res.at_eps.mean;
    res.richardson_std_err = std::sqrt(4.0 * res.at_half_eps.std_err * res.at_half_eps.std_err +
                                       res.at_eps.std_err * res.at_eps.std_err);
    res.resampled = full.resampled + half.resampled;
    return res;
}

// Closed forms -----------------------------------------------------------------

double rectangle_excursion_exact(double L) {
    if (!(L > 0.0)) fail_invalid("rectangle length must be positive");
    // Separation of variables for h with h=1 on one side of length pi:
    // exc = (8/pi) sum over odd k of 1/(k sinh(kL)), which decays like
    // (16/pi) e^{-L}.  The bare e^{-L} often quoted for this rectangle is
    // the decay form only; the annulus value fixes the normalization used
    // here (see annulus_excursion_exact).
    double sum = 0.0;
    for (int k = 1; k < 400; k += 2) {
        const double term = 1.0 / (k * std::sinh(k * L));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return (8.0 / kPi) * sum;
}

double rectangle_extremal_length(double L) {
    if (!(L > 0.0)) fail_invalid("rectangle length must be positive");
    return L / kPi;
}

double annulus_excursion_exact(double r, double s) {
    if (!(s > r)) fail_invalid("annulus needs s > r (inner radius e^{-s} smaller)");
    return 2.0 * kPi / (s - r);
}

// Crosscut statistics ------------------------------------------------------------

CrosscutVisitStats crosscut_visit_stats(const DomainModel& domain, const Cpx& z,
                                        const CircleSpec& circle, long long n, RngStream& rng,
                                        const WalkScheme& scheme, const WalkOptions& opts) {
    CrosscutVisitStats stats;
    stats.crosscuts = extract_crosscuts(domain, circle);
    std::vector<TrackedSet> tracked;
    tracked.reserve(stats.crosscuts.size());
    for (const Crosscut& c : stats.crosscuts) tracked.push_back(TrackedSet::from_crosscut(c));

    std::vector<long long> hits(tracked.size(), 0);
    long long any_hits = 0;
    double mean = 0.0, m2 = 0.0;
    for (long long i = 0; i < n; ++i) {
        WalkOutcome out = walk_to_boundary(domain, z, scheme, tracked, rng, opts);
        long long visits = 0;
        for (size_t k = 0; k < tracked.size(); ++k) {
            if (out.visited[k]) {
                ++visits;
                ++hits[k];
            }
        }
        if (visits > 0) ++any_hits;
        const double x = double(visits);
        const double d = x - mean;
        mean += d / double(i + 1);
        m2 += d * (x - mean);
    }

    stats.per_crosscut.reserve(tracked.size());
    double mean_sum = 0.0;
    for (size_t k = 0; k < tracked.size(); ++k) {
        stats.per_crosscut.push_back(MeasureEstimate::from_bernoulli(hits[k], n));
        mean_sum += stats.per_crosscut.back().mean;
    }
    stats.expected_visits = MeasureEstimate::from_moments(mean, m2, n);
    stats.expected_visits.mean = mean_sum;  // exact per-crosscut additivity
    stats.hit_circle_prob = MeasureEstimate::from_bernoulli(any_hits, n);
    return stats;
}

CrosscutSumResult excursion_sum_over_crosscuts(const DomainModel& domain, const CircleSpec& source,
                                               const CircleSpec& target, double epsilon,
                                               long long n, RngStream& rng) {
    CrosscutSumResult res;
    const int sign = source.radius() < target.radius() ? 1 : -1;
    const ExcSide V = ExcSide::circle_set(source, sign);

    const std::vector<Crosscut> cuts = extract_crosscuts(domain, target);
    if (cuts.empty()) fail_invalid("target circle does not meet the domain");
    for (const Crosscut& c : cuts) {
        res.per_crosscut.push_back(
            excursion_measure(domain, V, ExcSide::arc_set(c, 0), epsilon, n, rng));
    }
    res.whole = excursion_measure(domain, V, ExcSide::circle_set(target, 1), epsilon, n, rng);

    double var = 0.0;
    for (const ExcursionResult& r : res.per_crosscut) {
        res.sum_mean += r.richardson;
        var += r.richardson_std_err * r.richardson_std_err;
    }
    res.sum_std_err = std::sqrt(var);
    return res;
}

}  // namespace slelab
