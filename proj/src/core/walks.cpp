#include "walks.hpp"

#include <cmath>

#include "errors.hpp"

namespace slelab {

TrackedSet TrackedSet::from_crosscut(const Crosscut& c) {
    TrackedSet t;
    t.kind = Kind::CircleArc;
    t.arc = c;
    return t;
}

TrackedSet TrackedSet::segment(const Cpx& a, const Cpx& b) {
    TrackedSet t;
    t.kind = Kind::Segment;
    t.a = a;
    t.b = b;
    return t;
}

TrackedSet TrackedSet::two_rays(double a, double b) {
    TrackedSet t;
    t.kind = Kind::TwoRays;
    t.a = Cpx(a, 0.0);
    t.b = Cpx(b, 0.0);
    return t;
}

double TrackedSet::distance(const Cpx& z) const {
    switch (kind) {
        case Kind::CircleArc:
            return arc.distance(z);
        case Kind::Segment:
            return dist_point_segment(z, a, b);
        case Kind::TwoRays: {
            double dl = (z.real() <= a.real()) ? std::fabs(z.imag())
                                               : std::abs(z - a);
            double dr = (z.real() >= b.real()) ? std::fabs(z.imag())
                                               : std::abs(z - b);
            return std::min(dl, dr);
        }
    }
    return std::numeric_limits<double>::infinity();
}

namespace {

std::optional<double> seg_cross_param(const Cpx& z0, const Cpx& z1, const Cpx& a, const Cpx& b) {
    BoundaryPiece p;
    p.kind = BoundaryPiece::Kind::Segment;
    p.a = a;
    p.b = b;
    return p.segment_crossing(z0, z1);
}

}  // namespace

bool TrackedSet::segment_crosses(const Cpx& z0, const Cpx& z1, double* t_first) const {
    switch (kind) {
        case Kind::CircleArc: {
            std::vector<double> params;
            segment_circle_params(z0, z1, arc.circle.center, arc.circle.radius(), params);
            double span = arc.angular_measure();
            double base = normalize_angle(arc.ang0);
            bool found = false;
            double best = 2.0;
            for (double t : params) {
                Cpx p = z0 + t * (z1 - z0);
                double phi = normalize_angle(std::arg(p - arc.circle.center) - base);
                if (arc.closed || phi <= span) {
                    found = true;
                    best = std::min(best, t);
                }
            }
            if (found && t_first) *t_first = best;
            return found;
        }
        case Kind::Segment: {
            auto t = seg_cross_param(z0, z1, a, b);
            if (t && t_first) *t_first = *t;
            return bool(t);
        }
        case Kind::TwoRays: {
            // Crossing the real axis left of a or right of b.
            if ((z0.imag() > 0.0) == (z1.imag() > 0.0)) {
                // Also catch endpoints landing on the axis inside the rays.
                auto on_rays = [&](const Cpx& z) {
                    return z.imag() == 0.0 && (z.real() <= a.real() || z.real() >= b.real());
                };
                if (on_rays(z0) || on_rays(z1)) {
                    if (t_first) *t_first = on_rays(z0) ? 0.0 : 1.0;
                    return true;
                }
                return false;
            }
            double t = (0.0 - z0.imag()) / (z1.imag() - z0.imag());
            double x = z0.real() + t * (z1.real() - z0.real());
            if (x <= a.real() || x >= b.real()) {
                if (t_first) *t_first = t;
                return true;
            }
            return false;
        }
    }
    return false;
}

namespace {

struct WalkContext {
    const DomainModel& domain;
    const std::vector<TrackedSet>& tracked;
    std::vector<char>& visited;

    double tracked_min_dist(const Cpx& z, int* which) const {
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < tracked.size(); ++i) {
            if (visited[i]) continue;
            double d = tracked[i].distance(z);
            if (d < best) {
                best = d;
                if (which) *which = int(i);
            }
        }
        return best;
    }
};

WalkOutcome finish(const DomainModel& domain, WalkOutcome&& out, int piece, const Cpx& at) {
    out.exit_piece = piece;
    out.exit_point = at;
    if (piece >= 0) out.exit_label = domain.piece_label(piece);
    return std::move(out);
}

}  // namespace

WalkOutcome walk_to_boundary(const DomainModel& domain, const Cpx& start,
                             const WalkScheme& scheme, const std::vector<TrackedSet>& tracked,
                             RngStream& rng, const WalkOptions& opts) {
    if (!domain.contains(start)) fail_invalid("walk: start point not in domain");
    double eps = opts.eps_abs > 0.0 ? opts.eps_abs : 1e-4 * domain.scale();

    WalkOutcome out;
    out.visited.assign(tracked.size(), 0);
    WalkContext ctx{domain, tracked, out.visited};
    Cpx z = start;

    if (scheme.type == WalkScheme::Type::WalkOnSpheres) {
        for (;;) {
            if (++out.steps > opts.step_budget)
                fail_numeric("walk: step budget exceeded after " + std::to_string(out.steps - 1) +
                             " steps at z=(" + std::to_string(z.real()) + "," +
                             std::to_string(z.imag()) + ")");
            auto nb = domain.nearest_boundary(z);
            int which = -1;
            double dtrack = ctx.tracked_min_dist(z, &which);
            double rho = std::min(nb.dist, dtrack);
            if (rho < eps) {
                if (nb.dist <= dtrack) return finish(domain, std::move(out), nb.piece, nb.point);
                out.visited[size_t(which)] = 1;
                if (opts.absorb_tracked) {
                    out.tracked_hit = which;
                    out.exit_point = z;
                    return out;
                }
                continue;
            }
            double ang = 2.0 * kPi * rng.uniform01();
            z += rho * Cpx(std::cos(ang), std::sin(ang));
        }
    }

    // FixedStep: Gaussian steps of std h near obstacles, with exact sphere
    // jumps while every obstacle is far (the in-disk Brownian path cannot
    // cross anything outside the disk, so no crossing goes undetected).
    double h = scheme.h > 0.0 ? scheme.h : 1e-3 * domain.scale();
    const double far_factor = 8.0;
    for (;;) {
        if (++out.steps > opts.step_budget)
            fail_numeric("walk: step budget exceeded after " + std::to_string(out.steps - 1) +
                         " steps at z=(" + std::to_string(z.real()) + "," +
                         std::to_string(z.imag()) + ")");
        auto nb = domain.nearest_boundary(z);
        double dtrack = ctx.tracked_min_dist(z, nullptr);
        double d = std::min(nb.dist, dtrack);
        if (d > far_factor * h) {
            double rho = d - 2.0 * h;
            double ang = 2.0 * kPi * rng.uniform01();
            z += rho * Cpx(std::cos(ang), std::sin(ang));
            continue;
        }
        Cpx step = h * Cpx(rng.gaussian(), rng.gaussian());
        Cpx z1 = z + step;
        auto bx = domain.first_boundary_crossing(z, z1);
        double t_abs = bx.hit ? bx.t : 2.0;
        int first_tracked = -1;
        double t_tracked = 2.0;
        for (size_t i = 0; i < tracked.size(); ++i) {
            if (out.visited[i]) continue;
            double t = 0.0;
            if (!tracked[i].segment_crosses(z, z1, &t) || t > t_abs) continue;
            if (opts.absorb_tracked) {
                if (t < t_tracked) {
                    t_tracked = t;
                    first_tracked = int(i);
                }
            } else {
                out.visited[i] = 1;
            }
        }
        if (opts.absorb_tracked && first_tracked >= 0) {
            out.visited[size_t(first_tracked)] = 1;
            out.tracked_hit = first_tracked;
            out.exit_point = z + t_tracked * (z1 - z);
            return out;
        }
        if (bx.hit) return finish(domain, std::move(out), bx.piece, bx.point);
        z = z1;
    }
}

BrownianIncrements brownian_bridge_refine(const BrownianIncrements& coarse, int factor,
                                          RngStream& rng) {
    if (coarse.dw.size() != coarse.dt.size()) fail_invalid("bridge: dw/dt size mismatch");
    if (factor < 1 || (factor & (factor - 1)) != 0) fail_invalid("bridge: factor must be a power of two");
    BrownianIncrements cur = coarse;
    while (factor > 1) {
        BrownianIncrements next;
        next.dw.reserve(cur.dw.size() * 2);
        next.dt.reserve(cur.dt.size() * 2);
        for (size_t i = 0; i < cur.dw.size(); ++i) {
            double dt = cur.dt[i];
            double left = 0.5 * cur.dw[i] + 0.5 * std::sqrt(dt) * rng.gaussian();
            next.dw.push_back(left);
            next.dw.push_back(cur.dw[i] - left);
            next.dt.push_back(0.5 * dt);
            next.dt.push_back(0.5 * dt);
        }
        cur = std::move(next);
        factor /= 2;
    }
    return cur;
}

}  // namespace slelab
