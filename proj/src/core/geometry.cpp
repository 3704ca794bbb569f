#include "geometry.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace slelab {

// ---- PolylineCurve ----

PolylineCurve::PolylineCurve(std::vector<Cpx> pts) : points(std::move(pts)) {
    times.resize(points.size());
    for (size_t i = 0; i < times.size(); ++i) times[i] = double(i);
    validate();
}

PolylineCurve::PolylineCurve(std::vector<Cpx> pts, std::vector<double> ts)
    : points(std::move(pts)), times(std::move(ts)) {
    validate();
}

void PolylineCurve::validate() const {
    if (points.empty()) fail_invalid("polyline: empty");
    if (points.size() != times.size()) fail_invalid("polyline: times/points size mismatch");
    for (size_t i = 0; i < points.size(); ++i) {
        if (!is_finite_point(points[i])) fail_invalid("polyline: non-finite vertex");
        if (i > 0) {
            if (!(times[i] > times[i - 1])) fail_invalid("polyline: times not strictly increasing");
            if (points[i] == points[i - 1]) fail_invalid("polyline: repeated consecutive point");
        }
    }
}

double PolylineCurve::diameter() const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Cpx& p : points) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymin = std::min(ymin, p.imag());
        ymax = std::max(ymax, p.imag());
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

double PolylineCurve::length() const {
    double s = 0.0;
    for (size_t i = 1; i < points.size(); ++i) s += std::abs(points[i] - points[i - 1]);
    return s;
}

// ---- primitives ----

double dist_point_segment(const Cpx& z, const Cpx& a, const Cpx& b) {
    return std::abs(z - project_point_segment(z, a, b));
}

Cpx project_point_segment(const Cpx& z, const Cpx& a, const Cpx& b) {
    Cpx d = b - a;
    double len2 = abs2(d);
    if (len2 <= 0.0) return a;
    double t = ((z.real() - a.real()) * d.real() + (z.imag() - a.imag()) * d.imag()) / len2;
    t = clampd(t, 0.0, 1.0);
    return a + t * d;
}

namespace {
inline double cross(const Cpx& u, const Cpx& v) {
    return u.real() * v.imag() - u.imag() * v.real();
}
}  // namespace

bool segments_intersect(const Cpx& a, const Cpx& b, const Cpx& c, const Cpx& d) {
    double d1 = cross(b - a, c - a);
    double d2 = cross(b - a, d - a);
    double d3 = cross(d - c, a - c);
    double d4 = cross(d - c, b - c);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return true;
    // Collinear overlaps count as intersections.
    auto on = [](const Cpx& p, const Cpx& q, const Cpx& r) {
        return cross(q - p, r - p) == 0.0 && std::min(p.real(), q.real()) <= r.real() &&
               r.real() <= std::max(p.real(), q.real()) &&
               std::min(p.imag(), q.imag()) <= r.imag() && r.imag() <= std::max(p.imag(), q.imag());
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

double dist_segment_segment(const Cpx& a, const Cpx& b, const Cpx& c, const Cpx& d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    double r = dist_point_segment(c, a, b);
    r = std::min(r, dist_point_segment(d, a, b));
    r = std::min(r, dist_point_segment(a, c, d));
    r = std::min(r, dist_point_segment(b, c, d));
    return r;
}

void segment_circle_params(const Cpx& a, const Cpx& b, const Cpx& c, double R,
                           std::vector<double>& out) {
    Cpx d = b - a, f = a - c;
    double A = abs2(d);
    if (A <= 0.0) return;
    double B = 2.0 * (f.real() * d.real() + f.imag() * d.imag());
    double C = abs2(f) - R * R;
    double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return;
    double s = std::sqrt(disc);
    // Stable quadratic roots.
    double q = -0.5 * (B + (B >= 0 ? s : -s));
    double t1 = q / A;
    double t2 = (q != 0.0) ? C / q : t1;
    if (t1 > t2) std::swap(t1, t2);
    if (t1 >= 0.0 && t1 <= 1.0) out.push_back(t1);
    if (disc > 0.0 && t2 >= 0.0 && t2 <= 1.0) out.push_back(t2);
}

double normalize_angle(double a) {
    double t = std::fmod(a, 2.0 * kPi);
    if (t < 0.0) t += 2.0 * kPi;
    return t;
}

// ---- SegmentBVH ----

SegmentBVH::SegmentBVH(const std::vector<Cpx>& pts) {
    if (pts.size() < 2) {
        if (pts.size() == 1) segs_.push_back({pts[0], pts[0]});
    } else {
        segs_.reserve(pts.size() - 1);
        for (size_t i = 1; i < pts.size(); ++i) segs_.push_back({pts[i - 1], pts[i]});
    }
    if (segs_.empty()) return;
    order_.resize(segs_.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = int(i);
    nodes_.reserve(2 * segs_.size());
    root_ = build(0, int(segs_.size()));
}

int SegmentBVH::build(int lo, int hi) {
    Node n;
    n.lo = lo;
    n.hi = hi;
    n.xmin = n.ymin = 1e300;
    n.xmax = n.ymax = -1e300;
    for (int i = lo; i < hi; ++i) {
        const Seg& s = segs_[size_t(order_[size_t(i)])];
        n.xmin = std::min({n.xmin, s.a.real(), s.b.real()});
        n.xmax = std::max({n.xmax, s.a.real(), s.b.real()});
        n.ymin = std::min({n.ymin, s.a.imag(), s.b.imag()});
        n.ymax = std::max({n.ymax, s.a.imag(), s.b.imag()});
    }
    int idx = int(nodes_.size());
    nodes_.push_back(n);
    if (hi - lo > 8) {
        bool split_x = (n.xmax - n.xmin) >= (n.ymax - n.ymin);
        int mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](int i, int j) {
                             const Seg &a = segs_[size_t(i)], &b = segs_[size_t(j)];
                             double ca = split_x ? a.a.real() + a.b.real() : a.a.imag() + a.b.imag();
                             double cb = split_x ? b.a.real() + b.b.real() : b.a.imag() + b.b.imag();
                             return ca < cb;
                         });
        int l = build(lo, mid);
        int r = build(mid, hi);
        nodes_[size_t(idx)].left = l;
        nodes_[size_t(idx)].right = r;
    }
    return idx;
}

double SegmentBVH::box_dist2(const Node& n, const Cpx& z) const {
    double dx = std::max({n.xmin - z.real(), 0.0, z.real() - n.xmax});
    double dy = std::max({n.ymin - z.imag(), 0.0, z.imag() - n.ymax});
    return dx * dx + dy * dy;
}

double SegmentBVH::distance(const Cpx& z) const {
    if (segs_.empty()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[size_t(stack[--top])];
        if (box_dist2(n, z) >= best * best) continue;
        if (n.left < 0) {
            for (int i = n.lo; i < n.hi; ++i) {
                const Seg& s = segs_[size_t(order_[size_t(i)])];
                best = std::min(best, dist_point_segment(z, s.a, s.b));
            }
        } else {
            // Visit the nearer child first.
            double dl = box_dist2(nodes_[size_t(n.left)], z);
            double dr = box_dist2(nodes_[size_t(n.right)], z);
            if (dl < dr) {
                stack[top++] = n.right;
                stack[top++] = n.left;
            } else {
                stack[top++] = n.left;
                stack[top++] = n.right;
            }
        }
    }
    return best;
}

bool SegmentBVH::meets_circle(const Cpx& center, double R) const {
    if (segs_.empty()) return false;
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[size_t(stack[--top])];
        if (box_dist2(n, center) > R * R) continue;
        if (n.left < 0) {
            for (int i = n.lo; i < n.hi; ++i) {
                const Seg& s = segs_[size_t(order_[size_t(i)])];
                double dmin = dist_point_segment(center, s.a, s.b);
                double dmax = std::max(std::abs(s.a - center), std::abs(s.b - center));
                if (dmin <= R && dmax >= R) return true;
            }
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
    return false;
}

double distance_point_to_curve(const Cpx& z, const PolylineCurve& curve) {
    if (curve.points.size() == 1) return std::abs(z - curve.points[0]);
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < curve.points.size(); ++i)
        best = std::min(best, dist_point_segment(z, curve.points[i - 1], curve.points[i]));
    return best;
}

CircleHit curve_hits_circle(const PolylineCurve& curve, const CircleSpec& circle,
                            double from_time) {
    CircleHit hit;
    double R = circle.radius();
    std::vector<double> params;
    for (size_t i = 0; i + 1 < curve.points.size(); ++i) {
        if (curve.times[i + 1] < from_time) continue;
        params.clear();
        segment_circle_params(curve.points[i], curve.points[i + 1], circle.center, R, params);
        if (params.empty()) continue;
        double dt = curve.times[i + 1] - curve.times[i];
        // Parameter lower cutoff inside the segment holding from_time.
        double t_min = (curve.times[i] < from_time) ? (from_time - curve.times[i]) / dt : 0.0;
        double best = 2.0;
        for (double t : params) {
            if (t >= t_min) best = std::min(best, t);
        }
        if (best > 1.0) continue;
        hit.hit = true;
        hit.segment = i;
        hit.time = curve.times[i] + best * dt;
        hit.point = curve.points[i] + best * (curve.points[i + 1] - curve.points[i]);
        return hit;
    }
    // Single point curves: on-circle start counts.
    if (curve.points.size() == 1 && std::abs(std::abs(curve.points[0] - circle.center) - R) == 0.0) {
        hit.hit = true;
        hit.time = curve.times[0];
        hit.point = curve.points[0];
    }
    return hit;
}

SimpleCheckResult simple_curve_check(const PolylineCurve& curve, double tol) {
    SimpleCheckResult res;
    res.min_gap = std::numeric_limits<double>::infinity();
    size_t nseg = curve.points.size() >= 2 ? curve.points.size() - 1 : 0;
    if (nseg < 3) return res;

    double xmin = 1e300, ymin = 1e300, maxlen = 0.0;
    for (size_t i = 0; i < nseg; ++i) {
        const Cpx &a = curve.points[i], &b = curve.points[i + 1];
        xmin = std::min({xmin, a.real(), b.real()});
        ymin = std::min({ymin, a.imag(), b.imag()});
        maxlen = std::max(maxlen, std::abs(b - a));
    }
    double cell = std::max(maxlen, 1e-12);

    struct CellKey {
        long long x, y;
        bool operator<(const CellKey& o) const { return x != o.x ? x < o.x : y < o.y; }
    };
    std::vector<std::pair<CellKey, int>> entries;
    entries.reserve(nseg * 2);
    for (size_t i = 0; i < nseg; ++i) {
        const Cpx &a = curve.points[i], &b = curve.points[i + 1];
        long long x0 = (long long)std::floor((std::min(a.real(), b.real()) - xmin) / cell);
        long long x1 = (long long)std::floor((std::max(a.real(), b.real()) - xmin) / cell);
        long long y0 = (long long)std::floor((std::min(a.imag(), b.imag()) - ymin) / cell);
        long long y1 = (long long)std::floor((std::max(a.imag(), b.imag()) - ymin) / cell);
        for (long long x = x0; x <= x1; ++x)
            for (long long y = y0; y <= y1; ++y) entries.push_back({{x, y}, int(i)});
    }
    std::sort(entries.begin(), entries.end());

    auto consider = [&](size_t i, size_t j) {
        if (i > j) std::swap(i, j);
        if (j - i <= 1) return;  // adjacent segments share a vertex
        double g = dist_segment_segment(curve.points[i], curve.points[i + 1], curve.points[j],
                                        curve.points[j + 1]);
        res.min_gap = std::min(res.min_gap, g);
        if (g < tol) {
            for (const auto& v : res.violations)
                if (v.i == i && v.j == j) return;
            res.violations.push_back({i, j, g});
        }
    };
    size_t k = 0;
    while (k < entries.size()) {
        size_t e = k;
        while (e < entries.size() && !(entries[k].first < entries[e].first)) ++e;
        for (size_t p = k; p < e; ++p)
            for (size_t q = p + 1; q < e; ++q)
                consider(size_t(entries[p].second), size_t(entries[q].second));
        k = e;
    }
    return res;
}

// ---- BoundaryPiece ----

double BoundaryPiece::distance(const Cpx& z) const {
    switch (kind) {
        case Kind::Segment:
            return dist_point_segment(z, a, b);
        case Kind::HalfLine: {
            Cpx w = z - a;
            double t = std::max(0.0, w.real() * b.real() + w.imag() * b.imag());
            return std::abs(w - t * b);
        }
        case Kind::Arc: {
            Cpx w = z - circle.center;
            double R = circle.radius();
            double span = ang1 - ang0;
            double phi = normalize_angle(std::arg(w) - ang0);
            if (span >= 2.0 * kPi - 1e-15 || phi <= span)
                return std::abs(std::abs(w) - R);
            Cpx p0 = circle.center + R * Cpx(std::cos(ang0), std::sin(ang0));
            Cpx p1 = circle.center + R * Cpx(std::cos(ang1), std::sin(ang1));
            return std::min(std::abs(z - p0), std::abs(z - p1));
        }
        case Kind::Polyline: {
            double best = std::numeric_limits<double>::infinity();
            for (size_t i = 1; i < pts.size(); ++i)
                best = std::min(best, dist_point_segment(z, pts[i - 1], pts[i]));
            return best;
        }
    }
    return std::numeric_limits<double>::infinity();
}

Cpx BoundaryPiece::nearest_point(const Cpx& z) const {
    switch (kind) {
        case Kind::Segment:
            return project_point_segment(z, a, b);
        case Kind::HalfLine: {
            Cpx w = z - a;
            double t = std::max(0.0, w.real() * b.real() + w.imag() * b.imag());
            return a + t * b;
        }
        case Kind::Arc: {
            Cpx w = z - circle.center;
            double R = circle.radius();
            double span = ang1 - ang0;
            double phi = normalize_angle(std::arg(w) - ang0);
            if (span >= 2.0 * kPi - 1e-15 || phi <= span) {
                double r = std::abs(w);
                if (r == 0.0) return circle.center + R * Cpx(std::cos(ang0), std::sin(ang0));
                return circle.center + (R / r) * w;
            }
            Cpx p0 = circle.center + R * Cpx(std::cos(ang0), std::sin(ang0));
            Cpx p1 = circle.center + R * Cpx(std::cos(ang1), std::sin(ang1));
            return std::abs(z - p0) <= std::abs(z - p1) ? p0 : p1;
        }
        case Kind::Polyline: {
            double best = std::numeric_limits<double>::infinity();
            Cpx bp = pts.empty() ? Cpx(0, 0) : pts[0];
            for (size_t i = 1; i < pts.size(); ++i) {
                Cpx p = project_point_segment(z, pts[i - 1], pts[i]);
                double d = std::abs(z - p);
                if (d < best) {
                    best = d;
                    bp = p;
                }
            }
            return bp;
        }
    }
    return Cpx(0, 0);
}

namespace {

// Earliest parameter of segment z0..z1 crossing segment c..d, if any.
std::optional<double> seg_seg_param(const Cpx& z0, const Cpx& z1, const Cpx& c, const Cpx& d) {
    Cpx r = z1 - z0, s = d - c;
    double denom = cross(r, s);
    if (denom == 0.0) {
        // Parallel: only matters if collinear and overlapping; treat nearest
        // endpoint projection as the crossing to stay robust.
        if (cross(c - z0, r) != 0.0) return std::nullopt;
        double rr = abs2(r);
        if (rr == 0.0) return std::nullopt;
        double t0 = ((c - z0).real() * r.real() + (c - z0).imag() * r.imag()) / rr;
        double t1 = ((d - z0).real() * r.real() + (d - z0).imag() * r.imag()) / rr;
        double lo = std::min(t0, t1), hi = std::max(t0, t1);
        if (hi < 0.0 || lo > 1.0) return std::nullopt;
        return std::max(0.0, lo);
    }
    double t = cross(c - z0, s) / denom;
    double u = cross(c - z0, r) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return t;
    return std::nullopt;
}

void keep_min(std::optional<double>& best, std::optional<double> cand) {
    if (cand && (!best || *cand < *best)) best = cand;
}

}  // namespace

std::optional<double> BoundaryPiece::segment_crossing(const Cpx& z0, const Cpx& z1) const {
    switch (kind) {
        case Kind::Segment:
            return seg_seg_param(z0, z1, a, b);
        case Kind::HalfLine: {
            // Treat as a long segment; walks never travel far enough to outrun it.
            double reach = std::abs(z0 - a) + std::abs(z1 - a) + 10.0;
            return seg_seg_param(z0, z1, a, a + reach * b);
        }
        case Kind::Arc: {
            std::vector<double> params;
            segment_circle_params(z0, z1, circle.center, circle.radius(), params);
            std::optional<double> best;
            double span = ang1 - ang0;
            for (double t : params) {
                Cpx p = z0 + t * (z1 - z0);
                double phi = normalize_angle(std::arg(p - circle.center) - ang0);
                if (span >= 2.0 * kPi - 1e-15 || phi <= span)
                    keep_min(best, t);
            }
            return best;
        }
        case Kind::Polyline: {
            std::optional<double> best;
            for (size_t i = 1; i < pts.size(); ++i)
                keep_min(best, seg_seg_param(z0, z1, pts[i - 1], pts[i]));
            return best;
        }
    }
    return std::nullopt;
}

void BoundaryPiece::circle_intersections(const CircleSpec& c, std::vector<double>& angles) const {
    double R = c.radius();
    auto push_seg = [&](const Cpx& p, const Cpx& q) {
        std::vector<double> params;
        segment_circle_params(p, q, c.center, R, params);
        for (double t : params) angles.push_back(std::arg(p + t * (q - p) - c.center));
    };
    switch (kind) {
        case Kind::Segment:
            push_seg(a, b);
            break;
        case Kind::HalfLine: {
            double reach = std::abs(c.center - a) + R + 1.0;
            push_seg(a, a + reach * b);
            break;
        }
        case Kind::Arc: {
            // Circle-circle intersection.
            Cpx d = circle.center - c.center;
            double dist = std::abs(d);
            double R2 = circle.radius();
            if (dist == 0.0) break;  // concentric: either disjoint or identical
            if (dist > R + R2 || dist < std::fabs(R - R2)) break;
            double x = (dist * dist + R * R - R2 * R2) / (2.0 * dist);
            double h2 = R * R - x * x;
            double h = h2 > 0.0 ? std::sqrt(h2) : 0.0;
            Cpx u = d / dist;
            Cpx base = c.center + x * u;
            Cpx perp = Cpx(-u.imag(), u.real());
            double span = ang1 - ang0;
            for (Cpx p : {base + h * perp, base - h * perp}) {
                double phi = normalize_angle(std::arg(p - circle.center) - ang0);
                if (span >= 2.0 * kPi - 1e-15 || phi <= span)
                    angles.push_back(std::arg(p - c.center));
                if (h == 0.0) break;  // tangent: single point
            }
            break;
        }
        case Kind::Polyline:
            for (size_t i = 1; i < pts.size(); ++i) push_seg(pts[i - 1], pts[i]);
            break;
    }
}

double BoundaryPiece::length() const {
    switch (kind) {
        case Kind::Segment:
            return std::abs(b - a);
        case Kind::HalfLine:
            return std::numeric_limits<double>::infinity();
        case Kind::Arc:
            return (ang1 - ang0) * circle.radius();
        case Kind::Polyline: {
            double s = 0.0;
            for (size_t i = 1; i < pts.size(); ++i) s += std::abs(pts[i] - pts[i - 1]);
            return s;
        }
    }
    return 0.0;
}

// ---- DomainModel ----

DomainModel DomainModel::half_plane() {
    DomainModel d;
    d.kind_ = DomainKind::HalfPlane;
    BoundaryPiece neg, pos;
    neg.kind = BoundaryPiece::Kind::HalfLine;
    neg.a = Cpx(0, 0);
    neg.b = Cpx(-1, 0);
    neg.label = "neg_real";
    pos.kind = BoundaryPiece::Kind::HalfLine;
    pos.a = Cpx(0, 0);
    pos.b = Cpx(1, 0);
    pos.label = "pos_real";
    d.pieces_ = {neg, pos};
    d.scale_ = 1.0;
    return d;
}

DomainModel DomainModel::unit_disk() {
    DomainModel d;
    d.kind_ = DomainKind::UnitDisk;
    BoundaryPiece c;
    c.kind = BoundaryPiece::Kind::Arc;
    c.circle = CircleSpec(0.0);
    c.ang0 = 0.0;
    c.ang1 = 2.0 * kPi;
    c.label = "boundary_circle";
    d.pieces_ = {c};
    d.scale_ = 1.0;
    return d;
}

DomainModel DomainModel::slit_half_plane(PolylineCurve slit) {
    slit.validate();
    DomainModel d = half_plane();
    d.kind_ = DomainKind::SlitHalfPlane;
    BoundaryPiece s;
    s.kind = BoundaryPiece::Kind::Polyline;
    s.pts = slit.points;
    s.label = "slit";
    d.pieces_.push_back(std::move(s));
    return d;
}

DomainModel DomainModel::slit_disk(std::vector<PolylineCurve> slits, double host_radius) {
    DomainModel d;
    d.kind_ = DomainKind::SlitDisk;
    d.host_radius_ = host_radius;
    BoundaryPiece c;
    c.kind = BoundaryPiece::Kind::Arc;
    c.circle = CircleSpec(-std::log(host_radius));
    c.ang0 = 0.0;
    c.ang1 = 2.0 * kPi;
    c.label = "boundary_circle";
    d.pieces_ = {c};
    for (size_t i = 0; i < slits.size(); ++i) {
        slits[i].validate();
        BoundaryPiece s;
        s.kind = BoundaryPiece::Kind::Polyline;
        s.pts = slits[i].points;
        s.label = "slit_" + std::to_string(i);
        d.pieces_.push_back(std::move(s));
    }
    d.scale_ = host_radius;
    return d;
}

DomainModel DomainModel::rectangle(double length) {
    if (!(length > 0.0)) fail_invalid("rectangle: length must be positive");
    DomainModel d;
    d.kind_ = DomainKind::Rectangle;
    d.rect_length_ = length;
    auto seg = [](Cpx a, Cpx b, const char* label) {
        BoundaryPiece p;
        p.kind = BoundaryPiece::Kind::Segment;
        p.a = a;
        p.b = b;
        p.label = label;
        return p;
    };
    d.pieces_ = {seg(Cpx(0, 0), Cpx(0, kPi), "left"), seg(Cpx(length, 0), Cpx(length, kPi), "right"),
                 seg(Cpx(0, 0), Cpx(length, 0), "bottom"), seg(Cpx(0, kPi), Cpx(length, kPi), "top")};
    d.scale_ = std::min(length, kPi);
    return d;
}

DomainModel DomainModel::annulus(const CircleSpec& inner, const CircleSpec& outer) {
    if (!(inner.radius() < outer.radius())) fail_invalid("annulus: inner must be smaller");
    DomainModel d;
    d.kind_ = DomainKind::Annulus;
    d.annulus_inner_ = inner;
    d.annulus_outer_ = outer;
    BoundaryPiece pi, po;
    pi.kind = BoundaryPiece::Kind::Arc;
    pi.circle = inner;
    pi.ang0 = 0.0;
    pi.ang1 = 2.0 * kPi;
    pi.label = "inner";
    po.kind = BoundaryPiece::Kind::Arc;
    po.circle = outer;
    po.ang0 = 0.0;
    po.ang1 = 2.0 * kPi;
    po.label = "outer";
    d.pieces_ = {pi, po};
    d.scale_ = outer.radius() - inner.radius();
    return d;
}

DomainModel DomainModel::ray_complement(double theta) {
    DomainModel d;
    d.kind_ = DomainKind::RayComplement;
    d.ray_angle_ = theta;
    BoundaryPiece r;
    r.kind = BoundaryPiece::Kind::HalfLine;
    r.a = Cpx(0, 0);
    r.b = Cpx(std::cos(theta), std::sin(theta));
    r.label = "ray";
    d.pieces_ = {r};
    d.scale_ = 1.0;
    return d;
}

DomainModel DomainModel::generic_polygonal(std::vector<BoundaryPiece> pieces, bool interior) {
    DomainModel d;
    d.kind_ = DomainKind::GenericPolygonal;
    d.pieces_ = std::move(pieces);
    d.interior_region_ = interior;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto upd = [&](const Cpx& p) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymin = std::min(ymin, p.imag());
        ymax = std::max(ymax, p.imag());
    };
    for (const auto& p : d.pieces_) {
        if (p.kind == BoundaryPiece::Kind::Polyline)
            for (const Cpx& q : p.pts) upd(q);
        else if (p.kind == BoundaryPiece::Kind::Segment) {
            upd(p.a);
            upd(p.b);
        }
    }
    d.scale_ = (xmax > xmin) ? std::hypot(xmax - xmin, ymax - ymin) : 1.0;
    return d;
}

bool DomainModel::contains(const Cpx& z) const {
    if (!is_finite_point(z)) return false;
    switch (kind_) {
        case DomainKind::HalfPlane:
            return z.imag() > 0.0;
        case DomainKind::UnitDisk:
            return std::abs(z) < 1.0;
        case DomainKind::SlitHalfPlane: {
            if (z.imag() <= 0.0) return false;
            return pieces_[2].distance(z) > 0.0;
        }
        case DomainKind::SlitDisk: {
            if (std::abs(z) >= host_radius_) return false;
            for (size_t i = 1; i < pieces_.size(); ++i)
                if (pieces_[i].distance(z) <= 0.0) return false;
            return true;
        }
        case DomainKind::Rectangle:
            return z.real() > 0.0 && z.real() < rect_length_ && z.imag() > 0.0 && z.imag() < kPi;
        case DomainKind::Annulus: {
            double r = std::abs(z - annulus_inner_.center);
            return r > annulus_inner_.radius() && r < annulus_outer_.radius();
        }
        case DomainKind::RayComplement:
            return pieces_[0].distance(z) > 0.0;
        case DomainKind::GenericPolygonal: {
            if (!interior_region_) {
                for (const auto& p : pieces_)
                    if (p.distance(z) <= 0.0) return false;
                return true;
            }
            // Even-odd ray cast along +x over segment/polyline pieces.
            int crossings = 0;
            auto count_seg = [&](const Cpx& a, const Cpx& b) {
                if ((a.imag() > z.imag()) == (b.imag() > z.imag())) return;
                double t = (z.imag() - a.imag()) / (b.imag() - a.imag());
                double x = a.real() + t * (b.real() - a.real());
                if (x > z.real()) ++crossings;
            };
            for (const auto& p : pieces_) {
                if (p.kind == BoundaryPiece::Kind::Segment)
                    count_seg(p.a, p.b);
                else if (p.kind == BoundaryPiece::Kind::Polyline)
                    for (size_t i = 1; i < p.pts.size(); ++i) count_seg(p.pts[i - 1], p.pts[i]);
            }
            return (crossings % 2) == 1;
        }
    }
    return false;
}

double DomainModel::distance_to_boundary(const Cpx& z) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) best = std::min(best, p.distance(z));
    return best;
}

DomainModel::Nearest DomainModel::nearest_boundary(const Cpx& z) const {
    Nearest n;
    n.dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pieces_.size(); ++i) {
        double d = pieces_[i].distance(z);
        if (d < n.dist) {
            n.dist = d;
            n.piece = int(i);
        }
    }
    if (n.piece >= 0) n.point = pieces_[size_t(n.piece)].nearest_point(z);
    return n;
}

DomainModel::Crossing DomainModel::first_boundary_crossing(const Cpx& z0, const Cpx& z1) const {
    Crossing c;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pieces_.size(); ++i) {
        auto t = pieces_[i].segment_crossing(z0, z1);
        if (t && *t < best) {
            best = *t;
            c.hit = true;
            c.t = *t;
            c.piece = int(i);
        }
    }
    if (c.hit) c.point = z0 + c.t * (z1 - z0);
    return c;
}

int DomainModel::piece_by_label(const std::string& label) const {
    for (size_t i = 0; i < pieces_.size(); ++i)
        if (pieces_[i].label == label) return int(i);
    return -1;
}

// ---- crosscuts ----

Cpx Crosscut::point_at(double s) const {
    double ang = ang0 + s * angular_measure();
    return circle.center + circle.radius() * Cpx(std::cos(ang), std::sin(ang));
}

double Crosscut::distance(const Cpx& z) const {
    Cpx w = z - circle.center;
    double R = circle.radius();
    if (closed) return std::abs(std::abs(w) - R);
    double span = angular_measure();
    double phi = normalize_angle(std::arg(w) - normalize_angle(ang0));
    if (phi <= span) return std::abs(std::abs(w) - R);
    return std::min(std::abs(z - point_at(0.0)), std::abs(z - point_at(1.0)));
}

bool Crosscut::segment_crosses(const Cpx& z0, const Cpx& z1) const {
    std::vector<double> params;
    segment_circle_params(z0, z1, circle.center, circle.radius(), params);
    if (closed) return !params.empty();
    double span = angular_measure();
    for (double t : params) {
        Cpx p = z0 + t * (z1 - z0);
        double phi = normalize_angle(std::arg(p - circle.center) - normalize_angle(ang0));
        if (phi <= span) return true;
    }
    return false;
}

std::vector<Crosscut> extract_crosscuts(const DomainModel& domain, const CircleSpec& circle,
                                        double tol_angle) {
    std::vector<Crosscut> cuts;
    double R = circle.radius();

    struct Critical {
        double ang;
        int piece;
    };
    std::vector<Critical> crit;
    std::vector<double> angles;
    for (size_t i = 0; i < domain.pieces().size(); ++i) {
        angles.clear();
        domain.pieces()[i].circle_intersections(circle, angles);
        for (double a : angles) crit.push_back({normalize_angle(a), int(i)});
    }
    std::sort(crit.begin(), crit.end(), [](const Critical& a, const Critical& b) { return a.ang < b.ang; });
    // Merge angles closer than tol_angle (including across the wrap).
    std::vector<Critical> merged;
    for (const auto& c : crit) {
        if (!merged.empty() && c.ang - merged.back().ang < tol_angle) continue;
        merged.push_back(c);
    }
    if (merged.size() >= 2 && (merged.front().ang + 2.0 * kPi - merged.back().ang) < tol_angle)
        merged.pop_back();

    auto sample = [&](double ang) { return circle.center + R * Cpx(std::cos(ang), std::sin(ang)); };

    if (merged.empty()) {
        bool inside = true;
        for (int k = 0; k < 16; ++k)
            if (!domain.contains(sample(2.0 * kPi * k / 16.0))) {
                inside = false;
                break;
            }
        if (inside) {
            Crosscut c;
            c.circle = circle;
            c.closed = true;
            c.ang0 = 0.0;
            c.ang1 = 2.0 * kPi;
            cuts.push_back(c);
        }
        return cuts;
    }

    size_t m = merged.size();
    for (size_t i = 0; i < m; ++i) {
        double a0 = merged[i].ang;
        double a1 = (i + 1 < m) ? merged[i + 1].ang : merged[0].ang + 2.0 * kPi;
        if (a1 - a0 < tol_angle) continue;
        double mid = 0.5 * (a0 + a1);
        if (!domain.contains(sample(mid))) continue;
        Crosscut c;
        c.circle = circle;
        c.ang0 = a0;
        c.ang1 = a1;
        c.label_start = domain.piece_label(merged[i].piece);
        c.label_end = domain.piece_label(merged[(i + 1) % m].piece);
        cuts.push_back(c);
    }
    return cuts;
}

// ---- Mobius ----

Cpx MobiusMap::eval(const Cpx& z) const {
    if (is_infinity_point(z)) {
        if (c == Cpx(0, 0)) return infinity_point();
        return a / c;
    }
    Cpx den = c * z + d;
    Cpx num = a * z + b;
    if (std::abs(den) <= 1e-15 * (std::abs(num) + 1.0)) return infinity_point();
    return num / den;
}

Cpx MobiusMap::deriv(const Cpx& z) const {
    Cpx den = c * z + d;
    if (std::abs(den) == 0.0) return infinity_point();
    return (a * d - b * c) / (den * den);
}

Cpx MobiusMap::inverse(const Cpx& w) const {
    if (is_infinity_point(w)) {
        if (c == Cpx(0, 0)) return infinity_point();
        return -d / c;
    }
    Cpx den = -c * w + a;
    Cpx num = d * w - b;
    if (std::abs(den) <= 1e-15 * (std::abs(num) + 1.0)) return infinity_point();
    return num / den;
}

MobiusMap mobius_disk_to_half(double theta) {
    Cpx e1 = std::polar(1.0, -theta);
    Cpx e2 = std::polar(1.0, -2.0 * theta);
    return MobiusMap{e1, -e1, Cpx(1.0, 0.0), -e2};
}

}  // namespace slelab
