#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "complexutil.hpp"

namespace slelab {

// Circles are specified by the negative log radius: radius = exp(-r), so
// larger r means a smaller circle.  C_0 is the unit circle.
struct CircleSpec {
    double log_radius_neg = 0.0;
    Cpx center{0.0, 0.0};

    CircleSpec() = default;
    explicit CircleSpec(double r, Cpx c = Cpx(0.0, 0.0)) : log_radius_neg(r), center(c) {}
    double radius() const { return std::exp(-log_radius_neg); }
};

struct PolylineCurve {
    std::vector<Cpx> points;
    std::vector<double> times;  // strictly increasing, one per point

    PolylineCurve() = default;
    explicit PolylineCurve(std::vector<Cpx> pts);
    PolylineCurve(std::vector<Cpx> pts, std::vector<double> ts);

    size_t size() const { return points.size(); }
    double diameter() const;
    double length() const;
    void validate() const;  // throws InvalidArgument on degenerate input
};

// ---- low level primitives ----

double dist_point_segment(const Cpx& z, const Cpx& a, const Cpx& b);
Cpx project_point_segment(const Cpx& z, const Cpx& a, const Cpx& b);
double dist_segment_segment(const Cpx& a, const Cpx& b, const Cpx& c, const Cpx& d);
bool segments_intersect(const Cpx& a, const Cpx& b, const Cpx& c, const Cpx& d);
// Intersection parameters t in [0,1] of segment a..b with circle |z-c| = R.
void segment_circle_params(const Cpx& a, const Cpx& b, const Cpx& c, double R,
                           std::vector<double>& out);

double normalize_angle(double a);  // into [0, 2*pi)

// Nearest-distance / intersection acceleration for long polylines.
class SegmentBVH {
public:
    SegmentBVH() = default;
    explicit SegmentBVH(const std::vector<Cpx>& polyline_points);
    bool empty() const { return segs_.empty(); }
    double distance(const Cpx& z) const;
    bool meets_circle(const Cpx& center, double R) const;

private:
    struct Seg { Cpx a, b; };
    struct Node {
        double xmin, xmax, ymin, ymax;
        int lo, hi;        // segment index range for leaves
        int left = -1, right = -1;
    };
    int build(int lo, int hi);
    double box_dist2(const Node& n, const Cpx& z) const;

    std::vector<Seg> segs_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

double distance_point_to_curve(const Cpx& z, const PolylineCurve& curve);

struct CircleHit {
    bool hit = false;
    double time = 0.0;   // interpolated curve time of first meeting
    size_t segment = 0;  // index of segment containing the hit
    Cpx point{0.0, 0.0};
};
// First parameter at or after from_time where the curve meets |z-c| = R.
CircleHit curve_hits_circle(const PolylineCurve& curve, const CircleSpec& circle,
                            double from_time = -std::numeric_limits<double>::infinity());

struct SimpleCheckViolation {
    size_t i, j;  // offending segment indices
    double gap;   // distance between them (0 for crossings)
};
struct SimpleCheckResult {
    std::vector<SimpleCheckViolation> violations;
    double min_gap;  // smallest non-adjacent gap seen
};
// Flags non-adjacent segment pairs closer than tol (crossings count as gap 0).
SimpleCheckResult simple_curve_check(const PolylineCurve& curve, double tol);

// ---- domains ----

enum class DomainKind {
    HalfPlane,
    UnitDisk,
    SlitHalfPlane,
    SlitDisk,
    Rectangle,
    Annulus,
    RayComplement,
    GenericPolygonal,
};

struct BoundaryPiece {
    enum class Kind { Segment, HalfLine, Arc, Polyline };
    Kind kind = Kind::Segment;
    std::string label;
    Cpx a{0.0, 0.0}, b{0.0, 0.0};  // Segment: endpoints; HalfLine: origin, unit direction
    CircleSpec circle;             // Arc
    double ang0 = 0.0, ang1 = 0.0; // Arc: ccw range, ang1 - ang0 in (0, 2*pi]
    std::vector<Cpx> pts;          // Polyline

    double distance(const Cpx& z) const;
    Cpx nearest_point(const Cpx& z) const;
    // Earliest crossing parameter of segment z0..z1, if any.
    std::optional<double> segment_crossing(const Cpx& z0, const Cpx& z1) const;
    // Angles (on the query circle) of intersections with this piece.
    void circle_intersections(const CircleSpec& c, std::vector<double>& angles) const;
    double length() const;  // finite pieces only; HalfLine returns +inf
};

class DomainModel {
public:
    static DomainModel half_plane();
    static DomainModel unit_disk();
    static DomainModel slit_half_plane(PolylineCurve slit);
    static DomainModel slit_disk(std::vector<PolylineCurve> slits, double host_radius = 1.0);
    static DomainModel rectangle(double length);  // [0,L] x [0,pi]
    static DomainModel annulus(const CircleSpec& inner, const CircleSpec& outer);
    static DomainModel ray_complement(double theta);  // plane minus e^{i theta}[0,inf)
    // Plane minus the given polyline obstacles (complement region), or the
    // even-odd interior of closed chains when interior=true.
    static DomainModel generic_polygonal(std::vector<BoundaryPiece> pieces, bool interior);

    DomainKind kind() const { return kind_; }
    bool contains(const Cpx& z) const;
    double distance_to_boundary(const Cpx& z) const;

    struct Nearest {
        int piece = -1;
        Cpx point{0.0, 0.0};
        double dist = 0.0;
    };
    Nearest nearest_boundary(const Cpx& z) const;

    struct Crossing {
        bool hit = false;
        double t = 0.0;
        Cpx point{0.0, 0.0};
        int piece = -1;
    };
    Crossing first_boundary_crossing(const Cpx& z0, const Cpx& z1) const;

    double scale() const { return scale_; }
    const std::vector<BoundaryPiece>& pieces() const { return pieces_; }
    const std::string& piece_label(int i) const { return pieces_[size_t(i)].label; }
    int piece_by_label(const std::string& label) const;  // -1 if absent

    double rectangle_length() const { return rect_length_; }
    double ray_angle() const { return ray_angle_; }
    const CircleSpec& annulus_inner() const { return annulus_inner_; }
    const CircleSpec& annulus_outer() const { return annulus_outer_; }

private:
    DomainKind kind_ = DomainKind::HalfPlane;
    std::vector<BoundaryPiece> pieces_;
    double scale_ = 1.0;
    double rect_length_ = 0.0;
    double ray_angle_ = 0.0;
    double host_radius_ = 1.0;
    bool interior_region_ = false;  // GenericPolygonal: even-odd interior vs complement
    CircleSpec annulus_inner_, annulus_outer_;
};

// ---- crosscuts ----

struct Crosscut {
    CircleSpec circle;
    double ang0 = 0.0, ang1 = 0.0;  // ccw arc, ang1 > ang0 (may exceed 2*pi range before wrap)
    bool closed = false;            // whole circle lies in the domain
    std::string label_start, label_end;

    double angular_measure() const { return closed ? 2.0 * kPi : ang1 - ang0; }
    double length() const { return angular_measure() * circle.radius(); }
    Cpx point_at(double s) const;  // s in [0,1] along the arc
    double distance(const Cpx& z) const;
    bool segment_crosses(const Cpx& z0, const Cpx& z1) const;
};

// Connected components of (domain intersect circle), as ccw arcs.  Endpoint
// angles closer than tol_angle are merged.
std::vector<Crosscut> extract_crosscuts(const DomainModel& domain, const CircleSpec& circle,
                                        double tol_angle = 1e-9);

// ---- Mobius transport between the disk and half plane charts ----

// g(z) = e^{-i theta} (z - 1) / (z - e^{-2 i theta}) maps the unit disk onto
// the upper half plane with 1 -> 0, e^{-2 i theta} -> infinity, 0 -> e^{i theta}.
struct MobiusMap {
    Cpx a, b, c, d;  // z -> (a z + b) / (c z + d)

    Cpx eval(const Cpx& z) const;
    Cpx deriv(const Cpx& z) const;
    Cpx inverse(const Cpx& w) const;
};

MobiusMap mobius_disk_to_half(double theta);

}  // namespace slelab
