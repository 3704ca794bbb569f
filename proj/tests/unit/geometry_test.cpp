#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/geometry.hpp"
#include "core/rng.hpp"

using namespace slelab;

TEST_CASE("segment primitives") {
    CHECK(dist_point_segment(Cpx(0, 1), Cpx(-1, 0), Cpx(1, 0)) == doctest::Approx(1.0));
    CHECK(dist_point_segment(Cpx(3, 4), Cpx(-1, 0), Cpx(1, 0)) == doctest::Approx(std::hypot(2, 4)));
    CHECK(segments_intersect(Cpx(-1, -1), Cpx(1, 1), Cpx(-1, 1), Cpx(1, -1)));
    CHECK_FALSE(segments_intersect(Cpx(0, 0), Cpx(1, 0), Cpx(0, 1), Cpx(1, 1)));
    CHECK(dist_segment_segment(Cpx(0, 0), Cpx(1, 0), Cpx(0, 1), Cpx(1, 1)) == doctest::Approx(1.0));

    std::vector<double> ts;
    segment_circle_params(Cpx(-2, 0), Cpx(2, 0), Cpx(0, 0), 1.0, ts);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0] == doctest::Approx(0.25));
    CHECK(ts[1] == doctest::Approx(0.75));
}

TEST_CASE("polyline validation") {
    CHECK_THROWS_AS(PolylineCurve(std::vector<Cpx>{}).validate(), SlelabError);
    const std::vector<Cpx> two{Cpx(0, 0), Cpx(1, 0)};
    CHECK_THROWS_AS(PolylineCurve(two, {0.0, 0.0}), SlelabError);
    CHECK_THROWS_AS(PolylineCurve(two, {0.0}), SlelabError);
    CHECK_THROWS_AS(PolylineCurve({Cpx(0, 0), Cpx(0, 0)}, {0.0, 1.0}), SlelabError);
    PolylineCurve ok({Cpx(0, 0), Cpx(1, 0), Cpx(1, 1)});
    ok.validate();
    CHECK(ok.length() == doctest::Approx(2.0));
    CHECK(ok.diameter() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("bvh distance matches brute force") {
    RngStream rng(31, 0);
    std::vector<Cpx> pts;
    Cpx z(0, 0);
    for (int i = 0; i < 400; ++i) {
        z += Cpx(rng.gaussian() * 0.1, rng.gaussian() * 0.1);
        pts.push_back(z);
    }
    SegmentBVH bvh(pts);
    for (int q = 0; q < 200; ++q) {
        const Cpx w(4.0 * rng.uniform01() - 2.0, 4.0 * rng.uniform01() - 2.0);
        double best = 1e300;
        for (size_t i = 0; i + 1 < pts.size(); ++i)
            best = std::min(best, dist_point_segment(w, pts[i], pts[i + 1]));
        CHECK(bvh.distance(w) == doctest::Approx(best).epsilon(1e-12));
        CHECK(bvh.meets_circle(w, best * 1.001));
        CHECK_FALSE(bvh.meets_circle(w, best * 0.999));
    }
}

TEST_CASE("curve first circle hit interpolates time") {
    PolylineCurve c({Cpx(0, 2), Cpx(0, 1), Cpx(0, 0.25)}, {0.0, 1.0, 2.0});
    const CircleHit h = curve_hits_circle(c, CircleSpec(0.0));  // unit circle
    REQUIRE(h.hit);
    CHECK(h.segment == 0);
    CHECK(h.time == doctest::Approx(1.0));
    CHECK(std::abs(h.point) == doctest::Approx(1.0));

    const CircleHit h2 = curve_hits_circle(c, CircleSpec(std::log(2.0)), 1.2);
    REQUIRE(h2.hit);  // radius 1/2, first reached after time 1.2
    CHECK(h2.time > 1.2);
    CHECK(std::abs(h2.point) == doctest::Approx(0.5));

    CHECK_FALSE(curve_hits_circle(c, CircleSpec(3.0)).hit);  // radius e^-3 never reached
}

TEST_CASE("simple curve check flags crossings") {
    PolylineCurve cross({Cpx(0, 1), Cpx(2, 1), Cpx(1, 0), Cpx(1, 2)});
    const auto bad = simple_curve_check(cross, 1e-6);
    CHECK_FALSE(bad.violations.empty());

    PolylineCurve fine({Cpx(0, 1), Cpx(1, 1), Cpx(1, 2), Cpx(0, 2)});
    const auto good = simple_curve_check(fine, 1e-6);
    CHECK(good.violations.empty());
    // min_gap only reflects pairs the spatial hash actually compared.
    CHECK(good.min_gap >= 0.99);

    // Near-touching but non-crossing segments show up as a small gap.
    PolylineCurve tight({Cpx(0, 1), Cpx(2, 1), Cpx(2, 1.5), Cpx(1, 1.001)});
    const auto close = simple_curve_check(tight, 0.01);
    CHECK_FALSE(close.violations.empty());
    CHECK(close.violations[0].gap > 0.0);
    CHECK(close.violations[0].gap < 0.01);
}

TEST_CASE("domain queries") {
    const DomainModel disk = DomainModel::unit_disk();
    CHECK(disk.contains(Cpx(0.5, 0)));
    CHECK_FALSE(disk.contains(Cpx(1.5, 0)));
    CHECK(disk.distance_to_boundary(Cpx(0.5, 0)) == doctest::Approx(0.5));

    const DomainModel rect = DomainModel::rectangle(2.0);
    CHECK(rect.contains(Cpx(1.0, 1.0)));
    CHECK_FALSE(rect.contains(Cpx(-0.1, 1.0)));
    CHECK(rect.piece_by_label("left") >= 0);
    CHECK(rect.piece_by_label("right") >= 0);
    CHECK(rect.piece_by_label("nope") == -1);

    const auto cr = rect.first_boundary_crossing(Cpx(1.0, 1.0), Cpx(3.0, 1.0));
    REQUIRE(cr.hit);
    CHECK(cr.point.real() == doctest::Approx(2.0));
    CHECK(rect.piece_label(cr.piece) == "right");
}

TEST_CASE("crosscut extraction") {
    // Circle centered at 0.6 of radius ~0.55 leaves the disk: one open arc.
    const DomainModel disk = DomainModel::unit_disk();
    const CircleSpec c(0.6, Cpx(0.6, 0.0));
    const auto cuts = extract_crosscuts(disk, c);
    REQUIRE(cuts.size() == 1);
    CHECK_FALSE(cuts[0].closed);
    // Arc endpoints must lie on the unit circle.
    const Cpx e0 = cuts[0].point_at(0.0), e1 = cuts[0].point_at(1.0);
    CHECK(std::abs(e0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(e1) == doctest::Approx(1.0).epsilon(1e-6));
    // Midpoint lies inside.
    CHECK(disk.contains(cuts[0].point_at(0.5)));

    // Small interior circle: a single closed crosscut.
    const auto whole = extract_crosscuts(disk, CircleSpec(2.0));
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].closed);

    // Slit ending inside the circle cuts it at one point: a single open arc
    // of full angular measure.
    PolylineCurve slit({Cpx(1, 0), Cpx(0.2, 0)});
    const DomainModel sd = DomainModel::slit_disk({slit});
    const auto one = extract_crosscuts(sd, CircleSpec(std::log(2.0)));
    REQUIRE(one.size() == 1);
    CHECK_FALSE(one[0].closed);
    CHECK(one[0].angular_measure() == doctest::Approx(2.0 * kPi).epsilon(1e-6));

    // A diameter-like slit crossing the circle twice leaves two arcs.
    PolylineCurve diam({Cpx(1, 0), Cpx(-0.7, 0)});
    const DomainModel sd2 = DomainModel::slit_disk({diam});
    const auto two = extract_crosscuts(sd2, CircleSpec(std::log(2.0)));
    REQUIRE(two.size() == 2);
    CHECK(two[0].angular_measure() == doctest::Approx(kPi).epsilon(1e-6));
    CHECK(two[1].angular_measure() == doctest::Approx(kPi).epsilon(1e-6));
}

TEST_CASE("mobius disk to half plane") {
    RngStream rng(77, 0);
    for (int i = 0; i < 50; ++i) {
        const double theta = 0.05 + 3.0 * rng.uniform01();
        const MobiusMap m = mobius_disk_to_half(theta);
        CHECK(std::abs(m.eval(Cpx(1, 0))) < 1e-12);
        const Cpx img0 = m.eval(Cpx(0, 0));
        CHECK(img0.real() == doctest::Approx(std::cos(theta)).epsilon(1e-12));
        CHECK(img0.imag() == doctest::Approx(std::sin(theta)).epsilon(1e-12));
        // Interior maps to the upper half plane.
        CHECK(m.eval(Cpx(0.3, -0.4)).imag() > 0.0);
        // Derivative agrees with a finite difference.
        const Cpx z(0.2, 0.1);
        const Cpx h(1e-6, 0.0);
        const Cpx fd = (m.eval(z + h) - m.eval(z - h)) / (2.0 * h);
        CHECK(std::abs(m.deriv(z) - fd) < 1e-5);
        // Round trip.
        CHECK(std::abs(m.inverse(m.eval(z)) - z) < 1e-12);
    }
}
