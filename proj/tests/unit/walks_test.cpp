#include <doctest.h>

#include <cmath>

#include "core/geometry.hpp"
#include "core/rng.hpp"
#include "core/walks.hpp"

using namespace slelab;

namespace {

// Exact harmonic measure from z in the unit disk of the boundary arc
// [phi0, phi1] (Poisson kernel integral, midpoint rule).
double disk_arc_measure(Cpx z, double phi0, double phi1) {
    const int n = 20000;
    const double h = (phi1 - phi0) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double phi = phi0 + (i + 0.5) * h;
        const Cpx b(std::cos(phi), std::sin(phi));
        s += (1.0 - std::norm(z)) / std::norm(b - z) * h;
    }
    return s / (2.0 * kPi);
}

}  // namespace

TEST_CASE("disk exit law matches the poisson kernel") {
    const DomainModel disk = DomainModel::unit_disk();
    const Cpx z(0.3, 0.1);
    const double phi0 = -0.7, phi1 = 1.1;
    const double exact = disk_arc_measure(z, phi0, phi1);

    long long hit_wos = 0, hit_fs = 0;
    const long long n_wos = 40000, n_fs = 8000;
    for (long long k = 0; k < n_wos; ++k) {
        RngStream rng(101, uint64_t(k));
        const auto out = walk_to_boundary(disk, z, WalkScheme::wos(), {}, rng);
        const double ang = std::atan2(out.exit_point.imag(), out.exit_point.real());
        hit_wos += (ang >= phi0 && ang <= phi1);
    }
    for (long long k = 0; k < n_fs; ++k) {
        RngStream rng(102, uint64_t(k));
        const auto out = walk_to_boundary(disk, z, WalkScheme::fixed_step(5e-3), {}, rng);
        const double ang = std::atan2(out.exit_point.imag(), out.exit_point.real());
        hit_fs += (ang >= phi0 && ang <= phi1);
    }
    const double p_wos = double(hit_wos) / n_wos;
    const double p_fs = double(hit_fs) / n_fs;
    const double se_wos = std::sqrt(exact * (1 - exact) / n_wos);
    const double se_fs = std::sqrt(exact * (1 - exact) / n_fs);
    CHECK(std::abs(p_wos - exact) < 4.0 * se_wos);
    CHECK(std::abs(p_fs - exact) < 4.0 * se_fs + 0.01);  // O(h) boundary bias allowance
}

TEST_CASE("half plane exit is cauchy") {
    const DomainModel hp = DomainModel::half_plane();
    long long hits = 0;
    const long long n = 30000;
    for (long long k = 0; k < n; ++k) {
        RngStream rng(103, uint64_t(k));
        const auto out = walk_to_boundary(hp, Cpx(0, 1), WalkScheme::wos(), {}, rng);
        const double x = out.exit_point.real();
        hits += (x >= 0.0 && x <= 1.0);
    }
    const double exact = 0.25;  // atan(1)/pi
    const double se = std::sqrt(exact * (1 - exact) / n);
    CHECK(std::abs(double(hits) / n - exact) < 4.0 * se);
}

TEST_CASE("tracked sets record first visits") {
    const DomainModel disk = DomainModel::unit_disk();
    const TrackedSet seg = TrackedSet::segment(Cpx(-0.2, 0.4), Cpx(0.2, 0.4));

    // Recording mode: visited flag set, walk continues to the boundary.
    long long vis_wos = 0, vis_fs = 0, absorbed_short = 0;
    const long long n = 12000;
    for (long long k = 0; k < n; ++k) {
        RngStream rng(104, uint64_t(k));
        const auto out = walk_to_boundary(disk, Cpx(0, 0), WalkScheme::wos(), {seg}, rng);
        REQUIRE(out.visited.size() == 1);
        vis_wos += out.visited[0];
        CHECK(std::abs(out.exit_point) == doctest::Approx(1.0).epsilon(1e-3));
    }
    for (long long k = 0; k < n; ++k) {
        RngStream rng(105, uint64_t(k));
        const auto out = walk_to_boundary(disk, Cpx(0, 0), WalkScheme::fixed_step(4e-3), {seg}, rng);
        vis_fs += out.visited[0];
    }
    const double p1 = double(vis_wos) / n, p2 = double(vis_fs) / n;
    const double se = std::sqrt(p1 * (1 - p1) / n);
    // The two walk schemes must agree on the visit law.
    CHECK(std::abs(p1 - p2) < 4.0 * std::sqrt(2.0) * se + 0.012);

    // Absorbing mode stops on the tracked set.
    WalkOptions opts;
    opts.absorb_tracked = true;
    for (long long k = 0; k < 2000; ++k) {
        RngStream rng(104, uint64_t(k));  // same stream as the recording run
        const auto out = walk_to_boundary(disk, Cpx(0, 0), WalkScheme::wos(), {seg}, rng, opts);
        if (out.tracked_hit == 0) {
            ++absorbed_short;
            CHECK(seg.distance(out.exit_point) < 5e-3);
        }
    }
    CHECK(absorbed_short > 0);
}

TEST_CASE("two rays tracked set") {
    const TrackedSet rays = TrackedSet::two_rays(-1.0, 1.0);
    CHECK(rays.distance(Cpx(0, 0.5)) == doctest::Approx(std::hypot(1.0, 0.5)).epsilon(1e-12));
    CHECK(rays.distance(Cpx(2, 0)) == doctest::Approx(0.0));
    CHECK(rays.segment_crosses(Cpx(1.5, 0.5), Cpx(1.5, -0.5)));
    CHECK_FALSE(rays.segment_crosses(Cpx(0.0, 0.5), Cpx(0.0, -0.5)));
}

TEST_CASE("bridge refinement preserves endpoint sums") {
    RngStream rng(106, 0);
    BrownianIncrements coarse;
    for (int i = 0; i < 32; ++i) {
        coarse.dt.push_back(0.25);
        coarse.dw.push_back(rng.gaussian_dt(0.25));
    }
    const BrownianIncrements fine = brownian_bridge_refine(coarse, 4, rng);
    REQUIRE(fine.dw.size() == 4 * coarse.dw.size());
    for (size_t i = 0; i < coarse.dw.size(); ++i) {
        double sw = 0.0, st = 0.0;
        for (int j = 0; j < 4; ++j) {
            sw += fine.dw[4 * i + j];
            st += fine.dt[4 * i + j];
        }
        CHECK(sw == doctest::Approx(coarse.dw[i]).epsilon(1e-12));
        CHECK(st == doctest::Approx(coarse.dt[i]).epsilon(1e-12));
    }
}
