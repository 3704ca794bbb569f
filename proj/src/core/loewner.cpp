#include "loewner.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace slelab {

namespace {

void check_kappa(double kappa) {
    if (!(kappa > 0.0 && kappa <= 4.0)) fail_invalid("kappa must lie in (0, 4]");
}

// Smaller-modulus root of q^2 - 2 eta q + 1 = 0. The roots multiply to 1;
// the larger one is formed cancellation-free, the smaller is its reciprocal.
inline Cpx root_in_disk(Cpx eta) {
    Cpx r = std::sqrt(eta * eta - 1.0);
    if (eta.real() * r.real() + eta.imag() * r.imag() < 0.0) r = -r;
    const Cpx big = eta + r;
    const double m = abs2(big);
    if (m <= 1.0) return big;
    return Cpx(big.real() / m, -big.imag() / m);
}

}  // namespace

// ChordalHull ---------------------------------------------------------------

namespace {

// Straight-slit step for a knot pair (dt, du): the driving moves
// square-root shaped from the base value to base+du while the hull grows a
// straight segment of half-plane capacity a dt at angle pi*alpha.  The
// preimage interval has width l = sqrt(8 a dt + du^2); alpha = (l-du)/(2l).
struct SlitStep {
    double al, l;
};

inline SlitStep slit_step(double a, double dt, double du) {
    const double l = std::sqrt(8.0 * a * dt + du * du);
    return {0.5 * (1.0 - du / l), l};
}

// Welds the slit back in: v is the chart coordinate relative to the step's
// base knot, the image is (v + al*l)^(1-al) * (v - (1-al)*l)^al.  The map is
// hydrodynamically normalized, the tip preimage sits at v = du, and al = 1/2
// reduces to sqrt(v^2 - 2 a dt).  Signed zeros in the imaginary part keep
// real points on the correct side of the cut.
inline Cpx slit_image(Cpx v, double al, double l) {
    // exp((1-al) log(v + al l) + al log(v - (1-al) l)) in real arithmetic;
    // atan2 keeps the signed-zero boundary sides that the principal log uses.
    const double xim = v.imag();
    const double are = v.real() + al * l;
    const double bre = v.real() - (1.0 - al) * l;
    const double lr = (1.0 - al) * (0.5 * std::log(are * are + xim * xim)) +
                      al * (0.5 * std::log(bre * bre + xim * xim));
    const double th = (1.0 - al) * std::atan2(xim, are) + al * std::atan2(xim, bre);
    const double r = std::exp(lr);
    return Cpx(r * std::cos(th), r * std::sin(th));
}

inline Cpx slit_tip(double al, double l) {  // relative to the base knot
    const double r = l * std::pow(1.0 - al, 1.0 - al) * std::pow(al, al);
    return r * Cpx(std::cos(kPi * al), std::sin(kPi * al));
}

// Inverse of slit_image by damped Newton.  The vertical-slit seed (exact at
// al = 1/2) covers generic targets; near the tip the map folds, so two
// quadratic-expansion seeds bracket the fold, and a far-above seed mops up.
// Interior targets have interior preimages; failure is reported via *ok.
inline Cpx slit_preimage(Cpx tau, double al, double l, Cpx* grad, bool* ok) {
    const double p = al * l, q = (1.0 - al) * l;
    const double xs = q - p;                   // fold (tip preimage) = du
    const double cap2 = p * q / 2.0;           // 2 a dt
    const Cpx tip = slit_tip(al, l);
    const double tol = 1e-13 * (1.0 + std::abs(tau));
    const Cpx fold_off = std::sqrt(2.0 * cap2 * (1.0 - tau / tip));
    const Cpx seeds[4] = {
        sqrt_upper(tau * tau + p * q) + Cpx(0.5 * xs, 0.0),
        Cpx(xs, 0.0) + fold_off,
        Cpx(xs, 0.0) - fold_off,
        Cpx(xs, 3.0 * (l + std::abs(tau))),
    };
    *ok = false;
    for (const Cpx& seed : seeds) {
        Cpx v = seed;
        if (v.imag() < 0.0) v = std::conj(v);
        Cpx res = slit_image(v, al, l) - tau;
        double rn = std::abs(res);
        for (int it = 0; it < 60; ++it) {
            if (rn <= tol) {
                const Cpx g = (res + tau) * ((1.0 - al) / (v + p) + al / (v - q));
                if (is_finite_point(g) && v.imag() > -1e-9 * (1.0 + std::abs(v))) {
                    *grad = g;
                    *ok = true;
                    return v;
                }
                break;
            }
            const Cpx g = (res + tau) * ((1.0 - al) / (v + p) + al / (v - q));
            if (!(std::abs(g) > 0.0) || !is_finite_point(g)) break;
            const Cpx step = res / g;
            double scale = 1.0;
            Cpx vn = v;
            Cpx rn_res = res;
            double rn_new = rn;
            bool improved = false;
            for (int h = 0; h < 14; ++h) {
                vn = v - scale * step;
                rn_res = slit_image(vn, al, l) - tau;
                rn_new = std::abs(rn_res);
                if (rn_new < rn) {
                    improved = true;
                    break;
                }
                scale *= 0.5;
            }
            if (!improved) break;
            v = vn;
            res = rn_res;
            rn = rn_new;
        }
    }
    *grad = Cpx(0.0, 0.0);
    return Cpx(0.0, -1.0);
}

}  // namespace

ChordalHull::ChordalHull(double kappa) : a_(2.0 / kappa) {
    check_kappa(kappa);
    t_.push_back(0.0);
    u_.push_back(0.0);
}

void ChordalHull::push(double dt, double du) {
    if (!(dt > 0.0)) fail_invalid("step size must be positive");
    const SlitStep s = slit_step(a_, dt, du);
    uL_.push_back(u_.back());
    al_.push_back(s.al);
    ell_.push_back(s.l);
    t_.push_back(t_.back() + dt);
    u_.push_back(u_.back() + du);
}

Cpx ChordalHull::tip_with(double dt, double du) const {
    Cpx w(u_.back() + du, 0.0);
    if (dt > 0.0) {
        const SlitStep s = slit_step(a_, dt, du);
        w = u_.back() + slit_tip(s.al, s.l);
    }
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(al_.size()) - 1; j >= 0; --j) {
        w = uL_[j] + slit_image(w - uL_[j], al_[j], ell_[j]);
    }
    return w;
}

Cpx ChordalHull::map_forward(Cpx z, Cpx* deriv, bool* swallowed) const {
    if (swallowed) *swallowed = false;
    Cpx w = z;
    Cpx der(1.0, 0.0);
    for (std::size_t j = 0; j < al_.size(); ++j) {
        Cpx grad(0.0, 0.0);
        bool ok = false;
        const Cpx v = slit_preimage(w - uL_[j], al_[j], ell_[j], &grad, &ok);
        if (!ok || v.imag() < -1e-10 * (1.0 + std::abs(v))) {
            if (!swallowed) fail_numeric("point swallowed during forward transport");
            *swallowed = true;
            break;
        }
        if (deriv) der /= grad;
        w = uL_[j] + v;
    }
    if (deriv) *deriv = der;
    return w;
}

Cpx ChordalHull::map_back(Cpx w) const {
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(al_.size()) - 1; j >= 0; --j) {
        w = uL_[j] + slit_image(w - uL_[j], al_[j], ell_[j]);
    }
    return w;
}

// RadialHull ------------------------------------------------------------------

RadialHull::RadialHull(double kappa) : a_(2.0 / kappa) {
    check_kappa(kappa);
    t_.push_back(0.0);
    u_.push_back(0.0);
}

void RadialHull::push(double dt, double du) {
    if (!(dt > 0.0)) fail_invalid("step size must be positive");
    uL_.push_back(u_.back());
    f_.push_back(std::exp(a_ * dt));
    rot_.push_back(Cpx(std::cos(du), std::sin(du)));
    t_.push_back(t_.back() + dt);
    u_.push_back(u_.back() + du);
}

double RadialHull::conformal_radius() const { return std::exp(-2.0 * a_ * time()); }

Cpx RadialHull::tip_with(double dt, double du) const {
    // s = e^{i (L - base)} with the base driving value of the chart in force;
    // each inverse map is one root extraction, each chart change a rotation.
    Cpx s(std::cos(du), std::sin(du));
    if (dt > 0.0) {
        const Cpx eta = std::exp(a_ * dt) * 0.5 * (s + 1.0 / s);
        s = root_in_disk(eta);
    }
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(f_.size()) - 1; j >= 0; --j) {
        s *= rot_[j];
        const Cpx eta = f_[j] * 0.5 * (s + 1.0 / s);
        s = root_in_disk(eta);
    }
    return s * s;
}

Cpx RadialHull::map_forward(Cpx z, Cpx* deriv, bool* swallowed) const {
    if (swallowed) *swallowed = false;
    Cpx s = std::sqrt(z);
    Cpx der(1.0, 0.0);
    std::size_t applied = 0;
    for (std::size_t j = 0; j < f_.size(); ++j, ++applied) {
        if (j > 0) s *= std::conj(rot_[j - 1]);
        const Cpx old = s;
        const Cpx eta = (0.5 / f_[j]) * (s + 1.0 / s);
        s = root_in_disk(eta);
        if (deriv) der *= (old - 1.0 / old) / (f_[j] * (s - 1.0 / s));
        if (abs2(s) >= 1.0) {
            if (!swallowed) fail_numeric("point swallowed during forward transport");
            *swallowed = true;
            return s * s;
        }
    }
    const double base = f_.empty() ? 0.0 : uL_.back();
    const Cpx w = s * s * Cpx(std::cos(2.0 * base), std::sin(2.0 * base));
    if (deriv) *deriv = (z == 0.0) ? der : der * w / z;
    return w;
}

Cpx RadialHull::map_back(Cpx w) const {
    const double base = f_.empty() ? 0.0 : uL_.back();
    Cpx s = std::sqrt(w) * Cpx(std::cos(base), -std::sin(base));
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(f_.size()) - 1; j >= 0; --j) {
        const Cpx eta = f_[j] * 0.5 * (s + 1.0 / s);
        s = root_in_disk(eta);
        if (j > 0) s *= rot_[j - 1];
    }
    return s * s;
}

// Tracing ---------------------------------------------------------------------

namespace {

struct Prop {
    double dt = 0.0;
    double du = 0.0;
    std::size_t lo = 0, hi = 0;  // grid-cell range for aggregated drivings
};

class ProposalSource {
public:
    virtual ~ProposalSource() = default;
    virtual Prop propose(double dt) = 0;
    virtual bool split(const Prop& p, double dt_min, Prop* l, Prop* r) = 0;
};

// Lazy Brownian driving; refinement splits an increment with the bridge, so
// the refined path extends the coarse one instead of replacing it.
class BrownianSource : public ProposalSource {
public:
    explicit BrownianSource(RngStream& rng) : rng_(rng) {}

    Prop propose(double dt) override { return {dt, rng_.gaussian_dt(dt), 0, 0}; }

    bool split(const Prop& p, double dt_min, Prop* l, Prop* r) override {
        if (p.dt <= 2.0 * dt_min) return false;
        const double left = 0.5 * p.du + 0.5 * std::sqrt(p.dt) * rng_.gaussian();
        *l = {0.5 * p.dt, left, 0, 0};
        *r = {0.5 * p.dt, p.du - left, 0, 0};
        return true;
    }

private:
    RngStream& rng_;
};

// Driving of the two-sided angle SDE, materialized once on a fixed grid.
// Proposals aggregate whole cells and refinement only regroups them, so the
// path law never depends on where refinement happened.
class TwoSidedSource : public ProposalSource {
public:
    TwoSidedSource(double kappa, double theta, double dt_grid, RngStream& rng)
        : gen_(kappa, theta, dt_grid, &rng), dtg_(dt_grid) {}

    Prop propose(double dt) override {
        const std::size_t m =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dt / dtg_)));
        ensure(consumed_ + m);
        Prop p{static_cast<double>(m) * dtg_,
               prefix_[consumed_ + m] - prefix_[consumed_], consumed_, consumed_ + m};
        consumed_ += m;
        return p;
    }

    bool split(const Prop& p, double, Prop* l, Prop* r) override {
        const std::size_t n = p.hi - p.lo;
        if (n < 2) return false;
        const std::size_t mid = p.lo + n / 2;
        *l = {static_cast<double>(mid - p.lo) * dtg_, prefix_[mid] - prefix_[p.lo], p.lo, mid};
        *r = {static_cast<double>(p.hi - mid) * dtg_, prefix_[p.hi] - prefix_[mid], mid, p.hi};
        return true;
    }

private:
    void ensure(std::size_t cells) {
        while (prefix_.size() <= cells) {
            prefix_.push_back(prefix_.back() + gen_.advance().du);
        }
    }

    TwoSidedDriving gen_;
    double dtg_;
    std::vector<double> prefix_{0.0};
    std::size_t consumed_ = 0;
};

template <class Hull>
SleCurveSample run_trace(Hull& hull, ProposalSource& src, double dt_base,
                         const TraceLimits& lim, const TraceHooks& hooks,
                         const char* kind) {
    if (!(dt_base > 0.0)) fail_invalid("dt_base must be positive");
    SleCurveSample out;
    out.kind = kind;
    out.kappa = 2.0 / hull.a();
    out.dt_base = dt_base;

    Cpx z_cur = hull.tip();
    out.curve.points.push_back(z_cur);
    out.curve.times.push_back(hull.time());

    const double dt_max = lim.dt_max > 0.0 ? lim.dt_max : dt_base;
    double dt_pref = std::min(dt_base, dt_max);
    const double t_tol = 1e-12 * (1.0 + std::abs(lim.t_cap));
    std::vector<Prop> pend;
    std::size_t committed = 0;
    bool stopped = false;

    while (true) {
        const double remaining = lim.t_cap - hull.time();
        if (pend.empty()) {
            if (remaining <= t_tol) break;
            double want = dt_pref;
            if (std::isfinite(remaining) && remaining < 1.5 * dt_pref) want = remaining;
            pend.push_back(src.propose(want));
        }
        if (committed >= lim.max_steps) fail_numeric("trace exceeded its step budget");

        const Prop p = pend.back();
        const Cpx z_new = hull.tip_with(p.dt, p.du);
        const double delta = hooks.delta_target ? hooks.delta_target(z_cur) : 0.0;
        // The appended piece runs from the current tip to z_new, but where
        // the scheme holds the driving over the step (radial), the piece is a
        // capacity-dt slit whose reach the chord alone does not see; the
        // zero-increment slit top joins the chord in the displacement budget
        // so quiet driving cannot plant oversized hull pieces.
        double extent = std::abs(z_new - z_cur);
        if (delta > 0.0 && p.dt > 0.0) {
            extent = std::max(extent, std::abs(hull.tip_with(p.dt, 0.0) - z_cur));
        }
        if (delta > 0.0 && extent > delta && p.dt > lim.dt_min) {
            Prop l, r;
            if (src.split(p, lim.dt_min, &l, &r)) {
                pend.back() = r;
                pend.push_back(l);
                continue;
            }
        }
        if (!is_finite_point(z_new)) fail_numeric("tip evaluation lost finiteness");

        pend.pop_back();
        hull.push(p.dt, p.du);
        ++committed;
        out.curve.points.push_back(z_new);
        out.curve.times.push_back(hull.time());
        if (hooks.on_segment && hooks.on_segment(z_cur, z_new, hull.time())) {
            stopped = true;
            break;
        }
        if (delta > 0.0) {
            const double ratio = extent / delta;
            if (ratio < 0.3) dt_pref = std::min(dt_pref * 1.8, dt_max);
            else if (ratio > 0.75) dt_pref = std::max(dt_pref * 0.5, lim.dt_min);
        }
        z_cur = z_new;
    }

    out.driving.times = hull.knot_times();
    out.driving.values = hull.knot_values();
    out.stop_criterion = stopped ? "hook" : "t_cap";
    return out;
}

}  // namespace

SleCurveSample trace_chordal(ChordalHull& hull, double dt_base, const TraceLimits& lim,
                             const TraceHooks& hooks, RngStream& rng) {
    BrownianSource src(rng);
    return run_trace(hull, src, dt_base, lim, hooks, "chordal");
}

SleCurveSample trace_radial(RadialHull& hull, double dt_base, const TraceLimits& lim,
                            const TraceHooks& hooks, RngStream& rng) {
    BrownianSource src(rng);
    return run_trace(hull, src, dt_base, lim, hooks, "radial");
}

SleCurveSample trace_two_sided(RadialHull& hull, double kappa, double theta,
                               double dt_base, const TraceLimits& lim,
                               const TraceHooks& hooks, RngStream& rng) {
    TwoSidedSource src(kappa, theta, dt_base, rng);
    SleCurveSample out = run_trace(hull, src, dt_base, lim, hooks, "two_sided_radial");
    out.theta = theta;
    return out;
}

// Samplers --------------------------------------------------------------------

SleCurveSample sample_chordal(double kappa, double dt_base, double t_max,
                              RngStream& rng, double delta_max) {
    if (!(t_max >= 0.0)) fail_invalid("t_max must be nonnegative");
    ChordalHull hull(kappa);
    TraceLimits lim;
    lim.t_cap = t_max;
    TraceHooks hooks;
    if (delta_max > 0.0) hooks.delta_target = [delta_max](const Cpx&) { return delta_max; };
    SleCurveSample out = trace_chordal(hull, dt_base, lim, hooks, rng);
    out.stop_criterion = "t_max";
    return out;
}

SleCurveSample sample_radial(double kappa, double dt_base, double t_max,
                             RngStream& rng, double delta_max) {
    if (!(t_max >= 0.0)) fail_invalid("t_max must be nonnegative");
    RadialHull hull(kappa);
    TraceLimits lim;
    lim.t_cap = t_max;
    TraceHooks hooks;
    if (delta_max > 0.0) hooks.delta_target = [delta_max](const Cpx&) { return delta_max; };
    SleCurveSample out = trace_radial(hull, dt_base, lim, hooks, rng);
    out.stop_criterion = "t_max";
    return out;
}

SleCurveSample sample_two_sided_radial(double kappa, double theta, double dt_base,
                                       double cr_stop, RngStream& rng, double delta_rel) {
    if (!(cr_stop > 0.0 && cr_stop < 1.0)) fail_invalid("cr_stop must lie in (0, 1)");
    RadialHull hull(kappa);
    TraceLimits lim;
    lim.t_cap = -std::log(cr_stop) / (2.0 * hull.a());
    lim.dt_max = std::numeric_limits<double>::infinity();
    TraceHooks hooks;
    if (delta_rel > 0.0) {
        RadialHull* h = &hull;
        hooks.delta_target = [h, delta_rel](const Cpx&) {
            return delta_rel * h->conformal_radius();
        };
    }
    SleCurveSample out = trace_two_sided(hull, kappa, theta, dt_base, lim, hooks, rng);
    out.stop_criterion = "conformal_radius";
    return out;
}

// Green's functions ------------------------------------------------------------

double greens_half_plane(Cpx zeta, const GreensParams& gp) {
    check_kappa(gp.kappa);
    if (!(zeta.imag() > 0.0)) fail_invalid("zeta must lie in the open upper half plane");
    const double y = zeta.imag();
    const double s = y / std::abs(zeta);
    return gp.c_hat * std::pow(y, gp.d() - 2.0) * std::pow(s, 4.0 * gp.a() - 1.0);
}

double greens_disk_center(double theta, const GreensParams& gp) {
    check_kappa(gp.kappa);
    if (!(theta > 0.0 && theta < kPi)) fail_invalid("theta must lie in (0, pi)");
    return gp.c_hat * std::pow(std::sin(theta), 4.0 * gp.a() - 1.0);
}

double sle_sin_function(const ChordalHull& hull, Cpx zeta) {
    bool swallowed = false;
    const Cpx w = hull.map_forward(zeta, nullptr, &swallowed);
    if (swallowed) return std::numeric_limits<double>::quiet_NaN();
    const Cpx d = w - hull.u_end();
    return d.imag() / std::abs(d);
}

}  // namespace slelab
