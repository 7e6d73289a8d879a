#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "robctl/control.hpp"

using namespace robctl;

namespace {

constexpr double pi = std::numbers::pi;

Vec v(std::initializer_list<double> xs) {
    Vec r(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) r(i++) = x;
    return r;
}

Vec dip_gain() { return v({-259.52, 6.72, 482.48, 118.72, 20.48, 30.72}); }

} // namespace

TEST_CASE("PID examples") {
    PidController zero(3, 2, 1, 0.01);
    for (int i = 0; i < 50; ++i) CHECK(pid_step(zero, 0.0) == 0.0);

    PidController p(1, 0, 0, 0.01);
    CHECK(pid_step(p, 2.0) == 2.0);

    PidController in(0, 1, 0, 0.1);
    double out = 0;
    for (int i = 0; i < 10; ++i) out = pid_step(in, 1.0);
    CHECK(out == doctest::Approx(1.0));

    PidController d(0, 0, 1, 0.5);
    CHECK(pid_step(d, 3.0) == 0.0); // first step has no derivative kick
    CHECK(pid_step(d, 4.0) == doctest::Approx(2.0));
    CHECK(d.integral_accum == doctest::Approx(3.5));

    CHECK_THROWS_AS(PidController(1, 1, 1, 0.0), Error);
}

TEST_CASE("full-state feedback and the sliding target") {
    CHECK(fsfc(v({1, 2}), v({3, 4}), v({3, 4})) == 0.0);
    CHECK(fsfc(v({1, 0}), v({2, 5}), v({0, 0})) == -2.0);
    CHECK_THROWS_AS(fsfc(v({1, 0}), v({2, 5, 1}), v({0, 0, 0})), Error);

    SlidingTargetDIP tgt;
    Vec e0 = dip_sliding_target(tgt, 0.0);
    CHECK(e0(4) == 20.0);
    // position error is zeroed at the start, only the angles contribute
    const Vec x = v({0.2, 0, 0, 0, 20, 0});
    CHECK(fsfc(dip_gain(), x, e0) == doctest::Approx(259.52 * 0.2));

    CHECK(dip_sliding_target(tgt, 2.5)(4) == 0.0);
    CHECK(dip_sliding_target(tgt, 100.0)(4) == 0.0);
    CHECK(dip_sliding_target({-4.0, 8.0}, 0.25)(4) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(dip_sliding_target({1.0, 0.0}, 0.0), Error);

    CHECK(shrink_toward_zero(0.005, 0.008) == 0.0);
    CHECK(shrink_toward_zero(-0.005, 0.008) == 0.0);
    CHECK(shrink_toward_zero(1.0, 0.25) == 0.75);
}

TEST_CASE("sliding target is Lipschitz and reaches zero in finite time") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> x0d(-50, 50), sv(0.5, 10), td(0, 20);
    for (int i = 0; i < 200; ++i) {
        SlidingTargetDIP tgt{x0d(rng), sv(rng)};
        const double a = td(rng), b = td(rng);
        const double diff = std::abs(dip_sliding_target(tgt, a)(4) - dip_sliding_target(tgt, b)(4));
        CHECK(diff <= tgt.s_v * std::abs(a - b) + 1e-12);
        CHECK(dip_sliding_target(tgt, std::abs(tgt.x0) / tgt.s_v)(4) == 0.0);
        CHECK(std::abs(dip_sliding_target(tgt, 0.0)(4)) == std::abs(tgt.x0));
    }
    // stepwise shrink agrees with the closed form
    SlidingTargetDIP tgt;
    double x = tgt.x0;
    for (int k = 1; k <= 3000; ++k) {
        x = shrink_toward_zero(x, tgt.s_v * 0.001);
        if (k % 250 == 0) CHECK(x == doctest::Approx(dip_sliding_target(tgt, k * 0.001)(4)).epsilon(1e-9));
    }
}

TEST_CASE("motorcycle guidance") {
    MotorcycleGuidance g = default_motorcycle_guidance();
    CHECK(g.pose_D().x == doctest::Approx(32.62).epsilon(1e-3));
    CHECK(g.pose_D().y == doctest::Approx(21.80).epsilon(1e-3));
    // independent intersection of the two lines
    const double t1 = pi / 8, t2 = pi / 4;
    const double xI = 0, yI = -0.2, xD = g.pose_D().x, yD = g.pose_D().y;
    const double s = ((xD - xI) * std::sin(t2) - (yD - yI) * std::cos(t2)) / std::sin(t2 - t1);
    CHECK(g.turning_x() == doctest::Approx(xI + s * std::cos(t1)));
    CHECK(g.turning_y() == doctest::Approx(yI + s * std::sin(t1)));
    CHECK(std::abs(g.turning_x() - 18.14) <= 0.01);
    CHECK(std::abs(g.turning_y() - 7.31) <= 0.01);
    CHECK(g.preview() == 6.0);

    const Vec K = v({-0.0586, -0.9375, -0.7711, -0.2437});
    Pose on{5 * std::cos(t1), -0.2 + 5 * std::sin(t1), t1};
    CHECK(std::abs(g.step(on, 0, 0, K)) <= 1e-12);
    CHECK(g.active_line() == 1);

    // 5.9 m before the turning point along line 1
    Pose near{g.turning_x() - 5.9 * std::cos(t1), g.turning_y() - 5.9 * std::sin(t1), t1};
    g.step(near, 0, 0, K);
    CHECK(g.active_line() == 2);
    auto [ybar, phibar] = g.line_frame(near);
    CHECK(phibar == doctest::Approx(t1 - t2));
    // distance from line 2, measured independently
    const double d2 = -std::sin(t2) * (near.x - xD) + std::cos(t2) * (near.y - yD);
    CHECK(ybar == doctest::Approx(d2));
    // never switches back
    g.step(on, 0, 0, K);
    CHECK(g.active_line() == 2);

    CHECK_THROWS_AS(MotorcycleGuidance({0, 0, 0.3}, {5, 5, 0.3 + pi}), Error);
    CHECK_THROWS_AS(MotorcycleGuidance({0, 0, 0.3}, {5, 5, 1.0}, 0.0), Error);
}

TEST_CASE("adaptive gain scheduling") {
    const auto eigs = repeated_pole(-4, 3);
    SipParams p;
    FactoredModel m0 = sip_partial(sip_factored_model(0.0));
    CHECK((adaptive_gain(0.0, AdaptiveMode::per_period, eigs, p) - design_gain_matrix(m0.A, m0.B, eigs).k).norm() <= 1e-12);

    GainLookup lk = make_gain_lookup(eigs, p);
    CHECK(adaptive_gain(0.3, AdaptiveMode::lookup, eigs, p) == lk.K1);
    CHECK(adaptive_gain(-0.6, AdaptiveMode::lookup, eigs, p) == lk.K2);
    CHECK(adaptive_gain(pi / 3, AdaptiveMode::lookup, eigs, p) == lk.K3);
    CHECK(adaptive_gain(0.4 * pi, AdaptiveMode::lookup, eigs, p) == lk.K3);
    FactoredModel mm = sip_partial(sip_factored_model(0.4 * pi));
    CHECK((lk.K3 - design_gain_matrix(mm.A, mm.B, eigs).k).norm() <= 1e-12);

    // per-period gains place the poles of the frozen model at every angle
    for (double th = -1.2; th <= 1.2; th += 0.15) {
        Vec k = adaptive_gain(th, AdaptiveMode::per_period, eigs, p);
        FactoredModel f = sip_partial(sip_factored_model(th, 1.0, 10.0, 0.1));
        for (const Complex& e : eigenvalues(f.A - f.B * k.transpose())) CHECK(std::abs(e - Complex(-4, 0)) < 1e-2);
    }
}

TEST_CASE("system identification window") {
    SysIdWindow w(5);
    CHECK(w.capacity() == 6);
    CHECK_THROWS_AS(sysid_solve(w), Error);

    // exact samples of the frozen model at theta = 0.2
    const double th = 0.2;
    const double t1 = 10 * std::sin(th) / th, t2 = -std::cos(th);
    for (int i = 0; i < 6; ++i) {
        const double a = 0.5 + i;
        w.push(v({th, a}), t1 * th + t2 * a);
    }
    CHECK(w.warm());
    Vec theta = sysid_solve(w);
    CHECK(theta(0) == doctest::Approx(9.9335).epsilon(1e-4));
    CHECK(theta(1) == doctest::Approx(-0.98007).epsilon(1e-4));
    CHECK(w.mean_regressor(0) == doctest::Approx(th));

    // newest first, oldest evicted
    w.push(v({0.0, 9.0}), 1.0);
    CHECK(w.design()(0, 1) == 9.0);
    CHECK(w.design().rows() == 6);

    SysIdWindow z(5);
    for (int i = 0; i < 6; ++i) z.push(v({0.0, 1.0 + i}), -(1.0 + i));
    CHECK_THROWS_AS(sysid_solve(z), Error);
    CHECK_THROWS_AS(z.push(v({1, 2, 3}), 0), Error);
}

TEST_CASE("identification from an Euler-simulated pendulum") {
    // backward-difference acceleration; a fresh random input every step keeps the two regressor columns apart
    const double dt = 0.001;
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> probe(-3, 3);
    PlantModel sip = sip_plant();
    Vec x = v({0.3, 0, 0, 0});
    SysIdWindow w(5);
    double prev_dtheta = x(1);
    int checked = 0;
    for (int k = 0; k < 400; ++k) {
        const double a = probe(rng);
        Vec xn = step_euler(sip, x, Vec::Constant(1, a), dt);
        const double acc = (xn(1) - prev_dtheta) / dt;
        w.push(v({x(0), a}), acc);
        prev_dtheta = xn(1);
        if (w.warm() && k % 20 == 0) {
            Vec est = sysid_solve(w);
            const double tm = w.mean_regressor(0);
            const double want1 = 10 * std::sin(tm) / tm, want2 = -std::cos(tm);
            CHECK(std::abs(est(0) - want1) <= 0.01 * std::abs(want1));
            CHECK(std::abs(est(1) - want2) <= 0.01 * std::abs(want2));
            ++checked;
        }
        x = xn;
    }
    CHECK(checked > 10);
}

TEST_CASE("scalar CBF filter") {
    CHECK(cbf_filter_scalar(3.0, 1.0, 1.0, 1.0) == 3.0);
    CHECK(cbf_filter_scalar(0.0, 0.0, 1.0, -5.0) == 5.0);
    CHECK(cbf_filter_scalar(0.0, 0.0, -1.0, -5.0) == -5.0);
    CHECK(cbf_filter_scalar(-7.0, 100.0, 1e-4, -1e6) == -7.0); // threshold is strict
    CHECK(cbf_filter_scalar(-7.0, 0.0, 2e-4, -1.0) == doctest::Approx(5000.0));

    // bit-for-bit identity when the constraint is inactive, and the constraint holds otherwise
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 1000; ++i) {
        const double ur = u(rng), Lfh = u(rng), Lgh = u(rng), ah = u(rng);
        const double out = cbf_filter_scalar(ur, Lfh, Lgh, ah);
        if (std::abs(Lgh) <= 1e-4) continue;
        if (Lfh + Lgh * ur + ah >= 0) CHECK(out == ur);
        CHECK(Lfh + Lgh * out + ah >= -1e-9 * (1 + std::abs(Lfh) + std::abs(ah)));
    }
}

TEST_CASE("CLF-CBF step") {
    ClfCbfResult slack = clf_cbf_step(0.7, -10, 0.1, 1, 10, 0.1, 1, 0.25, 1);
    CHECK(slack.solved);
    CHECK(slack.u == doctest::Approx(0.7));
    CHECK(slack.delta == doctest::Approx(0.0));

    ClfCbfResult g = clf_cbf_step(0.7, 5, 1, 1, -5, 0, 1, 0.25, 1, true);
    CHECK_FALSE(g.solved);
    CHECK(g.u == 0.7);
    CHECK(g.delta == 0.0);

    CHECK_THROWS_AS(clf_cbf_step(0, 0, 0, 0, 0, 0, 0, 0.0, 1), Error);
    CHECK_THROWS_AS(clf_cbf_step(0, 0, 0, 0, -5, 0, -1, 0.25, 1), Error); // 0 >= 6 cannot hold
}

TEST_CASE("CLF-CBF step agrees with the grid oracle") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(-3, 3), pos(0.2, 2);
    int compared = 0;
    while (compared < 100) {
        const double ur = u(rng), LfV = u(rng), LgV = u(rng), gV = std::abs(u(rng));
        const double Lfh = u(rng), Lgh = u(rng), ah = u(rng), lam = pos(rng), H = pos(rng);
        if (std::abs(Lgh) < 0.2) continue;
        ClfCbfResult r = clf_cbf_step(ur, LfV, LgV, gV, Lfh, Lgh, ah, lam, H);
        Mat Hq(2, 2);
        Hq << H, 0, 0, lam;
        Vec c = v({-H * ur, 0});
        Mat A(2, 2);
        A << LgV, -1, -Lgh, 0;
        Vec b = v({-LfV - gV, Lfh + ah});
        Vec oracle = test::qp_grid(Hq, c, A, b, -40, 40);
        if (!std::isfinite(oracle(0)) || std::abs(r.u) > 30 || std::abs(r.delta) > 30) continue;
        ++compared;
        INFO("u ", r.u, " vs ", oracle(0), ", delta ", r.delta, " vs ", oracle(1));
        CHECK(std::abs(r.u - oracle(0)) <= 1e-3);
        CHECK(std::abs(r.delta - oracle(1)) <= 1e-3);
    }
}

TEST_CASE("Lyapunov reference law") {
    CHECK(lyapunov_ref_2d(0, 0) == 0.0);
    CHECK(lyapunov_ref_2d(1, pi) == doctest::Approx(-2 * pi));
    CHECK(lyapunov_ref_2d(3, 0) == -9.0);
    CHECK(lyapunov_ref_2d(2, 5e-5) == -4.0 - 1e-4);
    // continuity across the guard
    CHECK(lyapunov_ref_2d(2, 1.0001e-4) == doctest::Approx(lyapunov_ref_2d(2, 0.9999e-4)).epsilon(1e-6));
}

TEST_CASE("barrier and Lyapunov specs") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);

    BarrierSpec disk = point2d_barrier(1.0, 2.0, 1.5);
    CHECK(disk.alpha(2.0) == 20.0);
    for (int i = 0; i < 200; ++i) {
        const double ang = pi * u(rng), rad = 1.5 * (1 + std::abs(u(rng)));
        Vec outside = v({1 + rad * std::cos(ang), 2 + rad * std::sin(ang)});
        Vec edge = v({1 + 1.5 * std::cos(ang), 2 + 1.5 * std::sin(ang)});
        if (rad > 1.5) CHECK(disk.h(outside) > 0);
        CHECK(std::abs(disk.h(edge)) <= 1e-9);
        CHECK(disk.h(v({1 + 0.5 * u(rng), 2 + 0.5 * u(rng)})) < 0);
    }

    BarrierSpec sb = sip_barrier();
    const double tb = pi / 15, db = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double ang = pi * u(rng);
        // boundary of the ellipse 25 theta^2 + dtheta^2 = 25 tb^2 + db^2
        const double R = std::sqrt(25 * tb * tb + db * db);
        Vec edge = v({R * std::cos(ang) / 5, R * std::sin(ang), u(rng), u(rng)});
        CHECK(std::abs(sb.h(edge)) <= 1e-9);
        Vec inside = v({0.9 * edge(0), 0.9 * edge(1), 0, 0});
        CHECK(sb.h(inside) > 0);
        Vec out = v({1.1 * edge(0), 1.1 * edge(1), 0, 0});
        CHECK(sb.h(out) < 0);
    }

    ClfSpec clf = point2d_clf();
    CHECK(clf.V(v({0, 0})) == 0.0);

    // gradients against central differences
    auto fd_check = [&](const std::function<double(const Vec&)>& f, const std::function<Vec(const Vec&)>& gr, Vec x) {
        const double h = 1e-6;
        Vec g = gr(x);
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            Vec a = x, b = x;
            a(j) += h;
            b(j) -= h;
            CHECK(std::abs((f(a) - f(b)) / (2 * h) - g(j)) <= 1e-5);
        }
    };
    for (int i = 0; i < 20; ++i) {
        Vec p2 = v({3 * u(rng), 3 * u(rng)});
        CHECK(clf.V(p2) > 0);
        fd_check(disk.h, disk.grad_h, p2);
        fd_check(clf.V, clf.grad_V, p2);
        fd_check(sb.h, sb.grad_h, v({u(rng), 2 * u(rng), u(rng), u(rng)}));
    }
}
