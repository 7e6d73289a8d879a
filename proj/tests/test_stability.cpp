#include <doctest.h>

#include <cmath>
#include <random>

#include "robctl/stability.hpp"
#include "robctl/synthesis.hpp"

using namespace robctl;

namespace {

// Independent oracle: all roots strictly in the open left half plane.
bool hurwitz_by_roots(const Poly& p) {
    for (const Complex& r : poly_roots(p))
        if (!(r.real() < 0.0)) return false;
    return true;
}

double min_abs_root_re(const Poly& p) {
    double m = INFINITY;
    for (const Complex& r : poly_roots(p)) m = std::min(m, std::abs(r.real()));
    return m;
}

Vec full_gain(std::vector<Complex> poles) {
    FactoredModel f = sip_factored_model(0.0, 1.0, 10.0, 0.0);
    return design_gain_matrix(f.A, f.B, poles).k;
}

} // namespace

TEST_CASE("element-wise relations and interval matrices") {
    Mat a(2, 2), b(2, 2);
    a << 1, -2, 3, 0;
    b << 0, 1, 3, 5;
    CHECK(elem_min(a, b) == (Mat(2, 2) << 0, -2, 3, 0).finished());
    CHECK(elem_max(a, b) == (Mat(2, 2) << 1, 1, 3, 5).finished());
    CHECK(elem_abs(a) == (Mat(2, 2) << 1, 2, 3, 0).finished());
    CHECK_FALSE(elem_leq(a, b));
    CHECK(elem_leq(elem_min(a, b), b));
    CHECK_FALSE(elem_lt(elem_min(a, b), b)); // equal entries
    CHECK(elem_geq(b, elem_min(a, b)));
    CHECK(elem_gt(b + Mat::Ones(2, 2), b));
    CHECK_THROWS_AS(elem_min(a, Mat::Zero(3, 3)), Error);

    IntervalMatrix im(elem_min(a, b), elem_max(a, b));
    CHECK(im.contains(a));
    CHECK(im.contains(b));
    CHECK(im.contains(im.midpoint()));
    CHECK_FALSE(im.contains(a + 10 * Mat::Ones(2, 2)));
    CHECK(im.radius().minCoeff() >= 0);
    CHECK_THROWS_AS(IntervalMatrix(b, a), Error);
}

TEST_CASE("interval polynomial validation") {
    CHECK_THROWS_AS(IntervalPoly({1, 2}, {0, 3}), Error);
    CHECK_THROWS_AS(IntervalPoly({1, -1}, {2, 1}), Error); // leading interval contains 0
    CHECK_THROWS_AS(IntervalPoly({1, 1}, {2, 1, 1}), Error);
}

TEST_CASE("Routh test examples") {
    CHECK(routh_stable({1, 2, 1}).stable);
    RouthResult r = routh_stable({100, 100, 40, 1});
    CHECK(r.stable);
    CHECK(hurwitz_by_roots({100, 100, 40, 1}));
    CHECK_FALSE(routh_stable({-1, 0, 1}).stable);
    // negative leading coefficient is normalized first
    CHECK(routh_stable({-1, -2, -1}).stable);
    RouthResult d = routh_stable({1, 0, 1});
    CHECK_FALSE(d.stable);
    CHECK(d.degenerate);
    for (double v : r.first_column) CHECK(v > 0);
}

TEST_CASE("Routh agrees with root locations") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1, 3);
    int compared = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + trial % 6;
        Poly p(n + 1);
        for (auto& c : p) c = u(rng);
        p[n] = std::abs(p[n]) + 0.1;
        RouthResult r = routh_stable(p);
        if (r.degenerate || min_abs_root_re(p) < 1e-9) continue;
        ++compared;
        CHECK(r.stable == hurwitz_by_roots(p));
        if (r.stable) {
            for (double v : r.first_column) CHECK(v > 0);
        }
    }
    CHECK(compared >= 450);
}

TEST_CASE("Kharitonov polynomials follow the standard pattern") {
    IntervalPoly ip({1, 3, 5, 7}, {2, 4, 6, 8});
    auto K = kharitonov_polys(ip);
    CHECK(K[0] == Poly{1, 3, 6, 8});
    CHECK(K[1] == Poly{1, 4, 6, 7});
    CHECK(K[2] == Poly{2, 3, 5, 8});
    CHECK(K[3] == Poly{2, 4, 5, 7});

    IntervalPoly deg({1, 3, 3, 1}, {1, 3, 3, 1});
    for (const auto& k : kharitonov_polys(deg)) CHECK(k == Poly{1, 3, 3, 1});
    CHECK(interval_poly_stable(deg));

    IntervalPoly one({1, 2}, {3, 4});
    auto K1 = kharitonov_polys(one);
    CHECK(K1[0] == Poly{1, 2});
    CHECK(K1[2] == Poly{3, 2});

    CHECK_FALSE(interval_poly_stable(IntervalPoly({-1, 1, 1}, {1, 2, 1})));
}

TEST_CASE("Kharitonov test agrees with exhaustive vertex testing") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.1, 10.0), t(0, 1);
    int disagreements = 0, stable_count = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 6;
        Poly lo(n + 1), hi(n + 1);
        for (int i = 0; i <= n; ++i) {
            double a = u(rng), b = u(rng);
            // narrow some intervals so that stable families show up at higher degree
            if (trial % 2) b = a * (1.0 + 0.2 * t(rng));
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
        }
        const bool kh = interval_poly_stable(IntervalPoly(lo, hi));
        bool brute = true;
        for (int mask = 0; mask < (1 << (n + 1)) && brute; ++mask) {
            Poly v(n + 1);
            for (int i = 0; i <= n; ++i) v[i] = (mask >> i) & 1 ? hi[i] : lo[i];
            brute = routh_stable(v).stable;
        }
        for (int s = 0; s < 50 && brute; ++s) {
            Poly v(n + 1);
            for (int i = 0; i <= n; ++i) v[i] = lo[i] + t(rng) * (hi[i] - lo[i]);
            brute = routh_stable(v).stable;
        }
        if (kh != brute) ++disagreements;
        if (kh) ++stable_count;
    }
    CHECK(disagreements == 0);
    CHECK(stable_count > 20);
}

TEST_CASE("Bauer-Fike examples") {
    Mat Ac = Mat::Zero(2, 2);
    Ac(0, 0) = -1;
    Ac(1, 1) = -2;
    BauerFike z = bauer_fike_check(Ac, Mat::Zero(2, 2));
    CHECK(z.radius == 0.0);
    CHECK(z.holds);

    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 0.1;
    BauerFike b = bauer_fike_check(Ac, d);
    CHECK(b.radius >= 0.1 - 1e-12);
    CHECK(b.cond_S == doctest::Approx(1.0));
    CHECK(b.holds);

    // SIP closed loop with a placed gain (distinct poles keep it diagonalizable) at theta = 0.3
    Vec K = full_gain({Complex(-2, 0), Complex(-3, 0), Complex(-4, 0), Complex(-5, 0)});
    FactoredModel f = sip_factored_model(0.0, 1.0, 10.0, 0.0);
    Mat Ac0 = f.A - f.B * K.transpose();
    BauerFike s = bauer_fike_check(Ac0, sip_delta_Ac(K, 0.3));
    CHECK(s.holds);
    CHECK_FALSE(s.ill_conditioned);
}

TEST_CASE("perturbation matrix is exact and bounded") {
    // Ac(theta) - Ac(0) computed from the factored model equals the closed form
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> th(-1.2566, 1.2566), kk(-200, 0);
    FactoredModel f0 = sip_factored_model(0.0, 1.0, 10.0, 0.0);
    for (int i = 0; i < 100; ++i) {
        Vec K(4);
        for (int j = 0; j < 4; ++j) K(j) = kk(rng);
        const double theta = th(rng);
        FactoredModel ft = sip_factored_model(theta, 1.0, 10.0, 0.0);
        Mat direct = (ft.A - ft.B * K.transpose()) - (f0.A - f0.B * K.transpose());
        Mat dAc = sip_delta_Ac(K, theta);
        CHECK((direct - dAc).cwiseAbs().maxCoeff() <= 1e-9 * (1 + K.cwiseAbs().maxCoeff()));
        CHECK(induced_norm(dAc) <= sip_delta_Ac_bound(K, theta) * (1 + 1e-12) + 1e-15);
    }
}

TEST_CASE("Bauer-Fike containment on sampled perturbations") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + i % 4;
        Mat A(n, n), D(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                A(r, c) = 3 * u(rng);
                D(r, c) = 0.2 * u(rng);
            }
        BauerFike bf = bauer_fike_check(A, D);
        if (bf.ill_conditioned) continue;
        ++checked;
        CHECK(bf.holds);
    }
    CHECK(checked > 150);

    // SIP perturbations over the operating range
    Vec K = full_gain({Complex(-2, 0), Complex(-3, 0), Complex(-4, 0), Complex(-5, 0)});
    FactoredModel f = sip_factored_model(0.0, 1.0, 10.0, 0.0);
    Mat Ac0 = f.A - f.B * K.transpose();
    for (int d = -72; d <= 72; d += 4) CHECK(bauer_fike_check(Ac0, sip_delta_Ac(K, d * 3.14159265358979323846 / 180)).holds);
}

TEST_CASE("safe angle radius") {
    Vec K = full_gain({Complex(-2, 0), Complex(-3, 0), Complex(-4, 0), Complex(-5, 0)});
    FactoredModel f = sip_factored_model(0.0, 1.0, 10.0, 0.0);
    Mat Ac0 = f.A - f.B * K.transpose();
    // oracle: slowest pole is -2 and the eigenvector condition number comes from a direct solve
    Eigen::EigenSolver<Mat> es(Ac0);
    const Eigen::VectorXd sv = es.eigenvectors().jacobiSvd().singularValues();
    const double kappa = sv(0) / sv(3);
    const double want = std::sqrt(2.0 / (kappa * (10.0 / 6.0 + 0.5 * K.norm())));
    CHECK(sip_theta_safe_radius(K) == doctest::Approx(want).epsilon(1e-9));

    // the radius shrinks without bound as the gain grows
    Vec K2 = full_gain({Complex(-20, 0), Complex(-30, 0), Complex(-40, 0), Complex(-50, 0)});
    CHECK(sip_theta_safe_radius(K2) < sip_theta_safe_radius(K));

    Vec unstable = Vec::Zero(4);
    CHECK_THROWS_AS(sip_theta_safe_radius(unstable), Error);
}
