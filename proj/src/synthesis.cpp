#include "robctl/synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace robctl {

std::vector<Complex> repeated_pole(double p, int n) {
    return std::vector<Complex>(static_cast<size_t>(n), Complex(p, 0.0));
}

GainMatrix design_gain_matrix(const Mat& A, const Mat& B, const std::vector<Complex>& desired_eigs) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || B.cols() != 1)
        throw Error(Errc::dimension, "pole placement expects square A and single-column B");
    if (static_cast<Eigen::Index>(desired_eigs.size()) != n)
        throw Error(Errc::dimension, "number of desired eigenvalues must equal the state dimension");

    Mat C(n, n);
    C.col(0) = B;
    for (Eigen::Index i = 1; i < n; ++i) C.col(i) = A * C.col(i - 1);

    Eigen::JacobiSVD<Mat> svd(C);
    const Vec& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(n - 1) < 1e-12 * s(0))
        throw Error(Errc::uncontrollable, "(A, B) is not controllable");

    GainMatrix g;
    g.ctrb_cond = s(0) / s(n - 1);
    if (g.ctrb_cond > 1e10) g.warning = "controllability matrix is ill-conditioned";

    // Ackermann: k' = e_n' C^-1 phi(A)
    Poly phi = poly_from_roots(desired_eigs);
    Mat phiA = Mat::Zero(n, n);
    for (auto it = phi.rbegin(); it != phi.rend(); ++it) phiA = phiA * A + (*it) * Mat::Identity(n, n);
    Vec en = Vec::Zero(n);
    en(n - 1) = 1.0;
    Vec row = C.transpose().fullPivLu().solve(en);
    g.k = (row.transpose() * phiA).transpose();
    return g;
}

double care_residual(const Mat& A, const Mat& M, const Mat& Q, const Mat& P) {
    return (P * A + A.transpose() * P - P * M * P + Q).norm();
}

CareResult solve_care(const Mat& A, const Mat& M, const Mat& Q) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || M.rows() != n || M.cols() != n || Q.rows() != n || Q.cols() != n)
        throw Error(Errc::dimension, "CARE matrices must be n x n");

    Mat Hm(2 * n, 2 * n);
    Hm << A, -M, -Q, -A.transpose();
    Eigen::EigenSolver<Mat> es(Hm, true);
    if (es.info() != Eigen::Success) throw Error(Errc::numerical, "Hamiltonian eigendecomposition failed");

    const double scale = 1.0 + Hm.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> stable;
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
        const double re = es.eigenvalues()(i).real();
        if (std::abs(re) <= 1e-9 * scale) throw Error(Errc::spectral, "Hamiltonian has eigenvalues on the imaginary axis");
        if (re < 0.0) stable.push_back(i);
    }
    if (static_cast<Eigen::Index>(stable.size()) != n)
        throw Error(Errc::spectral, "Hamiltonian stable subspace has wrong dimension");

    Eigen::MatrixXcd X(2 * n, n);
    for (Eigen::Index j = 0; j < n; ++j) X.col(j) = es.eigenvectors().col(stable[j]);
    Eigen::MatrixXcd X1 = X.topRows(n), X2 = X.bottomRows(n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(X1);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(n - 1) < 1e-12 * sv(0)) throw Error(Errc::subspace, "X1 is singular");

    Eigen::MatrixXcd Pc = X2 * X1.inverse();
    Mat P = Pc.real();
    P = 0.5 * (P + P.transpose());

    // Newton refinement on the residual
    for (int it = 0; it < 3; ++it) {
        Mat Res = P * A + A.transpose() * P - P * M * P + Q;
        if (Res.norm() <= 1e-14 * (1.0 + Q.norm() + P.norm())) break;
        Mat F = A - M * P;
        const Mat I = Mat::Identity(n, n);
        Mat K(n * n, n * n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) K.block(i * n, j * n, n, n) = F(j, i) * I;
        for (Eigen::Index i = 0; i < n; ++i) K.block(i * n, i * n, n, n) += F.transpose();
        Vec r = Eigen::Map<const Vec>(Res.data(), n * n);
        Vec d = K.fullPivLu().solve(-r);
        Mat D = Eigen::Map<const Mat>(d.data(), n, n);
        Mat Pn = P + 0.5 * (D + D.transpose());
        if (care_residual(A, M, Q, Pn) < Res.norm()) P = Pn;
        else break;
    }

    CareResult res;
    res.P = P;
    res.residual = care_residual(A, M, Q, P);
    Eigen::SelfAdjointEigenSolver<Mat> se(P);
    res.status = se.eigenvalues().minCoeff() > 0.0 ? CareStatus::ok : CareStatus::not_positive_definite;
    return res;
}

namespace {

struct Factor {
    Mat sigma_w; // bar * a a'
    Mat sigma_h; // bar * x x'
};

Factor factor_bound(const Mat& bound, double bar) {
    Factor f;
    f.sigma_w = Mat::Zero(bound.rows(), bound.rows());
    f.sigma_h = Mat::Zero(bound.cols(), bound.cols());
    // a zero bound contributes nothing, whatever the factor convention
    if (bar == 0.0 || bound.isZero(0.0)) return f;
    RankOne r = nnmf_rank1(bound);
    Vec a = r.w / bar;
    f.sigma_w = bar * a * a.transpose();
    f.sigma_h = bar * r.h * r.h.transpose();
    return f;
}

} // namespace

const char* robust_tuning_hint() {
    return "no positive definite Riccati solution: increase a_bar and b_bar, or decrease epsilon, and retry";
}

RobustResult robust_riccati_gain(const Mat& A, const Mat& B, const UncertaintyBounds& bounds, const RobustConfig& cfg) {
    const Eigen::Index n = A.rows(), m = B.cols();
    if (A.cols() != n || B.rows() != n) throw Error(Errc::dimension, "robust gain: A must be n x n and B n x m");
    if (bounds.dA_max.rows() != n || bounds.dA_max.cols() != n || bounds.dB_max.rows() != n || bounds.dB_max.cols() != m)
        throw Error(Errc::dimension, "robust gain: uncertainty bounds do not match A, B");
    if (cfg.Q.rows() != n || cfg.Q.cols() != n || cfg.R.rows() != m || cfg.R.cols() != m)
        throw Error(Errc::dimension, "robust gain: Q must be n x n and R m x m");
    if (!(cfg.epsilon > 0.0) || cfg.a_bar < 0.0 || cfg.b_bar < 0.0)
        throw Error(Errc::domain, "robust gain: epsilon must be positive and a_bar, b_bar non-negative");

    Factor fa = factor_bound(bounds.dA_max, cfg.a_bar);
    Factor fb = factor_bound(bounds.dB_max, cfg.b_bar);

    RobustResult res;
    res.Sigma_a = fa.sigma_w;
    res.Sigma_x = fa.sigma_h;
    res.Sigma_b = fb.sigma_w;
    res.Sigma_y = fb.sigma_h;

    const double ep = cfg.epsilon;
    Mat Rt_inv = (cfg.R + ep * res.Sigma_y).inverse();
    res.M = B * Rt_inv * (2.0 * cfg.R + ep * res.Sigma_y) * Rt_inv * B.transpose() - res.Sigma_a - (1.0 / ep) * res.Sigma_b;
    res.M = 0.5 * (res.M + res.M.transpose());
    res.Q_sigma = res.Sigma_x + cfg.Q;

    CareResult care;
    try {
        care = solve_care(A, res.M, res.Q_sigma);
    } catch (const Error& e) {
        if (e.code() == Errc::spectral || e.code() == Errc::subspace) return res;
        throw;
    }
    res.P = care.P;
    res.residual = care.residual;
    if (care.status != CareStatus::ok) return res;

    res.K = care.P * B * Rt_inv.transpose();
    res.gain.k = res.K.col(0);
    res.ok = true;
    return res;
}

IntervalPoly vertex_interval_char_poly(const std::vector<Mat>& A_family, const std::vector<Mat>& B_family, const Vec& k) {
    if (A_family.empty() || B_family.empty()) throw Error(Errc::dimension, "vertex families must be non-empty");
    Poly lo, hi;
    bool first = true;
    for (const Mat& A : A_family) {
        for (const Mat& B : B_family) {
            if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != 1 || k.size() != A.rows())
                throw Error(Errc::dimension, "inconsistent vertex dimensions");
            Poly cp = char_poly(A - B * k.transpose());
            if (first) {
                lo = hi = cp;
                first = false;
                continue;
            }
            for (size_t i = 0; i < cp.size(); ++i) {
                lo[i] = std::min(lo[i], cp[i]);
                hi[i] = std::max(hi[i], cp[i]);
            }
        }
    }
    return IntervalPoly(lo, hi);
}

RegionCheck sip_region_feasible(const Vec& K, double a_lo, double a_hi, double b_lo, double b_hi,
                                std::optional<int> coef_decimals) {
    if (K.size() != 3) throw Error(Errc::dimension, "SIP partial gain must have 3 entries");
    if (!(0.0 < b_lo && b_lo <= b_hi && 0.0 < a_lo && a_lo <= a_hi))
        throw Error(Errc::domain, "region check needs 0 < a_lo <= a_hi and 0 < b_lo <= b_hi");
    const double k1 = K(0), k2 = K(1), k3 = K(2);
    double coef = 1.0 / b_lo;
    if (coef_decimals) {
        const double s = std::pow(10.0, *coef_decimals);
        coef = std::round(coef * s) / s;
    }
    RegionCheck r;
    r.k2_bound = coef * k3;
    r.k1_bound = a_hi * k2 / (-b_lo * k2 + k3);
    r.feasible = k3 < 0.0 && k2 < r.k2_bound && k1 < r.k1_bound;
    return r;
}

std::vector<SweepRow> eig_sweep(const Vec& k, const std::vector<double>& theta_grid, double L, double g) {
    if (k.size() != 3) throw Error(Errc::dimension, "sweep expects a partial SIP gain with 3 entries");
    std::vector<SweepRow> rows;
    rows.reserve(theta_grid.size());
    for (double th : theta_grid) {
        FactoredModel p = sip_partial(sip_factored_model(th, L, g, 0.0));
        auto ev = eigenvalues(p.A - p.B * k.transpose());
        std::stable_sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
            if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
            return a.real() > b.real();
        });
        SweepRow row;
        row.theta = th;
        for (const Complex& e : ev) row.re.push_back(e.real());
        rows.push_back(std::move(row));
    }
    return rows;
}

SipRobustInstance sip_robust_instance(bool midpoint, double theta_max, double L, double g) {
    SipRobustInstance s;
    FactoredModel p1 = sip_partial(sip_factored_model(0.0, L, g, 0.0));
    FactoredModel p2 = sip_partial(sip_factored_model(theta_max, L, g, 0.0));
    s.A1 = p1.A;
    s.B1 = p1.B;
    s.A2 = p2.A;
    s.B2 = p2.B;
    if (midpoint) {
        s.Ap = 0.5 * (s.A1 + s.A2);
        s.Bp = 0.5 * (s.B1 + s.B2);
        s.cfg.a_bar = s.cfg.b_bar = 50.0;
    } else {
        s.Ap = s.A1;
        s.Bp = s.B1;
        s.cfg.a_bar = s.cfg.b_bar = 300.0;
    }
    s.bounds.dA_max = (s.A2 - s.Ap).cwiseAbs();
    s.bounds.dB_max = (s.B2 - s.Bp).cwiseAbs();
    s.cfg.epsilon = 0.01;
    s.cfg.Q = Mat::Identity(3, 3);
    s.cfg.R = Mat::Constant(1, 1, 0.01);
    return s;
}

Vec sip_interval_gain(double theta_max, double L, double g) {
    const double b_min = std::cos(theta_max) / L;
    const double a_max = g / L;
    const double k3 = -10.0;
    const double k2 = std::floor((k3 / b_min) / 10.0) * 10.0 - 10.0;
    const double k1 = std::floor((a_max * k2 / (-b_min * k2 + k3)) / 10.0) * 10.0 - 10.0;
    Vec k(3);
    k << k1, k2, k3;
    return k;
}

} // namespace robctl
