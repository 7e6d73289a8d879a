#include "robctl/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robctl {

namespace {

void require_same_shape(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(Errc::dimension, "element-wise operation on matrices of different shape");
}

} // namespace

IntervalMatrix::IntervalMatrix(Mat lo, Mat hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require_same_shape(lower, upper);
    if (!elem_leq(lower, upper)) throw Error(Errc::domain, "interval matrix lower bound exceeds upper bound");
}

bool IntervalMatrix::contains(const Mat& m) const {
    return elem_leq(lower, m) && elem_leq(m, upper);
}

Mat elem_min(const Mat& a, const Mat& b) {
    require_same_shape(a, b);
    return a.cwiseMin(b);
}

Mat elem_max(const Mat& a, const Mat& b) {
    require_same_shape(a, b);
    return a.cwiseMax(b);
}

Mat elem_abs(const Mat& a) { return a.cwiseAbs(); }

bool elem_leq(const Mat& a, const Mat& b) {
    require_same_shape(a, b);
    return (a.array() <= b.array()).all();
}

bool elem_lt(const Mat& a, const Mat& b) {
    require_same_shape(a, b);
    return (a.array() < b.array()).all();
}

bool elem_geq(const Mat& a, const Mat& b) { return elem_leq(b, a); }
bool elem_gt(const Mat& a, const Mat& b) { return elem_lt(b, a); }

IntervalPoly::IntervalPoly(Poly lo, Poly hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty())
        throw Error(Errc::dimension, "interval polynomial bounds must have equal, non-zero length");
    for (size_t i = 0; i < lower.size(); ++i)
        if (lower[i] > upper[i]) throw Error(Errc::domain, "interval polynomial lower bound exceeds upper bound");
    if (lower.back() <= 0.0 && upper.back() >= 0.0)
        throw Error(Errc::domain, "leading coefficient interval contains zero");
}

RouthResult routh_stable(const Poly& p0) {
    Poly p = poly_trim(p0);
    if (p.size() == 1 && p[0] == 0.0) throw Error(Errc::domain, "Routh test of the zero polynomial");
    if (p.size() < 2) throw Error(Errc::domain, "Routh test needs degree >= 1");
    const size_t n = p.size() - 1;

    std::vector<double> d(p.rbegin(), p.rend()); // descending
    if (d[0] < 0.0)
        for (double& v : d) v = -v;

    const size_t width = n / 2 + 1;
    std::vector<double> prev(width, 0.0), cur(width, 0.0);
    for (size_t j = 0; 2 * j <= n; ++j) prev[j] = d[2 * j];
    for (size_t j = 0; 2 * j + 1 <= n; ++j) cur[j] = d[2 * j + 1];

    RouthResult res;
    res.first_column.push_back(prev[0]);
    for (size_t row = 1; row <= n; ++row) {
        res.first_column.push_back(cur[0]);
        if (std::abs(cur[0]) < 1e-12) {
            res.degenerate = true;
            res.stable = false;
            return res;
        }
        if (row == n) break;
        std::vector<double> next(width, 0.0);
        for (size_t j = 0; j + 1 < width; ++j)
            next[j] = (cur[0] * prev[j + 1] - prev[0] * cur[j + 1]) / cur[0];
        prev = cur;
        cur = next;
    }
    res.stable = std::all_of(res.first_column.begin(), res.first_column.end(), [](double v) { return v > 0.0; });
    return res;
}

std::array<Poly, 4> kharitonov_polys(const IntervalPoly& ip) {
    // true selects the upper bound; period-4 patterns
    static const bool pattern[4][4] = {
        {false, false, true, true},
        {false, true, true, false},
        {true, false, false, true},
        {true, true, false, false},
    };
    std::array<Poly, 4> out;
    for (int k = 0; k < 4; ++k) {
        out[k].resize(ip.lower.size());
        for (size_t i = 0; i < ip.lower.size(); ++i)
            out[k][i] = pattern[k][i % 4] ? ip.upper[i] : ip.lower[i];
    }
    return out;
}

bool interval_poly_stable(const IntervalPoly& ip) {
    for (const Poly& k : kharitonov_polys(ip))
        if (!routh_stable(k).stable) return false;
    return true;
}

BauerFike bauer_fike_check(const Mat& Ac0, const Mat& deltaAc) {
    if (Ac0.rows() != Ac0.cols()) throw Error(Errc::dimension, "Bauer-Fike needs a square matrix");
    if (deltaAc.rows() != Ac0.rows() || deltaAc.cols() != Ac0.cols())
        throw Error(Errc::dimension, "perturbation shape mismatch");
    Eigen::EigenSolver<Mat> es(Ac0, true);
    if (es.info() != Eigen::Success) throw Error(Errc::numerical, "eigendecomposition failed for " + format_mat(Ac0));
    Eigen::MatrixXcd S = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);

    BauerFike bf;
    bf.cond_S = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    bf.ill_conditioned = !(bf.cond_S < 1e8);
    bf.radius = bf.cond_S * induced_norm(deltaAc);
    if (deltaAc.isZero(0.0)) bf.radius = 0.0;

    const auto base = eigenvalues(Ac0);
    const auto pert = eigenvalues(Ac0 + deltaAc);
    bf.holds = true;
    const double slack = 1e-9 * (1.0 + bf.radius) + 1e-9 * (1.0 + Ac0.cwiseAbs().maxCoeff());
    for (const Complex& mu : pert) {
        double best = std::numeric_limits<double>::infinity();
        for (const Complex& lam : base) best = std::min(best, std::abs(mu - lam));
        if (best > bf.radius + slack) bf.holds = false;
    }
    return bf;
}

Mat sip_delta_Ac(const Vec& K, double theta, double L, double g) {
    if (K.size() != 4) throw Error(Errc::dimension, "SIP gain must have 4 entries");
    const double sinc = theta == 0.0 ? 1.0 : std::sin(theta) / theta;
    Mat d = Mat::Zero(4, 4);
    d(1, 0) += (sinc - 1.0) * g / L;
    d.row(1) += ((std::cos(theta) - 1.0) / L) * K.transpose();
    return d;
}

double sip_delta_Ac_bound(const Vec& K, double theta, double L, double g) {
    Mat e2e1 = Mat::Zero(4, 4);
    e2e1(1, 0) = 1.0;
    Mat e2K = Mat::Zero(4, 4);
    e2K.row(1) = K.transpose();
    return theta * theta * ((g / (6.0 * L)) * induced_norm(e2e1) + (1.0 / (2.0 * L)) * induced_norm(e2K));
}

double sip_theta_safe_radius(const Vec& K, double L, double g) {
    if (K.size() != 4) throw Error(Errc::dimension, "SIP gain must have 4 entries");
    Mat A = Mat::Zero(4, 4);
    A(0, 1) = 1.0;
    A(1, 0) = g / L;
    A(2, 3) = 1.0;
    Vec B = Vec::Zero(4);
    B(1) = -1.0 / L;
    B(3) = 1.0;
    Mat Ac0 = A - B * K.transpose();

    const auto eig = eigenvalues(Ac0);
    const double re1 = eig.front().real();
    if (!(re1 < 0.0)) throw Error(Errc::domain, "closed loop at theta = 0 is not stable");

    Eigen::EigenSolver<Mat> es(Ac0, true);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    const double kappa = sv(0) / sv(sv.size() - 1);

    Mat e2e1 = Mat::Zero(4, 4);
    e2e1(1, 0) = 1.0;
    Mat e2K = Mat::Zero(4, 4);
    e2K.row(1) = K.transpose();
    const double c = (g / (6.0 * L)) * induced_norm(e2e1) + (1.0 / (2.0 * L)) * induced_norm(e2K);
    return std::sqrt(std::abs(re1) / (kappa * c));
}

} // namespace robctl
