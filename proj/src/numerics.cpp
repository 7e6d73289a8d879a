#include "robctl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace robctl {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::dimension: return "dimension error";
    case Errc::numerical: return "numerical error";
    case Errc::rank: return "rank error";
    case Errc::domain: return "domain error";
    case Errc::singular: return "singularity error";
    case Errc::spectral: return "spectral error";
    case Errc::subspace: return "subspace error";
    case Errc::uncontrollable: return "synthesis error";
    case Errc::infeasible: return "infeasible";
    case Errc::blowup: return "numerical blow-up";
    case Errc::unknown_id: return "unknown scenario";
    case Errc::invalid_override: return "invalid override";
    case Errc::io: return "I/O error";
    }
    return "error";
}

std::string format_mat(const Mat& m) {
    std::ostringstream os;
    os.precision(10);
    os << "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) os << "; ";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ", ";
            os << m(i, j);
        }
    }
    os << "]";
    return os.str();
}

std::vector<Complex> eigenvalues(const Mat& m) {
    if (m.rows() != m.cols())
        throw Error(Errc::dimension, "eigenvalues of non-square matrix");
    if (!m.allFinite())
        throw Error(Errc::numerical, "non-finite entries in " + format_mat(m));
    std::vector<Complex> out;
    if (m.rows() == 0) return out;

    Eigen::EigenSolver<Mat> es(m, false);
    if (es.info() != Eigen::Success)
        throw Error(Errc::numerical, "eigenvalue iteration did not converge for " + format_mat(m));
    const auto& ev = es.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

Vec least_squares(const Mat& design, const Vec& target) {
    if (design.rows() != target.size() || design.cols() == 0 || design.rows() < design.cols())
        throw Error(Errc::dimension, "least_squares expects an m x n design with m >= n matching the target");
    Eigen::JacobiSVD<Mat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    double smax = s(0);
    double smin = s(s.size() - 1);
    if (!(smax > 0.0) || smin < 1e-10 * smax)
        throw Error(Errc::rank, "rank-deficient design " + format_mat(design));
    return svd.solve(target);
}

Mat kron_row(const Vec& v, int identity_dim) {
    if (v.size() == 0 || identity_dim < 1)
        throw Error(Errc::dimension, "kron_row needs a non-empty vector and identity_dim >= 1");
    Mat out = Mat::Zero(identity_dim, v.size() * identity_dim);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.block(0, i * identity_dim, identity_dim, identity_dim) =
            v(i) * Mat::Identity(identity_dim, identity_dim);
    return out;
}

RankOne nnmf_rank1(const Mat& m) {
    if (m.size() == 0) throw Error(Errc::dimension, "nnmf_rank1 of empty matrix");
    if (!m.allFinite()) throw Error(Errc::domain, "non-finite entry in nnmf input");
    if ((m.array() < 0.0).any()) throw Error(Errc::domain, "negative entry in nnmf input " + format_mat(m));

    // first maximal entry in row-major order
    Eigen::Index bi = 0, bj = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) > best) {
                best = m(i, j);
                bi = i;
                bj = j;
            }

    RankOne f;
    if (best == 0.0) {
        f.w = Vec::Zero(m.rows());
        f.h = Vec::Zero(m.cols());
        f.h(0) = 1.0;
        return f;
    }
    f.w = m.col(bj);
    f.h = m.row(bi).transpose() / best;
    double err = (f.w * f.h.transpose() - m).cwiseAbs().maxCoeff();
    if (err > 1e-9 * std::max(1.0, best))
        throw Error(Errc::rank, "numerical rank > 1 in " + format_mat(m));
    return f;
}

double induced_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double cond(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw Error(Errc::dimension, "cond of non-square matrix");
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& s = svd.singularValues();
    double smax = s(0), smin = s(s.size() - 1);
    if (!(smax > 0.0) || smin < 1e-12 * smax) throw Error(Errc::singular, "cond of singular matrix " + format_mat(m));
    return smax / smin;
}

namespace {

// Index subsets ordered by size, then lexicographically.
std::vector<std::vector<int>> ordered_subsets(int m) {
    std::vector<std::vector<int>> out;
    for (int k = 0; k <= m; ++k) {
        std::vector<int> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            out.push_back(idx);
            int i = k - 1;
            while (i >= 0 && idx[i] == m - k + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

} // namespace

std::optional<Vec> qp_small(const Mat& H, const Vec& c, const Mat& A, const Vec& b) {
    const Eigen::Index n = H.rows();
    if (H.cols() != n || c.size() != n || n < 1 || n > 3)
        throw Error(Errc::dimension, "qp_small expects square H of size 1..3 and matching c");
    const Eigen::Index m = A.rows();
    if (m > 4 || b.size() != m || (m > 0 && A.cols() != n))
        throw Error(Errc::dimension, "qp_small expects at most 4 constraint rows matching b");
    if (!H.allFinite() || !c.allFinite() || !A.allFinite() || !b.allFinite())
        throw Error(Errc::numerical, "non-finite QP data");
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + H.cwiseAbs().maxCoeff()))
        throw Error(Errc::domain, "QP Hessian is not symmetric");
    Eigen::LLT<Mat> llt(H);
    if (llt.info() != Eigen::Success) throw Error(Errc::domain, "QP Hessian is not positive definite");

    const double scale = 1.0 + H.cwiseAbs().maxCoeff() + c.cwiseAbs().maxCoeff();
    for (const auto& set : ordered_subsets(static_cast<int>(m))) {
        const Eigen::Index s = static_cast<Eigen::Index>(set.size());
        Mat K = Mat::Zero(n + s, n + s);
        Vec rhs(n + s);
        K.topLeftCorner(n, n) = H;
        rhs.head(n) = -c;
        for (Eigen::Index r = 0; r < s; ++r) {
            K.block(n + r, 0, 1, n) = A.row(set[r]);
            K.block(0, n + r, n, 1) = A.row(set[r]).transpose();
            rhs(n + r) = b(set[r]);
        }
        Eigen::FullPivLU<Mat> lu(K);
        if (!lu.isInvertible()) continue;
        Vec sol = lu.solve(rhs);
        Vec z = sol.head(n);
        Vec lam = sol.tail(s);

        bool ok = (lam.array() >= -1e-9 * scale).all();
        for (Eigen::Index r = 0; ok && r < m; ++r) {
            double slack = A.row(r).dot(z) - b(r);
            double tol = 1e-9 * (1.0 + std::abs(b(r)) + A.row(r).cwiseAbs().sum() * z.cwiseAbs().maxCoeff());
            if (slack > tol) ok = false;
        }
        if (ok) return z;
    }
    return std::nullopt;
}

Poly poly_trim(Poly p) {
    while (p.size() > 1 && p.back() == 0.0) p.pop_back();
    return p;
}

Poly poly_from_roots(const std::vector<Complex>& roots) {
    std::vector<Complex> c{Complex(1.0, 0.0)};
    for (const Complex& r : roots) {
        std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
        for (size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    Poly out(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        if (std::abs(c[i].imag()) > 1e-8 * (1.0 + std::abs(c[i])))
            throw Error(Errc::domain, "requested roots are not closed under conjugation");
        out[i] = c[i].real();
    }
    return out;
}

Poly char_poly(const Mat& a) {
    if (a.rows() != a.cols()) throw Error(Errc::dimension, "char_poly of non-square matrix");
    const Eigen::Index n = a.rows();
    // Faddeev-LeVerrier
    Poly c(n + 1, 0.0);
    c[n] = 1.0;
    Mat Mk = Mat::Zero(n, n);
    const Mat I = Mat::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        Mk = a * Mk + c[n - k + 1] * I;
        c[n - k] = -(a * Mk).trace() / static_cast<double>(k);
    }
    return c;
}

Mat companion(const Poly& p0) {
    Poly p = poly_trim(p0);
    const size_t n = p.size() - 1;
    if (n == 0 || p.back() == 0.0) throw Error(Errc::domain, "companion of constant polynomial");
    Mat C = Mat::Zero(n, n);
    for (size_t i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (size_t i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p[n];
    return C;
}

std::vector<Complex> poly_roots(const Poly& p) {
    return eigenvalues(companion(p));
}

double poly_eval(const Poly& p, double s) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + *it;
    return acc;
}

} // namespace robctl
