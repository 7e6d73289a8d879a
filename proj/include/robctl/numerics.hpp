#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace robctl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Complex = std::complex<double>;

// Ascending coefficients a0 .. an.
using Poly = std::vector<double>;

enum class Errc {
    dimension,
    numerical,
    rank,
    domain,
    singular,
    spectral,
    subspace,
    uncontrollable,
    infeasible,
    blowup,
    unknown_id,
    invalid_override,
    io,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Sorted by descending real part, then descending imaginary part.
std::vector<Complex> eigenvalues(const Mat& m);

Vec least_squares(const Mat& design, const Vec& target);

// [v1*I, v2*I, ..., vk*I] with I of size identity_dim.
Mat kron_row(const Vec& v, int identity_dim);

struct RankOne {
    Vec w;
    Vec h;
};

// m == w * h^T with ||h||_inf == 1. Zero input gives w = 0, h = e1.
RankOne nnmf_rank1(const Mat& m);

double induced_norm(const Mat& m);
double cond(const Mat& m);

// min 1/2 z'Hz + c'z  s.t.  A z <= b. Returns nullopt when infeasible.
// A may have zero rows (unconstrained).
std::optional<Vec> qp_small(const Mat& H, const Vec& c, const Mat& A, const Vec& b);

// Polynomial helpers.
Poly poly_from_roots(const std::vector<Complex>& roots);
std::vector<Complex> poly_roots(const Poly& p);
Poly char_poly(const Mat& m);
Mat companion(const Poly& p);
double poly_eval(const Poly& p, double s);
Poly poly_trim(Poly p);

std::string format_mat(const Mat& m);

} // namespace robctl
