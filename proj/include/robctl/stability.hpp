#pragma once

#include <array>
#include <vector>

#include "robctl/numerics.hpp"

namespace robctl {

struct IntervalMatrix {
    Mat lower;
    Mat upper;

    IntervalMatrix(Mat lo, Mat hi);
    bool contains(const Mat& m) const;
    Mat midpoint() const { return 0.5 * (lower + upper); }
    Mat radius() const { return 0.5 * (upper - lower); }
};

Mat elem_min(const Mat& a, const Mat& b);
Mat elem_max(const Mat& a, const Mat& b);
Mat elem_abs(const Mat& a);
bool elem_leq(const Mat& a, const Mat& b); // a ⪯ b
bool elem_lt(const Mat& a, const Mat& b);  // a ≺ b
bool elem_geq(const Mat& a, const Mat& b);
bool elem_gt(const Mat& a, const Mat& b);

struct IntervalPoly {
    Poly lower;
    Poly upper;

    IntervalPoly(Poly lo, Poly hi);
    int degree() const { return static_cast<int>(lower.size()) - 1; }
};

struct RouthResult {
    bool stable = false;
    std::vector<double> first_column;
    bool degenerate = false;
};

RouthResult routh_stable(const Poly& p);

std::array<Poly, 4> kharitonov_polys(const IntervalPoly& ip);
bool interval_poly_stable(const IntervalPoly& ip);

struct BauerFike {
    double radius = 0.0;
    bool holds = false;
    double cond_S = 1.0;
    bool ill_conditioned = false; // cond_S >= 1e8
};

BauerFike bauer_fike_check(const Mat& Ac0, const Mat& deltaAc);

// Closed-loop perturbation of the full SIP model at angle theta for gain K (4).
Mat sip_delta_Ac(const Vec& K, double theta, double L = 1.0, double g = 10.0);
double sip_delta_Ac_bound(const Vec& K, double theta, double L = 1.0, double g = 10.0);

double sip_theta_safe_radius(const Vec& K, double L = 1.0, double g = 10.0);

} // namespace robctl
