#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robctl/models.hpp"
#include "robctl/numerics.hpp"
#include "robctl/stability.hpp"

namespace robctl {

struct GainMatrix {
    Vec k; // u = -k' x
    double ctrb_cond = 1.0;
    std::string warning;
};

GainMatrix design_gain_matrix(const Mat& A, const Mat& B, const std::vector<Complex>& desired_eigs);

enum class CareStatus { ok, not_positive_definite };

struct CareResult {
    CareStatus status = CareStatus::ok;
    Mat P;
    double residual = 0.0; // Frobenius norm of PA + A'P - PMP + Q
};

double care_residual(const Mat& A, const Mat& M, const Mat& Q, const Mat& P);

// PA + A'P - PMP + Q = 0 from the stable invariant subspace of [[A, -M], [-Q, -A']].
CareResult solve_care(const Mat& A, const Mat& M, const Mat& Q);

struct RobustConfig {
    double a_bar = 300.0;
    double b_bar = 300.0;
    double epsilon = 0.01;
    Mat Q;
    Mat R;
};

struct UncertaintyBounds {
    Mat dA_max;
    Mat dB_max;
};

struct RobustResult {
    bool ok = false;
    GainMatrix gain;
    Mat K; // n x m
    Mat P;
    Mat M;
    Mat Q_sigma;
    Mat Sigma_a, Sigma_x, Sigma_b, Sigma_y;
    double residual = 0.0;
};

RobustResult robust_riccati_gain(const Mat& A, const Mat& B, const UncertaintyBounds& bounds, const RobustConfig& cfg);

// Tuning hint printed when no positive definite solution exists.
const char* robust_tuning_hint();

IntervalPoly vertex_interval_char_poly(const std::vector<Mat>& A_family, const std::vector<Mat>& B_family, const Vec& k);

struct RegionCheck {
    bool feasible = false;
    double k2_bound = 0.0; // k3 / b_lo
    double k1_bound = 0.0; // a_hi k2 / (-b_lo k2 + k3)
};

// coef_decimals rounds the coefficient 1/b_lo to two places as in the reference bounds (-34.24).
RegionCheck sip_region_feasible(const Vec& K, double a_lo, double a_hi, double b_lo, double b_hi,
                                std::optional<int> coef_decimals = std::nullopt);

struct SweepRow {
    double theta = 0.0;
    std::vector<double> re; // ordered by descending eigenvalue modulus
};

std::vector<SweepRow> eig_sweep(const Vec& k, const std::vector<double>& theta_grid, double L = 1.0, double g = 10.0);

// Robust design instance for the single pendulum partial model.
struct SipRobustInstance {
    Mat A1, B1; // partial model at theta = 0
    Mat A2, B2; // partial model at theta_max
    Mat Ap, Bp;
    UncertaintyBounds bounds;
    RobustConfig cfg;
};

SipRobustInstance sip_robust_instance(bool midpoint = false, double theta_max = 0.4 * 3.14159265358979323846,
                                      double L = 1.0, double g = 10.0);

// Gain chosen by the integer rounding rule inside the region for k3 = -10.
Vec sip_interval_gain(double theta_max = 0.4 * 3.14159265358979323846, double L = 1.0, double g = 10.0);

std::vector<Complex> repeated_pole(double p, int n);

} // namespace robctl
