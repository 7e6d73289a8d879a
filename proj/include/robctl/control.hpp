#pragma once

#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "robctl/models.hpp"
#include "robctl/synthesis.hpp"

namespace robctl {

struct PidController {
    double P = 0.0, I = 0.0, D = 0.0;
    double dt = 0.01;
    double integral_accum = 0.0;
    double prev_error = 0.0;
    bool started = false;

    PidController(double p, double i, double d, double dt_);
    double step(double e);
};

inline double pid_step(PidController& ctl, double e) { return ctl.step(e); }

double fsfc(const Vec& k, const Vec& x, const Vec& x_E);

struct SlidingTargetDIP {
    double x0 = 20.0;
    double s_v = 8.0;
};

Vec dip_sliding_target(const SlidingTargetDIP& tgt, double t);

// One listing step of the sliding target: move toward 0 by delta without overshoot.
double shrink_toward_zero(double value, double delta);

struct Pose {
    double x = 0.0, y = 0.0, phi = 0.0;
};

class MotorcycleGuidance {
public:
    MotorcycleGuidance(Pose pose_I, Pose pose_D, double preview = 6.0);

    // Steering command; switches to line 2 once within the preview distance of the turning point.
    double step(const Pose& pose, double roll, double droll, const Vec& K);

    // [lateral offset, heading error] in the active line frame.
    std::pair<double, double> line_frame(const Pose& pose) const;

    int active_line() const { return active_; }
    double turning_x() const { return xM_; }
    double turning_y() const { return yM_; }
    const Pose& pose_I() const { return I_; }
    const Pose& pose_D() const { return D_; }
    double preview() const { return preview_; }

private:
    Pose I_, D_;
    double preview_;
    double xM_ = 0.0, yM_ = 0.0;
    int active_ = 1;
};

// Reference configuration: line 1 through (0, -0.2) at pi/8, destination 20 m along each heading.
MotorcycleGuidance default_motorcycle_guidance(double preview = 6.0);

enum class AdaptiveMode { per_period, lookup };

struct SipParams {
    double L = 1.0;
    double g = 10.0;
    double theta_max = 0.4 * 3.14159265358979323846;
};

struct GainLookup {
    Vec K1, K2, K3; // designed at 0, pi/4 and theta_max
    const Vec& select(double theta) const;
};

GainLookup make_gain_lookup(const std::vector<Complex>& eigs, const SipParams& p);

// Partial-state (theta, dtheta, dx) gain for the state-dependent SIP model.
Vec adaptive_gain(double theta, AdaptiveMode mode, const std::vector<Complex>& eigs, const SipParams& p);

class SysIdWindow {
public:
    explicit SysIdWindow(int k = 5) : capacity_(k + 1) {}

    // Newest row first, like the listing's shifted buffer.
    void push(const Vec& regressor, double response);
    bool warm() const { return static_cast<int>(rows_.size()) == capacity_; }
    int capacity() const { return capacity_; }
    Mat design() const;
    Vec target() const;
    double mean_regressor(int col) const;

private:
    int capacity_;
    std::deque<std::pair<Vec, double>> rows_;
};

Vec sysid_solve(const SysIdWindow& w);

double cbf_filter_scalar(double u_ref, double Lfh, double Lgh, double alpha_h);

struct ClfCbfResult {
    double u = 0.0;
    double delta = 0.0;
    bool solved = false; // false when the singularity guard returned the reference
};

ClfCbfResult clf_cbf_step(double u_ref, double LfV, double LgV, double gamma_V, double Lfh, double Lgh,
                          double alpha_h, double lambda, double H, bool guard = false);

double lyapunov_ref_2d(double x, double y);

struct BarrierSpec {
    std::function<double(const Vec&)> h;
    std::function<Vec(const Vec&)> grad_h;
    double alpha_gain = 1.0;
    double alpha(double hv) const { return alpha_gain * hv; }
};

struct ClfSpec {
    std::function<double(const Vec&)> V;
    std::function<Vec(const Vec&)> grad_V;
    double gamma_gain = 1.0;
    double gamma(double v) const { return gamma_gain * v; }
};

BarrierSpec point2d_barrier(double cx, double cy, double r, double alpha_gain = 10.0);
BarrierSpec sip_barrier(double theta_b = 3.14159265358979323846 / 15.0, double dtheta_b = 2.0, double alpha_gain = 1.0);
ClfSpec point2d_clf(double gamma_gain = 1.0);

} // namespace robctl
