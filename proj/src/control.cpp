#include "robctl/control.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace robctl {

PidController::PidController(double p, double i, double d, double dt_) : P(p), I(i), D(d), dt(dt_) {
    if (!(dt > 0.0)) throw Error(Errc::domain, "PID dt must be positive");
}

double PidController::step(double e) {
    if (!started) {
        prev_error = e;
        started = true;
    }
    integral_accum += e * dt;
    const double out = P * e + I * integral_accum + D * (e - prev_error) / dt;
    prev_error = e;
    return out;
}

double fsfc(const Vec& k, const Vec& x, const Vec& x_E) {
    if (k.size() != x.size() || x.size() != x_E.size()) throw Error(Errc::dimension, "fsfc size mismatch");
    return -k.dot(x - x_E);
}

Vec dip_sliding_target(const SlidingTargetDIP& tgt, double t) {
    if (!(tgt.s_v > 0.0)) throw Error(Errc::domain, "slide rate must be positive");
    Vec e = Vec::Zero(6);
    const double t_zero = std::abs(tgt.x0) / tgt.s_v;
    const double mag = t >= t_zero ? 0.0 : std::abs(tgt.x0) - tgt.s_v * std::max(t, 0.0);
    e(4) = tgt.x0 >= 0.0 ? mag : -mag;
    return e;
}

double shrink_toward_zero(double value, double delta) {
    if (value > 0.0) return std::max(value - delta, 0.0);
    return std::min(value + delta, 0.0);
}

MotorcycleGuidance::MotorcycleGuidance(Pose pose_I, Pose pose_D, double preview) : I_(pose_I), D_(pose_D), preview_(preview) {
    if (!(preview > 0.0)) throw Error(Errc::domain, "preview distance must be positive");
    Eigen::Matrix2d T;
    T << std::cos(I_.phi), -std::cos(D_.phi), std::sin(I_.phi), -std::sin(D_.phi);
    if (std::abs(T.determinant()) < 1e-12) throw Error(Errc::singular, "guidance lines are parallel");
    Eigen::Vector2d t = T.inverse() * Eigen::Vector2d(D_.x - I_.x, D_.y - I_.y);
    xM_ = I_.x + std::cos(I_.phi) * t(0);
    yM_ = I_.y + std::sin(I_.phi) * t(0);
}

std::pair<double, double> MotorcycleGuidance::line_frame(const Pose& pose) const {
    const Pose& S = active_ == 1 ? I_ : D_;
    const double ybar = -std::sin(S.phi) * (pose.x - S.x) + std::cos(S.phi) * (pose.y - S.y);
    return {ybar, pose.phi - S.phi};
}

double MotorcycleGuidance::step(const Pose& pose, double roll, double droll, const Vec& K) {
    if (K.size() != 4) throw Error(Errc::dimension, "motorcycle gain must have 4 entries");
    if (active_ == 1 && std::hypot(pose.x - xM_, pose.y - yM_) < preview_) active_ = 2;
    auto [ybar, phibar] = line_frame(pose);
    Vec s(4);
    s << ybar, phibar, roll, droll;
    return -K.dot(s);
}

MotorcycleGuidance default_motorcycle_guidance(double preview) {
    const double phiI = std::numbers::pi / 8.0, phiD = std::numbers::pi / 4.0;
    Pose I{0.0, -0.2, phiI};
    Pose D{20.0 * std::cos(phiI) + 20.0 * std::cos(phiD), 20.0 * std::sin(phiI) + 20.0 * std::sin(phiD), phiD};
    return MotorcycleGuidance(I, D, preview);
}

namespace {

Vec partial_gain_at(double theta, const std::vector<Complex>& eigs, const SipParams& p, double guard) {
    FactoredModel m = sip_partial(sip_factored_model(theta, p.L, p.g, guard));
    return design_gain_matrix(m.A, m.B, eigs).k;
}

} // namespace

const Vec& GainLookup::select(double theta) const {
    const double a = std::abs(theta);
    if (a < std::numbers::pi / 6.0) return K1;
    if (a < std::numbers::pi / 3.0) return K2;
    return K3;
}

GainLookup make_gain_lookup(const std::vector<Complex>& eigs, const SipParams& p) {
    GainLookup lk;
    lk.K1 = partial_gain_at(0.0, eigs, p, 0.0);
    lk.K2 = partial_gain_at(std::numbers::pi / 4.0, eigs, p, 0.0);
    lk.K3 = partial_gain_at(p.theta_max, eigs, p, 0.0);
    return lk;
}

Vec adaptive_gain(double theta, AdaptiveMode mode, const std::vector<Complex>& eigs, const SipParams& p) {
    if (mode == AdaptiveMode::per_period) return partial_gain_at(theta, eigs, p, 0.1);
    return make_gain_lookup(eigs, p).select(theta);
}

void SysIdWindow::push(const Vec& regressor, double response) {
    if (!rows_.empty() && regressor.size() != rows_.front().first.size())
        throw Error(Errc::dimension, "regressor length changed");
    rows_.emplace_front(regressor, response);
    if (static_cast<int>(rows_.size()) > capacity_) rows_.pop_back();
}

Mat SysIdWindow::design() const {
    if (rows_.empty()) return Mat();
    Mat X(rows_.size(), rows_.front().first.size());
    for (size_t i = 0; i < rows_.size(); ++i) X.row(i) = rows_[i].first.transpose();
    return X;
}

Vec SysIdWindow::target() const {
    Vec y(rows_.size());
    for (size_t i = 0; i < rows_.size(); ++i) y(i) = rows_[i].second;
    return y;
}

double SysIdWindow::mean_regressor(int col) const {
    double s = 0.0;
    for (const auto& r : rows_) s += r.first(col);
    return rows_.empty() ? 0.0 : s / static_cast<double>(rows_.size());
}

Vec sysid_solve(const SysIdWindow& w) {
    if (!w.warm()) throw Error(Errc::domain, "identification window is not full");
    try {
        return least_squares(w.design(), w.target());
    } catch (const Error& e) {
        if (e.code() == Errc::rank) throw Error(Errc::rank, "parameters not identifiable from the current window");
        throw;
    }
}

double cbf_filter_scalar(double u_ref, double Lfh, double Lgh, double alpha_h) {
    if (Lgh > 1e-4) return std::max(u_ref, -(Lfh + alpha_h) / Lgh);
    if (Lgh < -1e-4) return std::min(u_ref, -(Lfh + alpha_h) / Lgh);
    return u_ref;
}

ClfCbfResult clf_cbf_step(double u_ref, double LfV, double LgV, double gamma_V, double Lfh, double Lgh,
                          double alpha_h, double lambda, double H, bool guard) {
    if (!(lambda > 0.0) || !(H > 0.0)) throw Error(Errc::domain, "CLF-CBF weights must be positive");
    ClfCbfResult r;
    if (guard) {
        r.u = u_ref;
        return r;
    }
    Mat Hq(2, 2);
    Hq << H, 0.0, 0.0, lambda;
    Vec c(2);
    c << -H * u_ref, 0.0;
    Mat A(2, 2);
    A << LgV, -1.0, -Lgh, 0.0;
    Vec b(2);
    b << -LfV - gamma_V, Lfh + alpha_h;
    auto z = qp_small(Hq, c, A, b);
    if (!z) {
        std::ostringstream os;
        os << "CLF-CBF program has no feasible point (Lgh=" << Lgh << ", Lfh+alpha=" << Lfh + alpha_h << ")";
        throw Error(Errc::infeasible, os.str());
    }
    r.u = (*z)(0);
    r.delta = (*z)(1);
    r.solved = true;
    return r;
}

double lyapunov_ref_2d(double x, double y) {
    if (std::abs(y) > 1e-4) return -x * x * std::sin(y) / y - 2.0 * y;
    return -x * x - 2.0 * y;
}

BarrierSpec point2d_barrier(double cx, double cy, double r, double alpha_gain) {
    BarrierSpec b;
    b.h = [=](const Vec& s) { return ((s(0) - cx) * (s(0) - cx) + (s(1) - cy) * (s(1) - cy) - r * r) / 2.0; };
    b.grad_h = [=](const Vec& s) {
        Vec gr(2);
        gr << s(0) - cx, s(1) - cy;
        return gr;
    };
    b.alpha_gain = alpha_gain;
    return b;
}

BarrierSpec sip_barrier(double theta_b, double dtheta_b, double alpha_gain) {
    // angle weight 25 as in the reference listing
    BarrierSpec b;
    b.h = [=](const Vec& s) {
        return (25.0 * (theta_b * theta_b - s(0) * s(0)) + (dtheta_b * dtheta_b - s(1) * s(1))) / 2.0;
    };
    b.grad_h = [](const Vec& s) {
        Vec gr = Vec::Zero(4);
        gr(0) = -25.0 * s(0);
        gr(1) = -s(1);
        return gr;
    };
    b.alpha_gain = alpha_gain;
    return b;
}

ClfSpec point2d_clf(double gamma_gain) {
    ClfSpec c;
    c.V = [](const Vec& s) { return (s(0) * s(0) + s(1) * s(1)) / 2.0; };
    c.grad_V = [](const Vec& s) { return Vec(s.head(2)); };
    c.gamma_gain = gamma_gain;
    return c;
}

} // namespace robctl
