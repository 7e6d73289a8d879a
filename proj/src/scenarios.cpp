#include "robctl/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

namespace robctl {

namespace {

constexpr double pi = std::numbers::pi;
const double nan = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> sip_names = {"theta", "dtheta", "x", "dx"};

} // namespace

const std::vector<ScenarioInfo>& scenario_registry() {
    static const std::vector<ScenarioInfo> reg = {
        {ScenarioId::dip_smc, "dip_smc", "DoubleInvertedPendulumSMC.m", TerminalEvent::timeout, 8.0,
         {"theta1", "dtheta1", "theta2", "dtheta2", "x", "dx"}, {0.2, 0, 0, 0, 20, 0}, {"slide_rate"}},
        {ScenarioId::motorcycle_smc, "motorcycle_smc", "MotorcycleControlSMC.m", TerminalEvent::destination, 10.0,
         {"x", "y", "phi", "beta", "roll", "droll"}, {0, -0.2, -0.1, 0, 0.3, 0}, {"preview"}},
        {ScenarioId::sip_nonrobust_failure, "sip_nonrobust_failure", "SingleInvertedPendulumFSFC.m (second run)",
         TerminalEvent::failure, 5.0, sip_names, {0.4 * pi, 0, 0.2, 0}, {}},
        {ScenarioId::sip_robust_riccati, "sip_robust_riccati", "SingleInvertedPendulumRobustFSFC.m",
         TerminalEvent::success, 20.0, sip_names, {0.4 * pi, 0, 0.2, 0}, {"slide_rate"}},
        {ScenarioId::sip_robust_riccati_midpoint, "sip_robust_riccati_midpoint", "SingleInvertedPendulumRobustFSFC2.m",
         TerminalEvent::success, 20.0, sip_names, {0.4 * pi, 0, 0.2, 0}, {"slide_rate"}},
        {ScenarioId::sip_interval_polynomial, "sip_interval_polynomial", "SingleInvertedPendulumRobustFSFC3.m",
         TerminalEvent::success, 20.0, sip_names, {0.4 * pi, 0, 0.2, 0}, {"slide_rate"}},
        {ScenarioId::sip_adaptive_online, "sip_adaptive_online", "SingleInvertedPendulumAL.m", TerminalEvent::timeout,
         3.0, sip_names, {0.4 * pi, 0, 0.2, 0}, {}},
        {ScenarioId::sip_adaptive_lookup, "sip_adaptive_lookup", "SingleInvertedPendulumAL2.m", TerminalEvent::success,
         10.0, sip_names, {0.4 * pi, 0, 0.2, 0}, {"slide_rate"}},
        {ScenarioId::sip_adaptive_sysid, "sip_adaptive_sysid", "SingleInvertedPendulumAdaptiveSI.m",
         TerminalEvent::timeout, 3.0, sip_names, {0.4 * pi, 0, 0.2, 0}, {}},
        {ScenarioId::sip_cbf, "sip_cbf", "SingleInvertedPendulumCBF.m", TerminalEvent::timeout, 10.0, sip_names,
         {0.2, 0, 20, 0}, {}},
        {ScenarioId::point2d_cbf_case1, "point2d_cbf_case1", "TwoDPointNonlinearMotionCBF.m (flgUnsafeSet = 1)",
         TerminalEvent::timeout, 10.0, {"x", "y"}, {4, 5}, {}},
        {ScenarioId::point2d_cbf_case2, "point2d_cbf_case2", "TwoDPointNonlinearMotionCBF.m (flgUnsafeSet = 0)",
         TerminalEvent::timeout, 10.0, {"x", "y"}, {4, 5}, {}},
        {ScenarioId::point2d_clf_cbf_case1, "point2d_clf_cbf_case1",
         "TwoDPointNonlinearMotionLyapunovCBF.m (flgUnsafeSet = 1)", TerminalEvent::timeout, 10.0, {"x", "y"}, {4, 5},
         {}},
        {ScenarioId::point2d_clf_cbf_case2, "point2d_clf_cbf_case2",
         "TwoDPointNonlinearMotionLyapunovCBF.m (flgUnsafeSet = 0)", TerminalEvent::timeout, 10.0, {"x", "y"}, {4, 5},
         {}},
    };
    return reg;
}

const ScenarioInfo& scenario_info(ScenarioId id) {
    for (const auto& s : scenario_registry())
        if (s.id == id) return s;
    throw Error(Errc::unknown_id, "unregistered scenario");
}

ScenarioId parse_scenario(const std::string& name) {
    for (const auto& s : scenario_registry())
        if (name == s.name) return s.id;
    throw Error(Errc::unknown_id, "'" + name + "'");
}

const char* scenario_name(ScenarioId id) { return scenario_info(id).name; }

namespace {

struct Setup {
    SimSpec spec;
    Vec x0;
    std::map<std::string, double> tun;
};

Setup make_setup(const ScenarioInfo& info, const Overrides& ov, std::map<std::string, double> tunable_defaults) {
    Setup s;
    s.spec.dt = 0.001;
    s.spec.t_end = info.t_end;
    s.x0 = Eigen::Map<const Vec>(info.initial_state.data(), static_cast<Eigen::Index>(info.initial_state.size()));
    s.tun = std::move(tunable_defaults);
    for (const auto& [key, value] : ov) {
        if (!std::isfinite(value)) throw Error(Errc::invalid_override, key + " must be finite");
        if (key == "dt") {
            s.spec.dt = value;
        } else if (key == "t_end") {
            s.spec.t_end = value;
        } else if (key == "decimation") {
            if (value < 1 || value != std::floor(value)) throw Error(Errc::invalid_override, "decimation must be a positive integer");
            s.spec.decimation = static_cast<int>(value);
        } else if (auto it = std::find(info.state_names.begin(), info.state_names.end(), key); it != info.state_names.end()) {
            s.x0(it - info.state_names.begin()) = value;
        } else if (s.tun.count(key)) {
            s.tun[key] = value;
        } else {
            throw Error(Errc::invalid_override, "'" + key + "' is not a tunable of " + info.name);
        }
    }
    if (!(s.spec.dt > 0.0) || !(s.spec.t_end >= s.spec.dt))
        throw Error(Errc::invalid_override, "need dt > 0 and t_end >= dt");
    return s;
}

struct SipFull {
    Mat A, B;
};

SipFull sip_full(double L = 1.0, double g = 10.0) {
    FactoredModel f = sip_factored_model(0.0, L, g, 0.0);
    return {f.A, f.B};
}

Vec partial(const Vec& s) {
    Vec p(3);
    p << s(0), s(1), s(3);
    return p;
}

Vec scalar(double v) { return Vec::Constant(1, v); }

bool sip_fallen(const Vec& s) { return std::abs(s(0)) >= pi / 2.0; }
bool sip_settled(const Vec& s) { return s(2) * s(2) + s(0) * s(0) + s(1) * s(1) + s(3) * s(3) < 0.001; }

// Partial-state law until theta^2 + dtheta^2 + dx^2 <= 1, then a full-state law chasing a cart
// target that slides to 0.
struct SwitchToSliding {
    Vec K_smc;
    double slide_rate;
    double dt;
    bool robust = true;
    Vec target = Vec::Zero(4);

    template <typename PartialLaw>
    double operator()(const Vec& s, PartialLaw&& law) {
        if (robust && s(0) * s(0) + s(1) * s(1) + s(3) * s(3) > 1.0) return law(s);
        if (robust) {
            robust = false;
            target = Vec::Zero(4);
            target(2) = s(2);
        }
        target(2) = shrink_toward_zero(target(2), slide_rate * dt);
        return fsfc(K_smc, s, target);
    }
};

std::vector<Complex> smc_poles() {
    return {Complex(-4, 0), Complex(-4, 2), Complex(-4, -2), Complex(-4, 0)};
}

ScenarioRun finish(const ScenarioInfo& info, Trajectory traj) {
    ScenarioRun run;
    run.report.scenario = info.name;
    run.report.terminal_event = traj.terminal_event;
    run.report.final_state = traj.final_state;
    run.report.elapsed_sim_time = traj.elapsed;
    run.report.checksum = trajectory_checksum(traj);
    run.state_names = info.state_names;
    run.traj = std::move(traj);
    return run;
}

ScenarioRun run_dip(const ScenarioInfo& info, const Overrides& ov) {
    Setup su = make_setup(info, ov, {{"slide_rate", 8.0}});
    PlantModel plant = dip_plant();
    auto [A, B] = linearize(plant, Vec::Zero(6), Vec::Zero(1));
    Vec K = design_gain_matrix(A, B, repeated_pole(-4.0, 6)).k;

    Vec target = Vec::Zero(6);
    target(4) = su.x0(4);
    const double delta = su.tun["slide_rate"] * su.spec.dt;
    Controller ctl = [&](double, const Vec& s) {
        target(4) = shrink_toward_zero(target(4), delta);
        return scalar(fsfc(K, s, target));
    };
    su.spec.stop_failure = [](const Vec& s) { return std::abs(s(0)) >= pi / 2.0 && std::abs(s(2)) >= pi / 2.0; };
    ScenarioRun run = finish(info, simulate(plant, ctl, su.spec, su.x0));
    run.report.gains.push_back({"K", K});
    return run;
}

ScenarioRun run_motorcycle(const ScenarioInfo& info, const Overrides& ov) {
    Setup su = make_setup(info, ov, {{"preview", 6.0}});
    const double v = 10.0, L = 1.5, H = 1.0, tau = 0.02, g = 10.0;
    PlantModel plant = motorcycle_plant(v, L, H, tau, g);
    auto [A, B] = linearize(motorcycle_lateral_plant(v, L, H, g), Vec::Zero(4), Vec::Zero(1));
    Vec K = design_gain_matrix(A, B, repeated_pole(-2.5, 4)).k;

    MotorcycleGuidance ref = default_motorcycle_guidance();
    Pose pose_I{su.x0(0), su.x0(1), ref.pose_I().phi};
    MotorcycleGuidance guide(pose_I, ref.pose_D(), su.tun["preview"]);
    const Pose D = guide.pose_D();

    Controller ctl = [&](double, const Vec& s) {
        return scalar(guide.step(Pose{s(0), s(1), s(2)}, s(4), s(5), K));
    };
    su.spec.stop_failure = [](const Vec& s) { return std::abs(s(4)) >= pi / 2.0; };
    su.spec.stop_destination = [D](const Vec& s) { return std::hypot(s(0) - D.x, s(1) - D.y) < 0.2; };
    ScenarioRun run = finish(info, simulate(plant, ctl, su.spec, su.x0));
    run.report.gains.push_back({"K", K});
    return run;
}

ScenarioRun run_sip_nonrobust(const ScenarioInfo& info, const Overrides& ov) {
    Setup su = make_setup(info, ov, {});
    FactoredModel p = sip_partial(sip_factored_model(0.0));
    Vec Kp = design_gain_matrix(p.A, p.B, repeated_pole(-4.0, 3)).k;
    Controller ctl = [&](double, const Vec& s) { return scalar(-Kp.dot(partial(s))); };
    su.spec.stop_failure = sip_fallen;
    ScenarioRun run = finish(info, simulate(sip_plant(), ctl, su.spec, su.x0));
    run.report.gains.push_back({"Kp", Kp});
    return run;
}

ScenarioRun run_sip_switching(const ScenarioInfo& info, const Overrides& ov, const Vec& Kp) {
    Setup su = make_setup(info, ov, {{"slide_rate", 8.0}});
    SipFull f = sip_full();
    Vec K_smc = design_gain_matrix(f.A, f.B, smc_poles()).k;
    SwitchToSliding sw{K_smc, su.tun["slide_rate"], su.spec.dt};
    Controller ctl = [&](double, const Vec& s) {
        return scalar(sw(s, [&](const Vec& st) { return -Kp.dot(partial(st)); }));
    };
    su.spec.stop_success = sip_settled;
    su.spec.stop_failure = sip_fallen;
    ScenarioRun run = finish(info, simulate(sip_plant(), ctl, su.spec, su.x0));
    run.report.gains.push_back({"Kp", Kp});
    run.report.gains.push_back({"K_smc", K_smc});
    return run;
}

Vec robust_gain_or_throw(bool midpoint) {
    SipRobustInstance inst = sip_robust_instance(midpoint);
    RobustResult r = robust_riccati_gain(inst.Ap, inst.Bp, inst.bounds, inst.cfg);
    if (!r.ok) throw Error(Errc::numerical, robust_tuning_hint());
    return r.gain.k;
}

ScenarioRun run_sip_adaptive_online(const ScenarioInfo& info, const Overrides& ov) {
    Setup su = make_setup(info, ov, {});
    const auto poles = repeated_pole(-4.0, 3);
    Controller ctl = [&](double, const Vec& s) {
        Vec Kp = adaptive_gain(s(0), AdaptiveMode::per_period, poles, SipParams{});
        return scalar(-Kp.dot(partial(s)));
    };
    su.spec.stop_failure = sip_fallen;
    return finish(info, simulate(sip_plant(), ctl, su.spec, su.x0));
}

ScenarioRun run_sip_adaptive_lookup(const ScenarioInfo& info, const Overrides& ov) {
    Setup su = make_setup(info, ov, {{"slide_rate", 8.0}});
    SipFull f = sip_full();
    Vec K0 = design_gain_matrix(f.A, f.B, repeated_pole(-4.0, 4)).k;
    SipParams sp;
    sp.theta_max = su.x0(0); // the listing designs K3 at the initial angle
    GainLookup lk = make_gain_lookup(repeated_pole(-4.0, 3), sp);

    SwitchToSliding sw{K0, su.tun["slide_rate"], su.spec.dt};
    Controller ctl = [&](double, const Vec& s) {
        return scalar(sw(s, [&](const Vec& st) { return -lk.select(st(0)).dot(partial(st)); }));
    };
    su.spec.stop_success = sip_settled;
    su.spec.stop_failure = sip_fallen;
    ScenarioRun run = finish(info, simulate(sip_plant(), ctl, su.spec, su.x0));
    run.report.gains = {{"K1", lk.K1}, {"K2", lk.K2}, {"K3", lk.K3}, {"K_smc", K0}};
    return run;
}

ScenarioRun run_sip_sysid(const ScenarioInfo& info, const Overrides& ov) {
    Setup su = make_setup(info, ov, {});
    const int kSI = 5;
    const double dt = su.spec.dt;
    const auto poles = repeated_pole(-4.0, 3);

    SysIdWindow win(kSI);
    long k = 0;
    double acc = 0.0;
    Vec old = su.x0;
    Vec theta_hat = Vec::Constant(2, nan);
    Vec Kp = Vec::Zero(3);
    long fallbacks = 0;
    std::vector<std::vector<double>> aux;

    Controller ctl = [&](double, const Vec& s) {
        const double response = (s(1) - old(1)) / dt;
        if (k <= kSI) {
            acc = 1.0;
            Vec reg(2);
            reg << s(0), acc;
            win.push(reg, response);
        } else {
            Vec reg(2);
            reg << s(0), acc;
            win.push(reg, response);
            try {
                theta_hat = sysid_solve(win);
                Mat A(3, 3), B(3, 1);
                A << 0, 1, 0, theta_hat(0), 0, 0, 0, 0, 0;
                B << 0, theta_hat(1), 1;
                Kp = design_gain_matrix(A, B, poles).k;
            } catch (const Error&) {
                ++fallbacks; // keep the previous estimate and gain
            }
            acc = -Kp.dot(partial(s));
        }
        aux.push_back({theta_hat(0), theta_hat(1), win.mean_regressor(0)});
        old = s;
        ++k;
        return scalar(acc);
    };
    su.spec.stop_failure = sip_fallen;
    ScenarioRun run = finish(info, simulate(sip_plant(), ctl, su.spec, su.x0));
    run.report.gains.push_back({"Kp_final", Kp});
    run.report.gains.push_back({"Theta_final", theta_hat});
    run.report.guard_activations = fallbacks;
    run.aux_names = {"theta1_hat", "theta2_hat", "theta_window_mean"};
    run.aux = std::move(aux);
    return run;
}

ScenarioRun run_sip_cbf(const ScenarioInfo& info, const Overrides& ov) {
    Setup su = make_setup(info, ov, {});
    const double L = 1.0, g = 10.0;
    SipFull f = sip_full(L, g);
    Vec K = design_gain_matrix(f.A, f.B, repeated_pole(-4.0, 4)).k;
    BarrierSpec bar = sip_barrier();
    long guards = 0;
    std::vector<std::vector<double>> aux;

    Controller ctl = [&](double, const Vec& s) {
        const double ref = -K.dot(s);
        Vec fx(4), gx(4);
        fx << s(1), g * std::sin(s(0)) / L, s(3), 0.0;
        gx << 0.0, -std::cos(s(0)) / L, 0.0, 1.0;
        const Vec gh = bar.grad_h(s);
        const double h = bar.h(s);
        const double Lgh = gh.dot(gx);
        if (std::abs(Lgh) <= 1e-4) ++guards;
        const double u = cbf_filter_scalar(ref, gh.dot(fx), Lgh, bar.alpha(h));
        aux.push_back({h});
        return scalar(u);
    };
    su.spec.stop_failure = sip_fallen;
    ScenarioRun run = finish(info, simulate(sip_plant(L, g), ctl, su.spec, su.x0));
    aux.push_back({bar.h(run.traj.final_state)});
    double mh = std::numeric_limits<double>::infinity();
    for (const auto& a : aux) mh = std::min(mh, a[0]);
    run.report.min_h = mh;
    run.report.guard_activations = guards;
    run.report.gains.push_back({"K", K});
    run.aux_names = {"h"};
    run.aux = std::move(aux);
    return run;
}

struct Disk {
    double cx, cy, r;
};

Disk disk_for(ScenarioId id) {
    if (id == ScenarioId::point2d_cbf_case1 || id == ScenarioId::point2d_clf_cbf_case1) return {2.0, 2.0, 1.0};
    return {0.0, 3.5, 3.0};
}

ScenarioRun run_point2d(const ScenarioInfo& info, const Overrides& ov, bool with_clf) {
    Setup su = make_setup(info, ov, {});
    const Disk d = disk_for(info.id);
    BarrierSpec bar = point2d_barrier(d.cx, d.cy, d.r, 10.0);
    ClfSpec clf = point2d_clf(1.0);
    long guards = 0;
    std::vector<std::vector<double>> aux;

    Controller ctl = [&](double, const Vec& s) {
        const double x = s(0), y = s(1);
        const double ref = lyapunov_ref_2d(x, y);
        Vec fx(2), gx(2);
        fx << x * std::sin(y), y;
        gx << 0.0, 1.0;
        const double h = bar.h(s);
        const Vec gh = bar.grad_h(s);
        const double Lfh = gh.dot(fx), Lgh = gh.dot(gx);
        double u, delta = 0.0;
        if (with_clf) {
            const Vec gv = clf.grad_V(s);
            const bool guard = std::abs(y) <= 1e-4;
            if (guard) ++guards;
            // The listing passes H = diag(1/2, 1/8) with c = [-ref; 0] to quadprog, whose minimizer is that of
            // 1/2 (u - 2 ref)^2 + 0.25/2 delta^2.
            ClfCbfResult r = clf_cbf_step(2.0 * ref, gv.dot(fx), gv.dot(gx), clf.gamma(clf.V(s)), Lfh, Lgh,
                                          bar.alpha(h), 0.25, 1.0, guard);
            u = r.u;
            delta = r.delta;
        } else {
            if (std::abs(Lgh) <= 1e-4) ++guards;
            u = cbf_filter_scalar(ref, Lfh, Lgh, bar.alpha(h));
        }
        aux.push_back({h, delta});
        return scalar(u);
    };
    ScenarioRun run = finish(info, simulate(point2d_plant(), ctl, su.spec, su.x0));
    aux.push_back({bar.h(run.traj.final_state), 0.0});
    double mh = std::numeric_limits<double>::infinity();
    for (const auto& a : aux) mh = std::min(mh, a[0]);
    run.report.min_h = mh;
    run.report.guard_activations = guards;
    run.aux_names = {"h", "delta"};
    run.aux = std::move(aux);
    return run;
}

} // namespace

ScenarioRun run_scenario(ScenarioId id, const Overrides& ov) {
    const ScenarioInfo& info = scenario_info(id);
    switch (id) {
    case ScenarioId::dip_smc: return run_dip(info, ov);
    case ScenarioId::motorcycle_smc: return run_motorcycle(info, ov);
    case ScenarioId::sip_nonrobust_failure: return run_sip_nonrobust(info, ov);
    case ScenarioId::sip_robust_riccati: return run_sip_switching(info, ov, robust_gain_or_throw(false));
    case ScenarioId::sip_robust_riccati_midpoint: return run_sip_switching(info, ov, robust_gain_or_throw(true));
    case ScenarioId::sip_interval_polynomial: return run_sip_switching(info, ov, sip_interval_gain());
    case ScenarioId::sip_adaptive_online: return run_sip_adaptive_online(info, ov);
    case ScenarioId::sip_adaptive_lookup: return run_sip_adaptive_lookup(info, ov);
    case ScenarioId::sip_adaptive_sysid: return run_sip_sysid(info, ov);
    case ScenarioId::sip_cbf: return run_sip_cbf(info, ov);
    case ScenarioId::point2d_cbf_case1:
    case ScenarioId::point2d_cbf_case2: return run_point2d(info, ov, false);
    case ScenarioId::point2d_clf_cbf_case1:
    case ScenarioId::point2d_clf_cbf_case2: return run_point2d(info, ov, true);
    }
    throw Error(Errc::unknown_id, "unhandled scenario");
}

bool outcome_as_expected(ScenarioId id, const RunReport& report) {
    if (report.terminal_event != scenario_info(id).expected) return false;
    if (id == ScenarioId::dip_smc) return report.final_state.norm() < 0.05;
    return true;
}

std::string trajectory_checksum(const Trajectory& traj) {
    // FNV-1a over the raw bits of every recorded number
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (size_t i = 0; i < traj.times.size(); ++i) {
        mix(traj.times[i]);
        for (Eigen::Index j = 0; j < traj.states[i].size(); ++j) mix(traj.states[i](j));
        for (Eigen::Index j = 0; j < traj.inputs[i].size(); ++j) mix(traj.inputs[i](j));
    }
    for (Eigen::Index j = 0; j < traj.final_state.size(); ++j) mix(traj.final_state(j));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace robctl
