#include "robctl/models.hpp"

#include <cmath>
#include <sstream>

namespace robctl {

const char* event_name(TerminalEvent e) {
    switch (e) {
    case TerminalEvent::success: return "success";
    case TerminalEvent::failure: return "failure";
    case TerminalEvent::destination: return "destination";
    case TerminalEvent::timeout: return "timeout";
    }
    return "timeout";
}

TerminalEvent parse_event(const std::string& s) {
    if (s == "success") return TerminalEvent::success;
    if (s == "failure") return TerminalEvent::failure;
    if (s == "destination") return TerminalEvent::destination;
    if (s == "timeout") return TerminalEvent::timeout;
    throw Error(Errc::domain, "unknown terminal event '" + s + "'");
}

Vec step_euler(const PlantModel& plant, const Vec& x, const Vec& u, double dt, double t) {
    if (x.size() != plant.state_dim || u.size() != plant.input_dim)
        throw Error(Errc::dimension, plant.name + ": state/input size mismatch");
    if (!(dt > 0.0)) throw Error(Errc::domain, "dt must be positive");
    Vec d = plant.deriv(x, u);
    if (d.size() != plant.state_dim) throw Error(Errc::dimension, plant.name + ": derivative has wrong length");
    if (!d.allFinite()) {
        std::ostringstream os;
        os << plant.name << " at t=" << t << ", x=" << format_mat(x.transpose());
        throw Error(Errc::blowup, os.str());
    }
    return x + dt * d;
}

Trajectory simulate(const PlantModel& plant, const Controller& controller, const SimSpec& spec, const Vec& x0) {
    if (!(spec.dt > 0.0) || !(spec.t_end >= spec.dt))
        throw Error(Errc::domain, "SimSpec needs dt > 0 and t_end >= dt");
    if (spec.decimation < 1) throw Error(Errc::domain, "decimation must be >= 1");
    if (x0.size() != plant.state_dim) throw Error(Errc::dimension, plant.name + ": initial state has wrong length");

    Trajectory tr;
    const long n_steps = std::lround(spec.t_end / spec.dt);
    Vec x = x0;
    Vec u_last = Vec::Zero(plant.input_dim);

    auto record = [&](long k, const Vec& xs, const Vec& us) {
        tr.times.push_back(static_cast<double>(k) * spec.dt);
        tr.states.push_back(xs);
        tr.inputs.push_back(us);
    };

    long k = 0;
    while (k < n_steps) {
        const double t = static_cast<double>(k) * spec.dt;
        Vec u = controller(t, x);
        if (u.size() != plant.input_dim) throw Error(Errc::dimension, plant.name + ": controller output has wrong length");
        if (k % spec.decimation == 0) record(k, x, u);
        x = step_euler(plant, x, u, spec.dt, t);
        u_last = u;
        ++k;
        if (spec.stop_success && spec.stop_success(x)) {
            tr.terminal_event = TerminalEvent::success;
            break;
        }
        if (spec.stop_destination && spec.stop_destination(x)) {
            tr.terminal_event = TerminalEvent::destination;
            break;
        }
        if (spec.stop_failure && spec.stop_failure(x)) {
            tr.terminal_event = TerminalEvent::failure;
            break;
        }
    }
    if (k % spec.decimation == 0) record(k, x, u_last);
    tr.final_state = x;
    tr.steps = k;
    tr.elapsed = static_cast<double>(k) * spec.dt;
    return tr;
}

std::pair<Mat, Mat> linearize_fd(const PlantModel& plant, const Vec& x0, const Vec& u0, double h) {
    const int n = plant.state_dim, m = plant.input_dim;
    if (x0.size() != n || u0.size() != m) throw Error(Errc::dimension, plant.name + ": linearization point has wrong size");
    Mat A(n, n), B(n, m);
    for (int j = 0; j < n; ++j) {
        Vec xp = x0, xm = x0;
        xp(j) += h;
        xm(j) -= h;
        A.col(j) = (plant.deriv(xp, u0) - plant.deriv(xm, u0)) / (2.0 * h);
    }
    for (int j = 0; j < m; ++j) {
        Vec up = u0, um = u0;
        up(j) += h;
        um(j) -= h;
        B.col(j) = (plant.deriv(x0, up) - plant.deriv(x0, um)) / (2.0 * h);
    }
    if (!A.allFinite() || !B.allFinite()) throw Error(Errc::blowup, plant.name + ": non-finite linearization");
    return {A, B};
}

std::pair<Mat, Mat> linearize(const PlantModel& plant, const Vec& x0, const Vec& u0) {
    if (plant.analytic_linearization) {
        if (x0.size() != plant.state_dim || u0.size() != plant.input_dim)
            throw Error(Errc::dimension, plant.name + ": linearization point has wrong size");
        return plant.analytic_linearization(x0, u0);
    }
    return linearize_fd(plant, x0, u0);
}

PlantModel sip_plant(double L, double g) {
    PlantModel p;
    p.name = "sip";
    p.state_dim = 4;
    p.input_dim = 1;
    p.params = {{"L", L}, {"g", g}};
    p.deriv = [L, g](const Vec& x, const Vec& u) {
        Vec d(4);
        d << x(1), (g / L) * std::sin(x(0)) - std::cos(x(0)) / L * u(0), x(3), u(0);
        return d;
    };
    p.analytic_linearization = [L, g](const Vec& x, const Vec& u) {
        Mat A = Mat::Zero(4, 4), B = Mat::Zero(4, 1);
        A(0, 1) = 1.0;
        A(1, 0) = (g / L) * std::cos(x(0)) + std::sin(x(0)) / L * u(0);
        A(2, 3) = 1.0;
        B(1, 0) = -std::cos(x(0)) / L;
        B(3, 0) = 1.0;
        return std::make_pair(A, B);
    };
    return p;
}

PlantModel dip_plant(double m1, double m2, double L1, double L2, double g) {
    PlantModel p;
    p.name = "dip";
    p.state_dim = 6;
    p.input_dim = 1;
    p.params = {{"m1", m1}, {"m2", m2}, {"L1", L1}, {"L2", L2}, {"g", g}};

    // Lagrangian of two point masses on massless links over a cart with prescribed acceleration:
    // Mq * [dd1; dd2] = r
    struct Terms {
        Eigen::Matrix2d M;
        Eigen::Vector2d r;
    };
    auto terms = [=](const Vec& x, double a) {
        const double s1 = std::sin(x(0)), c1 = std::cos(x(0));
        const double s2 = std::sin(x(2)), c2 = std::cos(x(2));
        const double s12 = std::sin(x(0) - x(2)), c12 = std::cos(x(0) - x(2));
        Terms t;
        t.M << (m1 + m2) * L1, m2 * L2 * c12, m2 * L1 * c12, m2 * L2;
        t.r << (m1 + m2) * g * s1 - (m1 + m2) * c1 * a - m2 * L2 * s12 * x(3) * x(3),
            m2 * g * s2 - m2 * c2 * a + m2 * L1 * s12 * x(1) * x(1);
        return t;
    };

    p.deriv = [terms](const Vec& x, const Vec& u) {
        Terms t = terms(x, u(0));
        Eigen::Vector2d dd = t.M.inverse() * t.r;
        Vec d(6);
        d << x(1), dd(0), x(3), dd(1), x(5), u(0);
        return d;
    };

    p.analytic_linearization = [=](const Vec& x, const Vec& u) {
        const double a = u(0);
        Terms t = terms(x, a);
        Eigen::Matrix2d Minv = t.M.inverse();
        Eigen::Vector2d dd = Minv * t.r;
        const double s1 = std::sin(x(0)), c1 = std::cos(x(0));
        const double s2 = std::sin(x(2)), c2 = std::cos(x(2));
        const double s12 = std::sin(x(0) - x(2)), c12 = std::cos(x(0) - x(2));
        const double w1 = x(1), w2 = x(3);

        Eigen::Matrix2d dM1;
        dM1 << 0.0, -m2 * L2 * s12, -m2 * L1 * s12, 0.0;
        Eigen::Vector2d dr_t1(
            (m1 + m2) * g * c1 + (m1 + m2) * s1 * a - m2 * L2 * c12 * w2 * w2,
            m2 * L1 * c12 * w1 * w1);
        Eigen::Vector2d dr_t2(
            m2 * L2 * c12 * w2 * w2,
            m2 * g * c2 + m2 * s2 * a - m2 * L1 * c12 * w1 * w1);
        Eigen::Vector2d dr_w1(0.0, 2.0 * m2 * L1 * s12 * w1);
        Eigen::Vector2d dr_w2(-2.0 * m2 * L2 * s12 * w2, 0.0);
        Eigen::Vector2d dr_a(-(m1 + m2) * c1, -m2 * c2);

        Eigen::Vector2d j_t1 = Minv * (dr_t1 - dM1 * dd);
        Eigen::Vector2d j_t2 = Minv * (dr_t2 + dM1 * dd);
        Eigen::Vector2d j_w1 = Minv * dr_w1;
        Eigen::Vector2d j_w2 = Minv * dr_w2;
        Eigen::Vector2d j_a = Minv * dr_a;

        Mat A = Mat::Zero(6, 6), B = Mat::Zero(6, 1);
        A(0, 1) = 1.0;
        A(2, 3) = 1.0;
        A(4, 5) = 1.0;
        for (int r = 0; r < 2; ++r) {
            const int row = 1 + 2 * r;
            A(row, 0) = j_t1(r);
            A(row, 1) = j_w1(r);
            A(row, 2) = j_t2(r);
            A(row, 3) = j_w2(r);
            B(row, 0) = j_a(r);
        }
        B(5, 0) = 1.0;
        return std::make_pair(A, B);
    };
    return p;
}

PlantModel motorcycle_plant(double v, double L, double H, double tau, double g) {
    PlantModel p;
    p.name = "motorcycle";
    p.state_dim = 6;
    p.input_dim = 1;
    p.params = {{"v", v}, {"L", L}, {"H", H}, {"tau", tau}, {"g", g}};
    p.deriv = [=](const Vec& x, const Vec& u) {
        const double tb = std::tan(x(3));
        Vec d(6);
        d << v * std::cos(x(2)), v * std::sin(x(2)), (v / L) * tb, (u(0) - x(3)) / tau, x(5),
            (g / H) * std::sin(x(4)) - (v * v / (H * L)) * tb * std::cos(x(4));
        return d;
    };
    p.analytic_linearization = [=](const Vec& x, const Vec&) {
        const double tb = std::tan(x(3));
        const double sec2 = 1.0 + tb * tb;
        Mat A = Mat::Zero(6, 6), B = Mat::Zero(6, 1);
        A(0, 2) = -v * std::sin(x(2));
        A(1, 2) = v * std::cos(x(2));
        A(2, 3) = (v / L) * sec2;
        A(3, 3) = -1.0 / tau;
        A(4, 5) = 1.0;
        A(5, 3) = -(v * v / (H * L)) * sec2 * std::cos(x(4));
        A(5, 4) = (g / H) * std::cos(x(4)) + (v * v / (H * L)) * tb * std::sin(x(4));
        B(3, 0) = 1.0 / tau;
        return std::make_pair(A, B);
    };
    return p;
}

PlantModel motorcycle_lateral_plant(double v, double L, double H, double g) {
    PlantModel p;
    p.name = "motorcycle_lateral";
    p.state_dim = 4;
    p.input_dim = 1;
    p.params = {{"v", v}, {"L", L}, {"H", H}, {"g", g}};
    p.deriv = [=](const Vec& x, const Vec& u) {
        const double tb = std::tan(u(0));
        Vec d(4);
        d << v * std::sin(x(1)), (v / L) * tb, x(3),
            (g / H) * std::sin(x(2)) - (v * v / (H * L)) * tb * std::cos(x(2));
        return d;
    };
    p.analytic_linearization = [=](const Vec& x, const Vec& u) {
        const double tb = std::tan(u(0));
        const double sec2 = 1.0 + tb * tb;
        Mat A = Mat::Zero(4, 4), B = Mat::Zero(4, 1);
        A(0, 1) = v * std::cos(x(1));
        A(2, 3) = 1.0;
        A(3, 2) = (g / H) * std::cos(x(2)) + (v * v / (H * L)) * tb * std::sin(x(2));
        B(1, 0) = (v / L) * sec2;
        B(3, 0) = -(v * v / (H * L)) * sec2 * std::cos(x(2));
        return std::make_pair(A, B);
    };
    return p;
}

PlantModel point2d_plant() {
    PlantModel p;
    p.name = "point2d";
    p.state_dim = 2;
    p.input_dim = 1;
    p.deriv = [](const Vec& x, const Vec& u) {
        Vec d(2);
        d << x(0) * std::sin(x(1)), x(1) + u(0);
        return d;
    };
    p.analytic_linearization = [](const Vec& x, const Vec&) {
        Mat A(2, 2), B(2, 1);
        A << std::sin(x(1)), x(0) * std::cos(x(1)), 0.0, 1.0;
        B << 0.0, 1.0;
        return std::make_pair(A, B);
    };
    return p;
}

FactoredModel sip_factored_model(double theta, double L, double g, double guard) {
    FactoredModel f;
    f.A = Mat::Zero(4, 4);
    f.B = Mat::Zero(4, 1);
    f.A(0, 1) = 1.0;
    f.A(2, 3) = 1.0;
    if (std::abs(theta) < guard || theta == 0.0)
        f.A(1, 0) = g / L;
    else
        f.A(1, 0) = (g / L) * std::sin(theta) / theta;
    f.B(1, 0) = -std::cos(theta) / L;
    f.B(3, 0) = 1.0;
    return f;
}

FactoredModel sip_partial(const FactoredModel& full) {
    const int idx[3] = {0, 1, 3};
    FactoredModel p;
    p.A = Mat(3, 3);
    p.B = Mat(3, 1);
    for (int i = 0; i < 3; ++i) {
        p.B(i, 0) = full.B(idx[i], 0);
        for (int j = 0; j < 3; ++j) p.A(i, j) = full.A(idx[i], idx[j]);
    }
    return p;
}

} // namespace robctl
