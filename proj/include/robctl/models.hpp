#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "robctl/numerics.hpp"

namespace robctl {

using Deriv = std::function<Vec(const Vec& x, const Vec& u)>;
using Jacobian = std::function<std::pair<Mat, Mat>(const Vec& x, const Vec& u)>;

struct PlantModel {
    std::string name;
    int state_dim = 0;
    int input_dim = 0;
    Deriv deriv;
    Jacobian analytic_linearization; // may be empty
    std::map<std::string, double> params;
};

enum class TerminalEvent { success, failure, destination, timeout };

const char* event_name(TerminalEvent e);
TerminalEvent parse_event(const std::string& s);

using StatePredicate = std::function<bool(const Vec&)>;
using Controller = std::function<Vec(double t, const Vec& x)>;

struct SimSpec {
    double dt = 0.001;
    double t_end = 1.0;
    StatePredicate stop_success;
    StatePredicate stop_failure;
    StatePredicate stop_destination;
    int decimation = 1;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> inputs;
    TerminalEvent terminal_event = TerminalEvent::timeout;
    Vec final_state;
    double elapsed = 0.0;
    long steps = 0;
};

Vec step_euler(const PlantModel& plant, const Vec& x, const Vec& u, double dt, double t = 0.0);

// Control is recomputed every step. A recorded row holds the state and the input applied
// from it; the terminal row repeats the last input.
Trajectory simulate(const PlantModel& plant, const Controller& controller, const SimSpec& spec, const Vec& x0);

std::pair<Mat, Mat> linearize(const PlantModel& plant, const Vec& x0, const Vec& u0);
std::pair<Mat, Mat> linearize_fd(const PlantModel& plant, const Vec& x0, const Vec& u0, double step = 1e-6);

// State [theta, dtheta, x, dx], input cart acceleration.
PlantModel sip_plant(double L = 1.0, double g = 10.0);

// State [theta1, dtheta1, theta2, dtheta2, x, dx] with absolute link angles, input cart acceleration.
PlantModel dip_plant(double m1 = 1.0, double m2 = 1.0, double L1 = 1.0, double L2 = 1.0, double g = 10.0);

// State [x, y, phi, beta, roll, droll], input steering command.
PlantModel motorcycle_plant(double v = 10.0, double L = 1.5, double H = 1.0, double tau = 0.02, double g = 10.0);

// Lateral reduction [y, phi, roll, droll] with the steering angle as input.
PlantModel motorcycle_lateral_plant(double v = 10.0, double L = 1.5, double H = 1.0, double g = 10.0);

// State [x, y], dynamics x' = x sin y, y' = y + u.
PlantModel point2d_plant();

struct FactoredModel {
    Mat A;
    Mat B;
};

// A(x), B(x) of the state-dependent SIP model. |theta| < guard uses A21 = g/L.
FactoredModel sip_factored_model(double theta, double L = 1.0, double g = 10.0, double guard = 0.1);

// Rows/cols [theta, dtheta, dx] of a full SIP model.
FactoredModel sip_partial(const FactoredModel& full);

} // namespace robctl
