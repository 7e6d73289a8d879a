#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "robctl/scenarios.hpp"

namespace robctl {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error(Errc::io, "write failed for '" + path + "'");
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vec json_vec(const json& a) {
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

bool same_vec(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.size() == 0 || a == b); }

} // namespace

bool RunReport::operator==(const RunReport& o) const {
    if (scenario != o.scenario || terminal_event != o.terminal_event || elapsed_sim_time != o.elapsed_sim_time ||
        min_h != o.min_h || checksum != o.checksum || guard_activations != o.guard_activations ||
        !same_vec(final_state, o.final_state) || gains.size() != o.gains.size())
        return false;
    for (size_t i = 0; i < gains.size(); ++i)
        if (gains[i].first != o.gains[i].first || !same_vec(gains[i].second, o.gains[i].second)) return false;
    return true;
}

EmitFormat parse_format(const std::string& s) {
    if (s == "csv") return EmitFormat::csv;
    if (s == "json") return EmitFormat::json;
    if (s == "svg") return EmitFormat::svg;
    throw Error(Errc::invalid_override, "unknown format '" + s + "' (csv, json, svg)");
}

std::string to_csv(const Trajectory& traj) {
    const Eigen::Index n = traj.states.empty() ? traj.final_state.size() : traj.states.front().size();
    const Eigen::Index m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
    std::string out = "t";
    for (Eigen::Index i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
    for (Eigen::Index i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
    out += '\n';
    for (size_t r = 0; r < traj.times.size(); ++r) {
        out += num(traj.times[r]);
        for (Eigen::Index i = 0; i < traj.states[r].size(); ++i) out += ',' + num(traj.states[r](i));
        for (Eigen::Index i = 0; i < traj.inputs[r].size(); ++i) out += ',' + num(traj.inputs[r](i));
        out += '\n';
    }
    return out;
}

namespace {

json report_json(const RunReport& r) {
    json j;
    j["scenario"] = r.scenario;
    j["terminal_event"] = event_name(r.terminal_event);
    j["final_state"] = vec_json(r.final_state);
    j["elapsed_sim_time"] = r.elapsed_sim_time;
    j["min_h"] = r.min_h ? json(*r.min_h) : json(nullptr);
    json g = json::array();
    for (const auto& [name, k] : r.gains) g.push_back({{"name", name}, {"values", vec_json(k)}});
    j["gains"] = g;
    j["checksum"] = r.checksum;
    j["guard_activations"] = r.guard_activations;
    return j;
}

} // namespace

std::string report_to_json(const RunReport& r) {
    return report_json(r).dump(2);
}

RunReport report_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        const json& rep = j.contains("report") ? j["report"] : j;
        RunReport r;
        r.scenario = rep.at("scenario").get<std::string>();
        r.terminal_event = parse_event(rep.at("terminal_event").get<std::string>());
        r.final_state = json_vec(rep.at("final_state"));
        r.elapsed_sim_time = rep.at("elapsed_sim_time").get<double>();
        if (!rep.at("min_h").is_null()) r.min_h = rep["min_h"].get<double>();
        for (const auto& g : rep.at("gains")) r.gains.emplace_back(g.at("name").get<std::string>(), json_vec(g.at("values")));
        r.checksum = rep.at("checksum").get<std::string>();
        r.guard_activations = rep.at("guard_activations").get<long>();
        return r;
    } catch (const json::exception& e) {
        throw Error(Errc::io, std::string("malformed report JSON: ") + e.what());
    }
}

namespace {

struct Series {
    std::vector<double> xs, ys;
    std::string color;
};

struct Plot {
    std::string title, xlabel, ylabel;
    std::vector<Series> lines;
    struct Circle {
        double cx, cy, r;
    };
    std::vector<Circle> circles;
};

std::string render_svg(const Plot& p) {
    const double W = 640, H = 480, pad = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto grow = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    };
    for (const auto& s : p.lines)
        for (size_t i = 0; i < s.xs.size(); ++i) grow(s.xs[i], s.ys[i]);
    for (const auto& c : p.circles) {
        grow(c.cx - c.r, c.cy - c.r);
        grow(c.cx + c.r, c.cy + c.r);
    }
    if (!(x1 >= x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 1, x1 += 1;
    if (y1 - y0 < 1e-12) y0 -= 1, y1 += 1;
    const double sx = (W - 2 * pad) / (x1 - x0), sy = (H - 2 * pad) / (y1 - y0);
    auto X = [&](double x) { return pad + (x - x0) * sx; };
    auto Y = [&](double y) { return H - pad - (y - y0) * sy; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
       << "\" fill=\"none\" stroke=\"#999\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << p.title << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << p.xlabel
       << " [" << num(x0) << ", " << num(x1) << "]</text>\n";
    os << "<text x=\"12\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 " << H / 2 << ")\">"
       << p.ylabel << " [" << num(y0) << ", " << num(y1) << "]</text>\n";
    for (const auto& c : p.circles)
        os << "<ellipse cx=\"" << X(c.cx) << "\" cy=\"" << Y(c.cy) << "\" rx=\"" << c.r * sx << "\" ry=\"" << c.r * sy
           << "\" fill=\"#f4cccc\" stroke=\"#c00\"/>\n";
    for (const auto& s : p.lines) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.xs.size(); ++i)
            if (std::isfinite(s.xs[i]) && std::isfinite(s.ys[i])) os << X(s.xs[i]) << ',' << Y(s.ys[i]) << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

Plot make_plot(const ScenarioRun& run) {
    const Trajectory& tr = run.traj;
    const std::string& name = run.report.scenario;
    auto column = [&](int j) {
        std::vector<double> v;
        for (const auto& s : tr.states) v.push_back(s(j));
        return v;
    };
    Plot p;
    p.title = name;
    if (name == "motorcycle_smc") {
        p.xlabel = "x (m)";
        p.ylabel = "y (m)";
        MotorcycleGuidance g = default_motorcycle_guidance();
        const Pose I = g.pose_I(), D = g.pose_D();
        p.lines.push_back({{I.x, g.turning_x()}, {I.y, g.turning_y()}, "#888"});
        p.lines.push_back({{g.turning_x(), D.x}, {g.turning_y(), D.y}, "#888"});
        p.lines.push_back({column(0), column(1), "#1f77b4"});
    } else if (name.rfind("point2d", 0) == 0) {
        p.xlabel = "x";
        p.ylabel = "y";
        const bool case1 = name.find("case1") != std::string::npos;
        p.circles.push_back(case1 ? Plot::Circle{2.0, 2.0, 1.0} : Plot::Circle{0.0, 3.5, 3.0});
        p.lines.push_back({column(0), column(1), "#1f77b4"});
    } else {
        // cart position and pendulum angle(s) against time
        const int n = tr.states.empty() ? 0 : static_cast<int>(tr.states.front().size());
        p.xlabel = "t (s)";
        p.ylabel = n == 6 ? "x (blue), theta1 (red), theta2 (green)" : "x (blue), theta (red)";
        if (n == 6) {
            p.lines.push_back({tr.times, column(4), "#1f77b4"});
            p.lines.push_back({tr.times, column(0), "#d62728"});
            p.lines.push_back({tr.times, column(2), "#2ca02c"});
        } else if (n == 4) {
            p.lines.push_back({tr.times, column(2), "#1f77b4"});
            p.lines.push_back({tr.times, column(0), "#d62728"});
        }
    }
    return p;
}

json trajectory_meta(const ScenarioRun& run) {
    const Trajectory& tr = run.traj;
    json m;
    m["rows"] = tr.times.size();
    m["steps"] = tr.steps;
    m["state_names"] = run.state_names;
    m["input_dim"] = tr.inputs.empty() ? 0 : tr.inputs.front().size();
    m["t_first"] = tr.times.empty() ? 0.0 : tr.times.front();
    m["t_last"] = tr.times.empty() ? 0.0 : tr.times.back();
    m["aux_names"] = run.aux_names;
    return m;
}

} // namespace

void emit(const ScenarioRun& run, EmitFormat format, const std::string& path) {
    switch (format) {
    case EmitFormat::csv: write_file(path, to_csv(run.traj)); return;
    case EmitFormat::json: {
        json j;
        j["report"] = report_json(run.report);
        j["trajectory"] = trajectory_meta(run);
        write_file(path, j.dump(2) + "\n");
        return;
    }
    case EmitFormat::svg: write_file(path, render_svg(make_plot(run))); return;
    }
}

std::vector<SweepRow> table_rows(int which) {
    Vec k;
    if (which == 1) {
        SipRobustInstance inst = sip_robust_instance(false);
        RobustResult r = robust_riccati_gain(inst.Ap, inst.Bp, inst.bounds, inst.cfg);
        if (!r.ok) throw Error(Errc::numerical, robust_tuning_hint());
        k = r.gain.k;
    } else if (which == 2) {
        k = sip_interval_gain();
    } else {
        throw Error(Errc::invalid_override, "table must be 1 or 2");
    }
    std::vector<double> grid;
    for (int d = -72; d <= 72; ++d) grid.push_back(d * std::numbers::pi / 180.0);
    return eig_sweep(k, grid);
}

void emit_table(int which, const std::string& path) {
    std::string out = "theta_deg,re1,re2,re3\n";
    for (const auto& row : table_rows(which)) {
        out += std::to_string(static_cast<int>(std::lround(row.theta * 180.0 / std::numbers::pi)));
        for (double v : row.re) out += ',' + num(v);
        out += '\n';
    }
    write_file(path, out);
}

Mat parse_matrix_text(const std::string& text) {
    std::vector<std::vector<double>> rows;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            json j = json::parse(text);
            if (!j.is_array()) throw Error(Errc::io, "matrix JSON must be an array");
            for (const auto& r : j) {
                if (r.is_number()) rows.push_back({r.get<double>()});
                else rows.push_back(r.get<std::vector<double>>());
            }
        } catch (const json::exception& e) {
            throw Error(Errc::io, std::string("malformed matrix JSON: ") + e.what());
        }
    } else {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            line = line.substr(0, line.find('#'));
            std::istringstream ls(line);
            std::vector<double> r;
            std::string tok;
            while (ls >> tok) {
                try {
                    size_t used = 0;
                    r.push_back(std::stod(tok, &used));
                    if (used != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw Error(Errc::io, "bad matrix entry '" + tok + "'");
                }
            }
            if (!r.empty()) rows.push_back(std::move(r));
        }
    }
    if (rows.empty()) throw Error(Errc::dimension, "matrix literal has no entries");
    Mat M(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw Error(Errc::dimension, "ragged matrix rows");
        for (size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
    }
    return M;
}

Mat read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_matrix_text(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

} // namespace robctl
