#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "robctl/scenarios.hpp"

using namespace robctl;

namespace {

std::string fmt_vec(const Vec& v) {
    std::ostringstream os;
    os << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << ']';
    return os.str();
}

Overrides parse_sets(const std::vector<std::string>& sets) {
    Overrides ov;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw Error(Errc::invalid_override, "expected key=value, got '" + s + "'");
        const std::string key = s.substr(0, eq), val = s.substr(eq + 1);
        try {
            size_t used = 0;
            ov[key] = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
            throw Error(Errc::invalid_override, "'" + key + "' needs a number, got '" + val + "'");
        }
    }
    return ov;
}

// Pole file: one pole per row, "re" or "re im".
std::vector<Complex> read_poles(const std::string& path) {
    Mat P = read_matrix_file(path);
    if (P.rows() == 1 && P.cols() > 2) P.transposeInPlace(); // a single row of real poles
    if (P.cols() < 1 || P.cols() > 2) throw Error(Errc::dimension, "pole file rows must be 're' or 're im'");
    std::vector<Complex> poles;
    for (Eigen::Index i = 0; i < P.rows(); ++i) poles.emplace_back(P(i, 0), P.cols() == 2 ? P(i, 1) : 0.0);
    return poles;
}

void print_mat(const char* name, const Mat& M) { std::cout << name << " =\n" << format_mat(M) << "\n"; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robctl: robust and safety-critical controller synthesis and simulation"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario");
    std::string scen, out_dir, format = "csv";
    std::vector<std::string> sets;
    bool list = false;
    run->add_option("scenario", scen, "scenario id");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--format", format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
    run->add_option("--set", sets, "override key=value (repeatable)");
    run->add_flag("--list", list, "list scenario ids");

    auto* table = app.add_subcommand("table", "write an eigenvalue sweep table");
    int which = 1;
    std::string table_out;
    table->add_option("which", which, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
    table->add_option("--out", table_out, "CSV file")->required();

    auto* design = app.add_subcommand("design", "gain synthesis");
    design->require_subcommand(1);

    auto* pp = design->add_subcommand("pole-place", "Ackermann pole placement");
    std::string a_file, b_file, poles_file;
    pp->add_option("--A", a_file)->required();
    pp->add_option("--B", b_file)->required();
    pp->add_option("--poles", poles_file, "file with one pole per row: re [im]")->required();

    auto* rr = design->add_subcommand("robust-riccati", "rank-one robust Riccati gain");
    std::string dA_file, dB_file, q_file, r_file;
    RobustConfig cfg;
    bool sip = false, midpoint = false;
    rr->add_flag("--sip", sip, "use the built-in inverted pendulum instance");
    rr->add_flag("--midpoint", midpoint, "with --sip: midpoint-anchored variant");
    rr->add_option("--A", a_file);
    rr->add_option("--B", b_file);
    rr->add_option("--dA", dA_file, "element-wise bound on |dA|");
    rr->add_option("--dB", dB_file, "element-wise bound on |dB|");
    rr->add_option("--Q", q_file);
    rr->add_option("--R", r_file);
    rr->add_option("--abar", cfg.a_bar);
    rr->add_option("--bbar", cfg.b_bar);
    rr->add_option("--eps", cfg.epsilon);

    auto* rc = design->add_subcommand("region-check", "interval gain region test for the pendulum partial model");
    std::vector<double> kvals;
    double a_lo = 7.57, a_hi = 10.0, b_lo = 0.31, b_hi = 1.0;
    int decimals = -1;
    rc->add_option("--K", kvals, "three gains")->required()->expected(3)->delimiter(',');
    rc->add_option("--a-lo", a_lo);
    rc->add_option("--a-hi", a_hi);
    rc->add_option("--b-lo", b_lo);
    rc->add_option("--b-hi", b_hi);
    rc->add_option("--decimals", decimals, "round 1/b_lo to this many decimals like the reference bounds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            if (list) {
                for (const auto& s : scenario_registry())
                    std::cout << s.name << "  (" << s.listing << ", expect " << event_name(s.expected) << ")\n";
                return 0;
            }
            if (scen.empty()) throw Error(Errc::unknown_id, "no scenario given (use --list)");
            const ScenarioId id = parse_scenario(scen);
            const EmitFormat fmt = parse_format(format);
            ScenarioRun r = run_scenario(id, parse_sets(sets));
            std::cout << report_to_json(r.report) << "\n";
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                const std::string path = (std::filesystem::path(out_dir) / (scen + "." + format)).string();
                emit(r, fmt, path);
                std::cerr << "wrote " << path << "\n";
            }
            if (!outcome_as_expected(id, r.report)) {
                std::cerr << "outcome mismatch: expected " << event_name(scenario_info(id).expected) << ", got "
                          << event_name(r.report.terminal_event);
                if (id == ScenarioId::dip_smc) std::cerr << " with final state norm " << r.report.final_state.norm();
                std::cerr << "\n";
                return 2;
            }
            return 0;
        }
        if (*table) {
            emit_table(which, table_out);
            std::cerr << "wrote " << table_out << "\n";
            return 0;
        }
        if (*pp) {
            GainMatrix g = design_gain_matrix(read_matrix_file(a_file), read_matrix_file(b_file), read_poles(poles_file));
            std::cout << "k = " << fmt_vec(g.k) << "\n";
            std::cout << "controllability condition = " << g.ctrb_cond << "\n";
            if (!g.warning.empty()) std::cerr << "warning: " << g.warning << "\n";
            return 0;
        }
        if (*rr) {
            Mat A, B;
            UncertaintyBounds bounds;
            if (sip) {
                SipRobustInstance inst = sip_robust_instance(midpoint);
                A = inst.Ap;
                B = inst.Bp;
                bounds = inst.bounds;
                RobustConfig def = inst.cfg;
                if (rr->count("--abar")) def.a_bar = cfg.a_bar;
                if (rr->count("--bbar")) def.b_bar = cfg.b_bar;
                if (rr->count("--eps")) def.epsilon = cfg.epsilon;
                cfg = def;
            } else {
                if (a_file.empty() || b_file.empty() || dA_file.empty() || dB_file.empty())
                    throw Error(Errc::dimension, "need --A, --B, --dA, --dB (or --sip)");
                A = read_matrix_file(a_file);
                B = read_matrix_file(b_file);
                bounds.dA_max = read_matrix_file(dA_file);
                bounds.dB_max = read_matrix_file(dB_file);
                cfg.Q = q_file.empty() ? Mat(Mat::Identity(A.rows(), A.rows())) : read_matrix_file(q_file);
                cfg.R = r_file.empty() ? Mat(Mat::Identity(B.cols(), B.cols())) : read_matrix_file(r_file);
            }
            if (!q_file.empty() && sip) cfg.Q = read_matrix_file(q_file);
            if (!r_file.empty() && sip) cfg.R = read_matrix_file(r_file);
            RobustResult res = robust_riccati_gain(A, B, bounds, cfg);
            if (!res.ok) {
                std::cerr << "no positive definite Riccati solution. " << robust_tuning_hint() << "\n";
                return 2;
            }
            print_mat("P", res.P);
            std::cout << "k = " << fmt_vec(res.gain.k) << "\n";
            std::cout << "riccati residual = " << res.residual << "\n";
            return 0;
        }
        if (*rc) {
            Vec K(3);
            K << kvals[0], kvals[1], kvals[2];
            std::optional<int> dec;
            if (decimals >= 0) dec = decimals;
            RegionCheck r = sip_region_feasible(K, a_lo, a_hi, b_lo, b_hi, dec);
            std::printf("k3/b_lo = %.4f\na_hi*k2/(-b_lo*k2+k3) = %.4f\n%s\n", r.k2_bound, r.k1_bound,
                        r.feasible ? "feasible" : "infeasible");
            return r.feasible ? 0 : 2;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
