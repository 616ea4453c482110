#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hvrt/config.hpp"
#include "hvrt/csv.hpp"

namespace {

using namespace hvrt;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void write_output(const std::string& path, const std::string& content,
                  const ConfigDocument& doc) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Errc::parse_error, "cannot open output file '" + path + "'");
    out << content;
    std::ofstream mf(path + ".manifest", std::ios::binary);
    require(mf.good(), Errc::parse_error, "cannot open manifest for '" + path + "'");
    mf << manifest_text(doc);
}

void emit(const std::string& path, const std::string& content, const ConfigDocument& doc) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_output(path, content, doc);
}

GridParams grid_from_flags(const ConfigDocument& doc, double xe, double gc) {
    GridParams grid = doc.scenario.grid;
    if (xe > 0.0) grid.x_e = xe;
    if (gc >= 0.0) grid.g_c = gc;
    return grid;
}

int cmd_solve(const ConfigDocument& doc, double p, double q, double xe, double gc) {
    const GridParams grid = grid_from_flags(doc, xe, gc);
    const PccSolution sol = solve_pcc_voltage(grid, {p, q});
    std::cout << "v_p = " << format_number(sol.v_p) << "\n"
              << "discriminant = " << format_number(sol.discriminant) << "\n"
              << "branch = " << (sol.branch == RootBranch::high ? "high" : "low") << "\n"
              << "v_p_low = " << format_number(sol.v_p_low) << "\n"
              << "residual = " << format_number(sol.residual) << "\n";
    return kExitOk;
}

int cmd_sense(const ConfigDocument& doc, double p, double q, double xe, double gc, bool fd) {
    const GridParams grid = grid_from_flags(doc, xe, gc);
    const PccInjection inj{p, q};
    const double sp = sensitivity_p(grid, inj);
    const double sq = sensitivity_q(grid, inj);
    std::cout << "dv_dp = " << format_number(sp) << "\n"
              << "dv_dq = " << format_number(sq) << "\n"
              << "dominance_margin = " << format_number(dominance_margin(grid, inj)) << "\n";
    if (fd) {
        const double h = 1e-6;
        const double fd_p = (solve_pcc_voltage(grid, {p + h, q}).v_p -
                             solve_pcc_voltage(grid, {p - h, q}).v_p) /
                            (2.0 * h);
        const double fd_q = (solve_pcc_voltage(grid, {p, q + h}).v_p -
                             solve_pcc_voltage(grid, {p, q - h}).v_p) /
                            (2.0 * h);
        std::cout << "fd_dv_dp = " << format_number(fd_p) << "\n"
                  << "fd_dv_dq = " << format_number(fd_q) << "\n";
    }
    return kExitOk;
}

int cmd_capability(const ConfigDocument& doc, const std::string& sweep, double from, double to,
                   int n, const std::string& out) {
    AxisSpec p_axis{1.0, 1.0, 1};
    AxisSpec v_axis{1.0, 1.0, 1};
    AxisSpec k_axis{0.0, 0.0, 1};
    if (sweep == "p_s")
        p_axis = {from < 0 ? 0.0 : from, to < 0 ? 1.0 : to, n};
    else if (sweep == "v_s")
        v_axis = {from < 0 ? 0.9 : from, to < 0 ? 1.3 : to, n};
    else if (sweep == "k_de")
        k_axis = {from < 0 ? 0.0 : from, to < 0 ? doc.scenario.machine.k_de_max : to, n};
    else
        fail(Errc::schema_error, "sweep must be p_s, v_s or k_de");
    const auto rows = capability_grid(doc.scenario.machine, p_axis, v_axis, k_axis);
    std::ostringstream os;
    write_capability_csv(rows, os);
    emit(out, os.str(), doc);
    return kExitOk;
}

int cmd_design(const ConfigDocument& doc) {
    const MachineParams& m = doc.scenario.machine;
    const HvrtParams& hp = doc.scenario.hvrt;
    const OperatingPoint op{.p_s = 1.0, .q_s = 0.0, .v_s = 1.0};
    const CapabilityLimits lim = deload_limits(m, op, m.k_de_max);

    HvrtParams total = hp;
    total.gain_basis = GainBasis::total;
    HvrtParams stator = hp;
    stator.gain_basis = GainBasis::stator;
    const Gains g_total = compute_gains(lim, total);
    const Gains g_stator = compute_gains(lim, stator);

    std::cout << "x_m = " << format_number(m.x_m) << "\n"
              << "x_l = " << format_number(m.x_l) << "\n"
              << "i_r_max = " << format_number(m.i_r_max) << "\n"
              << "s_n = " << format_number(m.s_n) << "\n"
              << "q_s_max = " << format_number(lim.q_s_max) << "\n"
              << "q_g_max = " << format_number(lim.q_g_max) << "\n"
              << "q_total_max = " << format_number(lim.q_total_max) << "\n"
              << "q_s_deload_max = " << format_number(lim.q_s_deload_max) << "\n"
              << "q_total_deload_max = " << format_number(lim.q_total_deload_max) << "\n"
              << "v_ov_min = " << format_number(hp.v_ov_min) << "\n"
              << "v_ov1 = " << format_number(hp.v_ov1) << "\n"
              << "v_ov_max = " << format_number(hp.v_ov_max) << "\n"
              << "k1_total = " << format_number(g_total.k1) << "\n"
              << "k2_total = " << format_number(g_total.k2) << "\n"
              << "k1_stator = " << format_number(g_stator.k1) << "\n"
              << "k2_stator = " << format_number(g_stator.k2) << "\n";
    return kExitOk;
}

int cmd_simulate(ConfigDocument doc, const std::string& method, const std::string& out) {
    if (!method.empty()) apply_override(doc, "scenario.method", method);
    finalize(doc);
    const RunResult rr = run(doc.scenario);
    std::ostringstream os;
    write_timeseries_csv(rr.ts, os);
    emit(out, os.str(), doc);
    std::cerr << "v_e = " << format_number(rr.v_e)
              << ", terminal v_p = " << format_number(rr.terminal_v_p)
              << ", max residual = " << format_number(rr.max_eq1_residual) << "\n";
    return kExitOk;
}

int cmd_compare(const ConfigDocument& doc, const std::string& methods, const std::string& out) {
    std::vector<std::pair<std::string, Scenario>> scenarios;
    std::stringstream ss(methods);
    std::string item;
    while (std::getline(ss, item, ',')) {
        ConfigDocument d = doc;
        apply_override(d, "scenario.method", item);
        finalize(d);
        scenarios.emplace_back(item, d.scenario);
    }
    require(!scenarios.empty(), Errc::schema_error, "no methods given");
    const auto metrics = compare(scenarios);
    std::ostringstream os;
    write_metrics_csv(metrics, os);
    emit(out, os.str(), doc);
    return kExitOk;
}

int cmd_sweep(const ConfigDocument& doc, const std::string& param, const std::string& values,
              const std::string& out) {
    std::vector<std::pair<std::string, Scenario>> scenarios;
    std::stringstream ss(values);
    std::string item;
    while (std::getline(ss, item, ',')) {
        ConfigDocument d = doc;
        if (param == "wind")
            apply_override(d, "scenario.v_wind", item);
        else if (param == "vov1")
            apply_override(d, "hvrt.v_ov1", item);
        else if (param == "scr")
            apply_override(d, "grid.x_e", format_number(1.0 / std::stod(item)));
        else
            fail(Errc::schema_error, "sweep param must be wind, vov1 or scr");
        finalize(d);
        scenarios.emplace_back(param + "=" + item, d.scenario);
    }
    require(!scenarios.empty(), Errc::schema_error, "no sweep values given");
    const auto metrics = compare(scenarios);
    std::ostringstream os;
    write_metrics_csv(metrics, os);
    emit(out, os.str(), doc);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phasor-domain simulator and design toolkit for DFIG high-voltage "
                 "ride-through after HVDC bipolar block"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "config file (sectioned key = value)");
    app.add_option("--set", overrides, "override section.key=value");

    auto* solve = app.add_subcommand("solve", "solve the PCC voltage for a fixed injection");
    double p = 0.0, q = 0.0, xe = -1.0, gc = -1.0;
    solve->add_option("--p", p, "active power injection, p.u.");
    solve->add_option("--q", q, "reactive power injection, p.u.");
    solve->add_option("--xe", xe, "grid reactance override");
    solve->add_option("--gc", gc, "capacitor admittance override");

    auto* sense = app.add_subcommand("sense", "voltage sensitivities at an operating point");
    bool with_fd = false;
    sense->add_option("--p", p, "active power injection, p.u.");
    sense->add_option("--q", q, "reactive power injection, p.u.");
    sense->add_option("--xe", xe, "grid reactance override");
    sense->add_option("--gc", gc, "capacitor admittance override");
    sense->add_flag("--fd", with_fd, "print finite-difference checks alongside");

    auto* capability = app.add_subcommand("capability", "export the reactive capability grid");
    std::string sweep_axis = "p_s", out_path;
    double axis_from = -1.0, axis_to = -1.0;
    int axis_n = 41;
    capability->add_option("--sweep", sweep_axis, "axis to sweep: p_s, v_s or k_de");
    capability->add_option("--from", axis_from, "axis start");
    capability->add_option("--to", axis_to, "axis end");
    capability->add_option("--n", axis_n, "number of points");
    capability->add_option("--out", out_path, "output CSV path ('-' for stdout)");

    auto* design = app.add_subcommand("design", "print the resolved controller design block");

    auto* simulate = app.add_subcommand("simulate", "run one scenario and export the signals");
    std::string method;
    simulate->add_option("--method", method, "unitpf, avc or pq");
    simulate->add_option("--out", out_path, "output CSV path ('-' for stdout)");

    auto* compare_cmd = app.add_subcommand("compare", "run several methods on one scenario");
    std::string methods = "unitpf,avc,pq";
    compare_cmd->add_option("--methods", methods, "comma-separated method list");
    compare_cmd->add_option("--out", out_path, "output CSV path ('-' for stdout)");

    auto* sweep = app.add_subcommand("sweep", "sweep one parameter and tabulate metrics");
    std::string sweep_param = "wind", sweep_values;
    sweep->add_option("--param", sweep_param, "wind, vov1 or scr");
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--out", out_path, "output CSV path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: ParseError: " << e.what() << "\n";
        return kExitConfig;
    }

    ConfigDocument doc;
    try {
        doc = config_path.empty() ? hvrt::default_config() : hvrt::load_config_file(config_path);
        for (const std::string& ov : overrides) {
            const auto eq = ov.find('=');
            hvrt::require(eq != std::string::npos, hvrt::Errc::schema_error,
                          "--set needs section.key=value");
            hvrt::apply_override(doc, ov.substr(0, eq), ov.substr(eq + 1));
        }
        hvrt::finalize(doc);
    } catch (const hvrt::SimError& e) {
        // anything raised while resolving configuration is a config error
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*solve) return cmd_solve(doc, p, q, xe, gc);
        if (*sense) return cmd_sense(doc, p, q, xe, gc, with_fd);
        if (*capability)
            return cmd_capability(doc, sweep_axis, axis_from, axis_to, axis_n, out_path);
        if (*design) return cmd_design(doc);
        if (*simulate) return cmd_simulate(doc, method, out_path);
        if (*compare_cmd) return cmd_compare(doc, methods, out_path);
        if (*sweep) return cmd_sweep(doc, sweep_param, sweep_values, out_path);
        std::cerr << "error: no subcommand\n";
        return kExitConfig;
    } catch (const hvrt::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_config_error() ? kExitConfig : kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
