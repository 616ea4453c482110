#include "hvrt/network.hpp"

#include <cmath>
#include <string>

namespace hvrt {

namespace {

// Noise floor at the feasibility boundary; discriminants in [-kDiscClamp, 0)
// are treated as exactly zero.
constexpr double kDiscClamp = 1e-12;

double clamped_discriminant(const QuarticCoeffs& qc) {
    const double d = qc.discriminant();
    if (d < 0.0 && d >= -kDiscClamp) return 0.0;
    return d;
}

// Equivalent grids produced by absorb_source_voltage may carry a negative
// shunt term; the algebra below stays valid for it, so only the physical
// user-facing validate() insists on g_c >= 0.
void check_network(const GridParams& grid) {
    require(grid.x_e > 0.0, Errc::invalid_param, "x_e must be positive");
    require(grid.v_e > 0.0, Errc::invalid_param, "v_e must be positive");
    require(std::isfinite(grid.g_c), Errc::invalid_param, "g_c must be finite");
}

}  // namespace

void GridParams::validate() const {
    require(x_e > 0.0, Errc::invalid_param, "x_e must be positive");
    require(g_c >= 0.0, Errc::invalid_param, "g_c must be non-negative");
    require(v_e > 0.0, Errc::invalid_param, "v_e must be positive");
}

void PccInjection::validate(double cap) const {
    require(std::isfinite(p) && std::isfinite(q), Errc::invalid_param, "injection must be finite");
    require(std::abs(p) <= cap && std::abs(q) <= cap, Errc::invalid_param,
            "injection exceeds the sanity cap");
}

QuarticCoeffs quartic_coeffs(const GridParams& grid, const PccInjection& inj) {
    check_network(grid);
    inj.validate();
    const double k = 1.0 - grid.g_c * grid.x_e;
    QuarticCoeffs qc;
    qc.a = k * k;
    qc.b = -1.0 - 2.0 * k * inj.q * grid.x_e;
    qc.c = (inj.p * inj.p + inj.q * inj.q) * grid.x_e * grid.x_e;
    return qc;
}

double eq1_residual(const QuarticCoeffs& qc, double v_p) {
    const double v2 = v_p * v_p;
    return qc.a * v2 * v2 + qc.b * v2 + qc.c;
}

PccSolution solve_pcc_voltage(const GridParams& grid, const PccInjection& inj) {
    const QuarticCoeffs qc = quartic_coeffs(grid, inj);
    require(qc.a > 0.0, Errc::degenerate_network, "g_c * x_e = 1 leaves the network degenerate");

    const double d = clamped_discriminant(qc);
    require(d >= 0.0, Errc::no_real_solution,
            "no real PCC voltage for the requested injection (transfer limit exceeded)");

    const double sd = std::sqrt(d);
    const double v2_high = (-qc.b + sd) / (2.0 * qc.a);
    const double v2_low = (-qc.b - sd) / (2.0 * qc.a);
    require(v2_high > 0.0, Errc::no_real_solution, "high branch collapses to zero voltage");

    PccSolution sol;
    sol.v_p = std::sqrt(v2_high);
    sol.discriminant = d;
    sol.branch = RootBranch::high;
    sol.v_p_low = v2_low > 0.0 ? std::sqrt(v2_low) : 0.0;
    sol.residual = eq1_residual(qc, sol.v_p);
    const double k = 1.0 - grid.g_c * grid.x_e;
    sol.dv_inphase = -1.0 + v2_high * k - inj.q * grid.x_e;
    sol.dv_quadrature = inj.p * grid.x_e;
    return sol;
}

double sensitivity_p(const GridParams& grid, const PccInjection& inj) {
    const PccSolution sol = solve_pcc_voltage(grid, inj);
    require(sol.discriminant > 0.0, Errc::singular_sensitivity,
            "sensitivity undefined at the feasibility boundary");
    return -(inj.p * grid.x_e * grid.x_e) / (sol.v_p * std::sqrt(sol.discriminant));
}

double sensitivity_q(const GridParams& grid, const PccInjection& inj) {
    const QuarticCoeffs qc = quartic_coeffs(grid, inj);
    const PccSolution sol = solve_pcc_voltage(grid, inj);
    require(sol.discriminant > 0.0, Errc::singular_sensitivity,
            "sensitivity undefined at the feasibility boundary");
    const double k = 1.0 - grid.g_c * grid.x_e;
    const double sd = std::sqrt(sol.discriminant);
    return k * grid.x_e * (1.0 + sd) / (2.0 * qc.a * sol.v_p * sd);
}

double dominance_margin(const GridParams& grid, const PccInjection& inj) {
    return std::abs(sensitivity_q(grid, inj)) - std::abs(sensitivity_p(grid, inj));
}

double scr_of(const GridParams& grid) {
    require(grid.x_e > 0.0, Errc::invalid_param, "x_e must be positive");
    return 1.0 / grid.x_e;
}

double gc_from_qc(double q_c) {
    require(q_c >= 0.0, Errc::invalid_param, "compensation must be non-negative");
    return q_c;  // V_pN = 1 p.u.
}

GridParams absorb_source_voltage(const GridParams& grid) {
    check_network(grid);
    GridParams adj;
    adj.x_e = grid.x_e / grid.v_e;
    adj.g_c = (grid.v_e - 1.0 + grid.g_c * grid.x_e) / grid.x_e;
    adj.v_e = 1.0;
    return adj;
}

}  // namespace hvrt
