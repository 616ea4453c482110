#pragma once

#include "hvrt/errors.hpp"

namespace hvrt {

/// Injections larger than this are outside any physical regime we model.
inline constexpr double kInjectionCap = 10.0;

/// Single-reactance equivalent of the sending-end AC grid, per unit.
/// x_e: equivalent reactance, v_e: source magnitude, g_c: shunt admittance
/// of the HVDC capacitor banks.
struct GridParams {
    double x_e = 0.5;
    double v_e = 1.0;
    double g_c = 0.0;

    /// Well-posed iff g_c * x_e < 1 (equivalently SCR above the compensation level).
    bool is_stiff() const { return g_c * x_e < 1.0; }
    void validate() const;
};

/// Net power injected at the PCC, generator convention (q < 0 absorbs).
struct PccInjection {
    double p = 0.0;
    double q = 0.0;

    void validate(double cap = kInjectionCap) const;
};

/// Coefficients of the biquadratic a*V^4 + b*V^2 + c = 0 in the PCC voltage.
struct QuarticCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double discriminant() const { return b * b - 4.0 * a * c; }
};

enum class RootBranch { high, low };

struct PccSolution {
    double v_p = 0.0;
    double discriminant = 0.0;
    RootBranch branch = RootBranch::high;
    double v_p_low = 0.0;       // lower root, diagnostics only
    double residual = 0.0;
    double dv_inphase = 0.0;    // series-drop component along the source
    double dv_quadrature = 0.0; // series-drop component across it
};

QuarticCoeffs quartic_coeffs(const GridParams& grid, const PccInjection& inj);

double eq1_residual(const QuarticCoeffs& qc, double v_p);

/// Solves for the PCC voltage magnitude on the physical (high) branch.
/// Throws NoRealSolution when the injection is beyond the transfer limit,
/// DegenerateNetwork when g_c * x_e = 1.
PccSolution solve_pcc_voltage(const GridParams& grid, const PccInjection& inj);

/// dV_p/dP at the given operating point. Strictly negative for p > 0.
double sensitivity_p(const GridParams& grid, const PccInjection& inj);

/// dV_p/dQ at the given operating point. Strictly positive when g_c * x_e < 1.
double sensitivity_q(const GridParams& grid, const PccInjection& inj);

/// |dV/dQ| - |dV/dP|; positive whenever g_c * x_e < 1 and q < 0.
double dominance_margin(const GridParams& grid, const PccInjection& inj);

double scr_of(const GridParams& grid);

/// Capacitor-bank admittance from its Mvar rating at nominal voltage (1 p.u.).
double gc_from_qc(double q_c);

/// Folds a source magnitude v_e != 1 into an equivalent grid with v_e = 1
/// that produces identical PCC voltages for identical injections.
GridParams absorb_source_voltage(const GridParams& grid);

}  // namespace hvrt
