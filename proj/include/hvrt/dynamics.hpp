#pragma once

#include "hvrt/controller.hpp"

namespace hvrt {

struct TurbineParams {
    double h = 4.0;          ///< inertia constant, s
    double v_rate = 12.0;    ///< rated wind speed, m/s
    double k_opt = 1.0;      ///< MPPT curve constant, p = k_opt * omega^3
    double aero_scale = 1.0; ///< calibrated so rated wind at optimum gives 1 p.u.
    double omega_min = 0.5;
    double omega_max = 1.35;
    double cut_in = 3.0;
    double cut_out = 25.0;

    void validate() const;
};

struct ConverterParams {
    double tau_c = 0.02;   ///< converter current response lag, s
    double c_dc = 0.05;    ///< DC-link capacitance energy constant, s
    double v_dc_ref = 1.0;
};

struct PiGains {
    double kp = 0.0;
    double ki = 0.0;
};

/// The six published controller pairs. The current loops are folded into
/// the converter lag at this timescale; their gains stay for reference.
struct PiGainSet {
    PiGains rsc_p{2.0, 20.0};
    PiGains rsc_q{1.0, 20.0};
    PiGains rsc_i{0.6, 100.0};
    PiGains gsc_vdc{8.0, 400.0};
    PiGains gsc_q{2.0, 20.0};
    PiGains gsc_i{0.83, 100.0};
};

/// Dynamic state of the aggregated machine. Converter responses are the
/// current-source lag states; outer loops carry one integrator each.
struct DfigState {
    double omega_r = 1.0;
    double int_rsc_p = 0.0;
    double int_rsc_q = 0.0;
    double int_gsc_vdc = 0.0;
    double int_gsc_q = 0.0;
    double i_p_lag = 0.0;   ///< stator active current
    double i_q_lag = 0.0;   ///< stator reactive current
    double i_qg_lag = 0.0;  ///< GSC reactive current
    double v_dc = 1.0;
};

struct DfigModel {
    MachineParams machine;
    TurbineParams turbine;
    ConverterParams conv;
    PiGainSet gains;
};

/// Normalized performance coefficient; unimodal with maximum 1 at lambda 1.
double cp_normalized(double lambda_n);

/// Tracking-curve power at the current rotor speed, capped at rating.
double mppt_power(double v_wind, double omega_r, const TurbineParams& tp);

/// Aerodynamic power captured at the current speed and wind.
double mech_power(double v_wind, double omega_r, const TurbineParams& tp);

/// Rotor speed at which the tracking curve balances the aerodynamic power.
double equilibrium_speed(double v_wind, const TurbineParams& tp);

/// Delivered electrical quantities at the terminal voltage.
struct ElectricalOutput {
    double p_s = 0.0;
    double q_s = 0.0;
    double q_g = 0.0;
    double p_gsc = 0.0;   ///< GSC active power to the grid
    double p_rotor = 0.0; ///< slip power into the DC link
    double p_farm = 0.0;  ///< p_s + p_gsc
    double q_farm = 0.0;  ///< q_s + q_g
};

ElectricalOutput electrical_output(const DfigModel& model, const DfigState& st, double v_s);

/// Time derivative of every state for the given references, terminal
/// voltage and wind. Saturates commands at the capability limits with
/// conditional-integration anti-windup; total as a function.
DfigState state_derivatives(const DfigModel& model, const DfigState& st,
                            const PowerReferences& refs, double v_s, double v_wind);

struct RotorQuantities {
    double i_r_mag = 0.0;
    double v_r_mag = 0.0;
};

/// Quasi-static rotor current and voltage magnitudes at the operating
/// point; rotor resistance neglected, symmetric leakage assumed.
RotorQuantities rotor_quantities(const MachineParams& m, const OperatingPoint& op, double slip);

}  // namespace hvrt
