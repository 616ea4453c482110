#pragma once

#include <vector>

#include "hvrt/errors.hpp"

namespace hvrt {

/// DFIG electrical constants and ratings, per unit on the generator power
/// base (rated active power) with rated stator voltage as voltage base.
struct MachineParams {
    double s_n = 0.0;       ///< apparent power capacity
    double s_c = 0.0;       ///< GSC apparent power capacity
    double x_m = 0.0;       ///< magnetizing reactance
    double x_ls = 0.0;      ///< stator leakage reactance
    double x_l = 0.0;       ///< stator inductance, x_ls + x_m
    double r_s = 0.0;       ///< stator resistance (validation only)
    double i_r_max = 0.0;   ///< rotor current limit
    double k_de_max = 0.2;  ///< maximum de-loading coefficient
    double slip = 0.0;      ///< operating slip
    bool gsc_neglect_slip = true;  ///< approximate the GSC limit by s_c
    double q_g_cap = 0.25;  ///< operating GSC reactive cap; <= 0 derives it from s_c

    void validate() const;
};

/// Table-1 test system parameters as published, SI units. The electrical
/// constants are per machine; n_machines sets the per-machine power base.
struct MachineSi {
    double v_s_rated_v = 690.0;
    double f_base_hz = 50.0;
    double p_rated_mw = 150.0;
    double power_factor = 0.9;
    double s_c_mva = 50.0;
    double x_m_ohm = 2.06;
    double x_l_ohm = 2.24;
    double i_r_max_a = 1600.0;
    double n_machines = 100.0;
};

/// Documented base conversion: power base = p_rated / n_machines, voltage
/// base = rated stator voltage. Amplitude-invariant dq on this base absorbs
/// the published 3/2 factors.
MachineParams machine_from_si(const MachineSi& si);

/// Convenience: the default machine, converted from Table-1 values.
MachineParams table1_machine();

struct OperatingPoint {
    double p_s = 0.0;     ///< stator active power, >= 0
    double q_s = 0.0;     ///< stator reactive power, signed (negative absorbs)
    double v_s = 1.0;     ///< stator voltage magnitude
    double v_wind = 12.0; ///< wind speed, m/s

    void validate() const;
};

/// Inductive (absorption) limits. All q_* fields are absorption magnitudes.
struct CapabilityLimits {
    double q_s1_max = 0.0;   ///< rotor-current circle limit
    double q_s2_max = 0.0;   ///< capacity circle limit
    double q_s_max = 0.0;    ///< min of the two
    double q_g_max = 0.0;    ///< GSC limit
    double q_total_max = 0.0;
    double q_s_deload_max = 0.0;   ///< stator limit at the de-loaded power
    double q_total_deload_max = 0.0;
    double p_0 = 0.0;        ///< binding-constraint crossover; NaN when absent
};

/// Sign convention bridge: limits are absorption magnitudes, operating
/// quantities are signed with absorption negative.
inline double absorption_of(double q_signed) { return -q_signed; }
inline double signed_absorption(double magnitude) { return -magnitude; }

/// Stator absorption limits at the given operating point.
CapabilityLimits stator_limits(const MachineParams& m, const OperatingPoint& op);

/// GSC limit from its apparent capacity and slip power.
double gsc_limit(const MachineParams& m, const OperatingPoint& op);

/// Total inductive limit q_s_max + q_g_max.
double total_limit(const MachineParams& m, const OperatingPoint& op);

/// Limits with the stator re-evaluated at p = (1 - k_de) * op.p_s, where
/// op.p_s is the MPPT power. Baseline fields are kept for comparison.
CapabilityLimits deload_limits(const MachineParams& m, const OperatingPoint& op, double k_de);

enum class PRefBinding { none, rotor_circle, capacity, mppt, clamped };

struct PRefResult {
    double p_s_ref = 0.0;
    double k_de = 0.0;
    PRefBinding binding = PRefBinding::none;
    double achievable_q_abs = 0.0;  ///< |q_s| reachable at p_s_ref
};

/// Largest active power compatible with the requested stator reactive
/// reference; clamps the implied de-loading at k_de_max.
PRefResult p_ref_from_q_ref(const MachineParams& m, double q_s_ref, double v_s, double p_mppt);

struct RotorCurrent {
    double d = 0.0;
    double q = 0.0;
    double mag() const;
};

/// Rotor current (stator-flux oriented frame) delivering the stator (p, q)
/// at voltage v_s, quasi-static.
RotorCurrent rotor_current_from_pq(const MachineParams& m, const OperatingPoint& op);

/// Inverse map, used by validation sweeps.
OperatingPoint pq_from_rotor_current(const MachineParams& m, double i_rd, double i_rq, double v_s);

/// Margin of the rotor-current constraint in signed convention; >= 0 inside.
double rotor_circle_margin(const MachineParams& m, double p_s, double q_s, double v_s);

/// Margin of the capacity constraint; >= 0 inside.
double capacity_margin(const MachineParams& m, double p_s, double q_s);

struct AxisSpec {
    double lo = 0.0;
    double hi = 0.0;
    int n = 1;
};

struct CapabilityRow {
    double p_s = 0.0;
    double v_s = 0.0;
    double k_de = 0.0;
    CapabilityLimits limits;
};

/// Rectangular grid of limits over (p_s, v_s, k_de) for export and plotting.
std::vector<CapabilityRow> capability_grid(const MachineParams& m, const AxisSpec& p_axis,
                                           const AxisSpec& v_axis, const AxisSpec& k_axis);

}  // namespace hvrt
