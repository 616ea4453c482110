#include "hvrt/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace hvrt {

namespace {

constexpr double kVFloor = 0.2;  // keeps current conversions bounded through deep sags

double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

}  // namespace

void TurbineParams::validate() const {
    require(h > 0.0, Errc::invalid_param, "inertia must be positive");
    require(v_rate > 0.0 && k_opt > 0.0 && aero_scale > 0.0, Errc::invalid_param,
            "turbine constants must be positive");
    require(omega_min > 0.0 && omega_min < omega_max, Errc::invalid_param,
            "rotor speed bounds must be ordered");
    require(cut_in > 0.0 && cut_in < cut_out, Errc::invalid_param,
            "wind range bounds must be ordered");
}

double cp_normalized(double lambda_n) {
    if (lambda_n <= 0.0) return 0.0;
    return lambda_n * std::exp(1.0 - lambda_n);
}

double mppt_power(double v_wind, double omega_r, const TurbineParams& tp) {
    tp.validate();
    require(v_wind >= tp.cut_in && v_wind <= tp.cut_out, Errc::outside_wind_range,
            "wind speed outside the configured range");
    return std::min(tp.k_opt * omega_r * omega_r * omega_r, 1.0);
}

double mech_power(double v_wind, double omega_r, const TurbineParams& tp) {
    tp.validate();
    require(v_wind >= tp.cut_in && v_wind <= tp.cut_out, Errc::outside_wind_range,
            "wind speed outside the configured range");
    const double u = v_wind / tp.v_rate;
    const double lambda_n = omega_r / u;
    return tp.aero_scale * u * u * u * cp_normalized(lambda_n);
}

double equilibrium_speed(double v_wind, const TurbineParams& tp) {
    tp.validate();
    // Torque balance with the stator-referenced tracking command: the
    // electromagnetic torque is the stator power, so the rotor settles
    // where mech(v, w) = w * mppt(w).
    auto f = [&](double w) { return mech_power(v_wind, w, tp) - w * mppt_power(v_wind, w, tp); };
    const double omega_opt = v_wind / tp.v_rate;
    if (omega_opt >= tp.omega_min && omega_opt <= tp.omega_max && f(omega_opt) == 0.0)
        return omega_opt;  // rated point balances exactly
    double lo = tp.omega_min, hi = tp.omega_max;
    if (f(lo) < 0.0 || f(hi) > 0.0) {
        if (std::abs(f(lo)) < 1e-9) return lo;
        if (std::abs(f(hi)) < 1e-9) return hi;
        fail(Errc::no_feasible_init, "no rotor speed balances the tracking curve");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ElectricalOutput electrical_output(const DfigModel& model, const DfigState& st, double v_s) {
    ElectricalOutput out;
    out.p_s = v_s * st.i_p_lag;
    out.q_s = v_s * st.i_q_lag;
    out.q_g = v_s * st.i_qg_lag;
    const double e_v = st.v_dc - model.conv.v_dc_ref;
    out.p_gsc = std::clamp(model.gains.gsc_vdc.kp * e_v + st.int_gsc_vdc,
                           -model.machine.s_c, model.machine.s_c);
    out.p_rotor = (st.omega_r - 1.0) * out.p_s;
    out.p_farm = out.p_s + out.p_gsc;
    out.q_farm = out.q_s + out.q_g;
    return out;
}

DfigState state_derivatives(const DfigModel& model, const DfigState& st,
                            const PowerReferences& refs, double v_s, double v_wind) {
    const MachineParams& m = model.machine;
    const ElectricalOutput out = electrical_output(model, st, v_s);
    const double vg = std::max(v_s, kVFloor);

    DfigState d{};

    // Swing: electromagnetic power is omega * p_s (stator plus slip power).
    const double p_m = mech_power(v_wind, st.omega_r, model.turbine);
    const double omega = std::max(st.omega_r, 0.1);
    d.omega_r = (p_m / omega - out.p_s) / (2.0 * model.turbine.h);

    // Stator reactive: PI on power error, command clamped to the stator
    // absorption limit at the commanded active power.
    const double v_env = std::clamp(v_s, 0.5, 1.5);
    const double p_for_limit = std::clamp(refs.p_s_ref, 0.0,
                                          m.x_m * v_env * m.i_r_max / m.x_l);
    const OperatingPoint lim_op{.p_s = std::min(p_for_limit, m.s_n), .q_s = 0.0, .v_s = v_env};
    const double q_s_lim = stator_limits(m, lim_op).q_s_max;
    const double e_qs = refs.q_s_ref - out.q_s;
    double u_qs = model.gains.rsc_q.kp * e_qs + st.int_rsc_q;
    const double u_qs_sat = std::clamp(u_qs, -q_s_lim, q_s_lim);
    d.int_rsc_q = (u_qs == u_qs_sat || (u_qs > u_qs_sat) == (e_qs < 0.0))
                      ? model.gains.rsc_q.ki * e_qs
                      : 0.0;

    // Stator active: PI on power error, command projected into both circles
    // at the saturated reactive command.
    const double e_p = refs.p_s_ref - out.p_s;
    double u_p = model.gains.rsc_p.kp * e_p + st.int_rsc_p;
    const double p_cap = std::min(safe_sqrt(rotor_circle_margin(m, 0.0, u_qs_sat, v_env)),
                                  safe_sqrt(capacity_margin(m, 0.0, u_qs_sat)));
    const double u_p_sat = std::clamp(u_p, 0.0, p_cap);
    d.int_rsc_p = (u_p == u_p_sat || (u_p > u_p_sat) == (e_p < 0.0))
                      ? model.gains.rsc_p.ki * e_p
                      : 0.0;

    // GSC reactive: PI clamped by the live apparent-capacity circle.
    const double q_g_lim = std::min(m.q_g_cap > 0.0 ? m.q_g_cap : m.s_c,
                                    safe_sqrt(m.s_c * m.s_c - out.p_gsc * out.p_gsc));
    const double e_qg = refs.q_g_ref - out.q_g;
    double u_qg = model.gains.gsc_q.kp * e_qg + st.int_gsc_q;
    const double u_qg_sat = std::clamp(u_qg, -q_g_lim, q_g_lim);
    d.int_gsc_q = (u_qg == u_qg_sat || (u_qg > u_qg_sat) == (e_qg < 0.0))
                      ? model.gains.gsc_q.ki * e_qg
                      : 0.0;

    // DC-link voltage loop integrator; the proportional path acts in
    // electrical_output at the same sample.
    const double e_v = st.v_dc - model.conv.v_dc_ref;
    d.int_gsc_vdc = model.gains.gsc_vdc.ki * e_v;

    // Converter current lags toward the saturated commands.
    d.i_p_lag = (u_p_sat / vg - st.i_p_lag) / model.conv.tau_c;
    d.i_q_lag = (u_qs_sat / vg - st.i_q_lag) / model.conv.tau_c;
    d.i_qg_lag = (u_qg_sat / vg - st.i_qg_lag) / model.conv.tau_c;

    // DC link energy balance.
    d.v_dc = (out.p_rotor - out.p_gsc) / (model.conv.c_dc * std::max(st.v_dc, kVFloor));

    return d;
}

RotorQuantities rotor_quantities(const MachineParams& m, const OperatingPoint& op, double slip) {
    const RotorCurrent ir = rotor_current_from_pq(m, op);

    // Motor-frame currents for the flux algebra (the reporting frame flips
    // the q axis).
    const double i_rd = ir.d;
    const double i_rq = -ir.q;
    const double i_sd = (op.v_s - m.x_m * i_rd) / m.x_l;
    const double i_sq = -(m.x_m / m.x_l) * i_rq;

    // Symmetric leakage: rotor self-inductance taken equal to x_l.
    const double psi_rd = m.x_l * i_rd + m.x_m * i_sd;
    const double psi_rq = m.x_l * i_rq + m.x_m * i_sq;

    RotorQuantities rq;
    rq.i_r_mag = ir.mag();
    rq.v_r_mag = std::abs(slip) * std::hypot(psi_rd, psi_rq);
    return rq;
}

}  // namespace hvrt
