#include "hvrt/capability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hvrt {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double rotor_circle_radius(const MachineParams& m, double v_s) {
    return m.x_m * v_s * m.i_r_max / m.x_l;
}

/// Crossover between the rotor-current and capacity limits, when one exists
/// on the common feasible active power range.
double crossover_p0(const MachineParams& m, double v_s) {
    const double c1 = v_s * v_s / m.x_l;
    const double r1 = rotor_circle_radius(m, v_s);
    const double w = (m.s_n * m.s_n - c1 * c1 - r1 * r1) / (2.0 * c1);
    if (w < 0.0) return kNan;
    const double u = r1 * r1 - w * w;
    if (u < 0.0 || u > std::min(r1, m.s_n) * std::min(r1, m.s_n)) return kNan;
    return std::sqrt(u);
}

}  // namespace

void MachineParams::validate() const {
    require(x_m > 0.0 && x_ls > 0.0 && x_l > 0.0, Errc::invalid_param,
            "reactances must be positive");
    require(std::abs(x_l - (x_ls + x_m)) < 1e-12, Errc::invalid_param,
            "x_l must equal x_ls + x_m");
    require(s_n >= 1.0, Errc::invalid_param, "s_n below the active power base");
    require(s_c > 0.0, Errc::invalid_param, "s_c must be positive");
    require(i_r_max > 0.0, Errc::invalid_param, "i_r_max must be positive");
    require(k_de_max >= 0.0 && k_de_max < 1.0, Errc::invalid_param,
            "k_de_max must lie in [0, 1)");
}

void OperatingPoint::validate() const {
    require(p_s >= 0.0, Errc::invalid_param, "p_s must be non-negative");
    require(v_s >= 0.5 && v_s <= 1.5, Errc::invalid_param,
            "v_s outside the [0.5, 1.5] operating envelope");
}

MachineParams machine_from_si(const MachineSi& si) {
    require(si.n_machines > 0.0 && si.p_rated_mw > 0.0 && si.v_s_rated_v > 0.0,
            Errc::invalid_param, "SI ratings must be positive");
    require(si.power_factor > 0.0 && si.power_factor <= 1.0, Errc::invalid_param,
            "power factor must lie in (0, 1]");
    const double s_base_w = si.p_rated_mw * 1e6 / si.n_machines;
    const double z_base = si.v_s_rated_v * si.v_s_rated_v / s_base_w;
    const double i_base = s_base_w / (std::sqrt(3.0) * si.v_s_rated_v);

    MachineParams m;
    m.x_m = si.x_m_ohm / z_base;
    m.x_l = si.x_l_ohm / z_base;
    m.x_ls = m.x_l - m.x_m;
    m.i_r_max = si.i_r_max_a / i_base;
    m.s_n = 1.0 / si.power_factor;
    m.s_c = si.s_c_mva / si.p_rated_mw;
    m.validate();
    return m;
}

MachineParams table1_machine() { return machine_from_si(MachineSi{}); }

CapabilityLimits stator_limits(const MachineParams& m, const OperatingPoint& op) {
    m.validate();
    op.validate();
    const double r1 = rotor_circle_radius(m, op.v_s);
    require(op.p_s <= r1, Errc::infeasible_active_power,
            "p_s exceeds the rotor-current circle");
    require(op.p_s <= m.s_n, Errc::infeasible_active_power,
            "p_s exceeds the capacity circle");

    CapabilityLimits lim;
    lim.q_s1_max = op.v_s * op.v_s / m.x_l + std::sqrt(r1 * r1 - op.p_s * op.p_s);
    lim.q_s2_max = std::sqrt(m.s_n * m.s_n - op.p_s * op.p_s);
    lim.q_s_max = std::min(lim.q_s1_max, lim.q_s2_max);
    lim.q_g_max = gsc_limit(m, op);
    lim.q_total_max = lim.q_s_max + lim.q_g_max;
    lim.q_s_deload_max = lim.q_s_max;
    lim.q_total_deload_max = lim.q_total_max;
    lim.p_0 = crossover_p0(m, op.v_s);
    return lim;
}

double gsc_limit(const MachineParams& m, const OperatingPoint& op) {
    m.validate();
    const double eq7 = [&] {
        if (m.gsc_neglect_slip) return m.s_c;
        const double sp = m.slip * op.p_s;
        require(std::abs(sp) <= m.s_c, Errc::infeasible_active_power,
                "slip power exceeds GSC capacity");
        return std::sqrt(m.s_c * m.s_c - sp * sp);
    }();
    return m.q_g_cap > 0.0 ? std::min(m.q_g_cap, eq7) : eq7;
}

double total_limit(const MachineParams& m, const OperatingPoint& op) {
    return stator_limits(m, op).q_total_max;
}

CapabilityLimits deload_limits(const MachineParams& m, const OperatingPoint& op, double k_de) {
    require(k_de >= 0.0 && k_de <= m.k_de_max, Errc::deload_out_of_range,
            "k_de outside [0, k_de_max]");
    CapabilityLimits lim = stator_limits(m, op);
    OperatingPoint deloaded = op;
    deloaded.p_s = (1.0 - k_de) * op.p_s;
    const CapabilityLimits at_deload = stator_limits(m, deloaded);
    lim.q_s_deload_max = at_deload.q_s_max;
    lim.q_total_deload_max = at_deload.q_s_max + lim.q_g_max;
    return lim;
}

PRefResult p_ref_from_q_ref(const MachineParams& m, double q_s_ref, double v_s, double p_mppt) {
    m.validate();
    require(p_mppt >= 0.0, Errc::invalid_param, "p_mppt must be non-negative");
    const double r1 = rotor_circle_radius(m, v_s);
    const double center = v_s * v_s / m.x_l;  // rotor circle center at q = -center
    const double off = q_s_ref + center;
    require(std::abs(q_s_ref) <= m.s_n, Errc::infeasible_reactive_demand,
            "reactive demand beyond the capacity circle");
    require(std::abs(off) <= r1, Errc::infeasible_reactive_demand,
            "reactive demand beyond the rotor-current circle");

    const double p_sr_max = std::sqrt(r1 * r1 - off * off);
    const double p_s_max = std::sqrt(m.s_n * m.s_n - q_s_ref * q_s_ref);

    PRefResult res;
    res.p_s_ref = std::min(p_sr_max, p_s_max);
    res.binding = p_sr_max <= p_s_max ? PRefBinding::rotor_circle : PRefBinding::capacity;
    if (res.p_s_ref >= p_mppt) {
        res.p_s_ref = p_mppt;
        res.binding = PRefBinding::mppt;
    }
    res.k_de = p_mppt > 0.0 ? 1.0 - res.p_s_ref / p_mppt : 0.0;
    if (res.k_de > m.k_de_max) {
        res.p_s_ref = (1.0 - m.k_de_max) * p_mppt;
        res.k_de = m.k_de_max;
        res.binding = PRefBinding::clamped;
    }
    const OperatingPoint at{.p_s = res.p_s_ref, .q_s = 0.0, .v_s = v_s};
    res.achievable_q_abs = stator_limits(m, at).q_s_max;
    return res;
}

double RotorCurrent::mag() const { return std::hypot(d, q); }

RotorCurrent rotor_current_from_pq(const MachineParams& m, const OperatingPoint& op) {
    m.validate();
    require(op.v_s > 0.0, Errc::invalid_param, "v_s must be positive");
    RotorCurrent ir;
    ir.d = (op.v_s + m.x_l * op.q_s / op.v_s) / m.x_m;
    ir.q = -op.p_s * m.x_l / (op.v_s * m.x_m);
    return ir;
}

OperatingPoint pq_from_rotor_current(const MachineParams& m, double i_rd, double i_rq, double v_s) {
    require(v_s > 0.0, Errc::invalid_param, "v_s must be positive");
    OperatingPoint op;
    op.v_s = v_s;
    op.p_s = -i_rq * v_s * m.x_m / m.x_l;
    op.q_s = (m.x_m * i_rd - v_s) * v_s / m.x_l;
    return op;
}

double rotor_circle_margin(const MachineParams& m, double p_s, double q_s, double v_s) {
    const double r1 = rotor_circle_radius(m, v_s);
    const double off = q_s + v_s * v_s / m.x_l;
    return r1 * r1 - p_s * p_s - off * off;
}

double capacity_margin(const MachineParams& m, double p_s, double q_s) {
    return m.s_n * m.s_n - p_s * p_s - q_s * q_s;
}

std::vector<CapabilityRow> capability_grid(const MachineParams& m, const AxisSpec& p_axis,
                                           const AxisSpec& v_axis, const AxisSpec& k_axis) {
    auto points = [](const AxisSpec& ax) {
        require(ax.n >= 1, Errc::invalid_param, "axis needs at least one point");
        std::vector<double> pts(static_cast<size_t>(ax.n));
        for (int i = 0; i < ax.n; ++i)
            pts[static_cast<size_t>(i)] =
                ax.n == 1 ? ax.lo : ax.lo + (ax.hi - ax.lo) * i / (ax.n - 1);
        return pts;
    };
    std::vector<CapabilityRow> rows;
    for (double k : points(k_axis))
        for (double v : points(v_axis))
            for (double p : points(p_axis)) {
                CapabilityRow row;
                row.p_s = p;
                row.v_s = v;
                row.k_de = k;
                OperatingPoint op{p, 0.0, v, 12.0};
                row.limits = deload_limits(m, op, k);
                rows.push_back(row);
            }
    return rows;
}

}  // namespace hvrt
