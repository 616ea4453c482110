#include "hvrt/controller.hpp"

#include <algorithm>
#include <cmath>

namespace hvrt {

void HvrtParams::validate() const {
    require(v_ov_min < v_ov1 && v_ov1 < v_ov_max, Errc::invalid_thresholds,
            "thresholds must satisfy v_ov_min < v_ov1 < v_ov_max");
    require(k1 >= 0.0 && k2 >= 0.0, Errc::invalid_thresholds, "gains must be non-negative");
    require(hysteresis >= 0.0 && release_rate >= 0.0, Errc::invalid_param,
            "hysteresis and release rate must be non-negative");
}

Gains compute_gains(const CapabilityLimits& limits, const HvrtParams& hp) {
    require(hp.v_ov_min < hp.v_ov1 && hp.v_ov1 < hp.v_ov_max, Errc::invalid_thresholds,
            "thresholds must satisfy v_ov_min < v_ov1 < v_ov_max");
    const double base =
        hp.gain_basis == GainBasis::total ? limits.q_total_max : limits.q_s_max;
    Gains g;
    g.k1 = base / (hp.v_ov1 - hp.v_ov_min);
    g.k2 = (limits.q_total_deload_max - base) / (hp.v_ov_max - hp.v_ov1);
    return g;
}

double q_demand(double v_p, const HvrtParams& hp) {
    require(v_p > 0.0, Errc::invalid_param, "v_p must be positive");
    if (v_p <= hp.v_ov_min) return 0.0;
    if (v_p <= hp.v_ov1) return hp.k1 * (v_p - hp.v_ov_min);
    if (v_p <= hp.v_ov_max) return hp.limits.q_total_max + hp.k2 * (v_p - hp.v_ov1);
    return hp.limits.q_total_deload_max;
}

PowerReferences split_stage1(double total_q, const CapabilityLimits& limits) {
    require(total_q >= 0.0, Errc::invalid_param, "stage-1 demand must be a magnitude");
    require(total_q <= limits.q_total_max + 1e-12, Errc::exceeds_stage1_limit,
            "demand beyond the stage-1 total limit");
    PowerReferences refs;
    refs.mode = ControlMode::stage1;
    if (limits.q_total_max > 0.0) {
        refs.q_s_ref = signed_absorption(limits.q_s_max / limits.q_total_max * total_q);
        refs.q_g_ref = signed_absorption(limits.q_g_max / limits.q_total_max * total_q);
    }
    return refs;
}

PowerReferences split_stage2(double v_p, const HvrtParams& hp) {
    require(v_p > hp.v_ov1, Errc::invalid_param, "stage 2 starts above v_ov1");
    PowerReferences refs;
    refs.mode = ControlMode::stage2;
    const double q_s = std::min(hp.limits.q_s_max + hp.k2 * (v_p - hp.v_ov1),
                                hp.limits.q_s_deload_max);
    refs.q_s_ref = signed_absorption(q_s);
    refs.q_g_ref = signed_absorption(hp.limits.q_g_max);
    return refs;
}

double p_demand(double v_p, double p_mppt, const HvrtParams& hp, const MachineParams& m) {
    require(p_mppt > 0.0, Errc::invalid_param, "p_mppt must be positive");
    if (v_p <= hp.v_ov1) return p_mppt;
    if (v_p > hp.v_ov_max) return (1.0 - m.k_de_max) * p_mppt;
    const PowerReferences q_refs = split_stage2(v_p, hp);
    const double v_s = std::clamp(v_p, 0.5, 1.5);
    return p_ref_from_q_ref(m, q_refs.q_s_ref, v_s, p_mppt).p_s_ref;
}

PqCoordinationController::PqCoordinationController(const MachineParams& m, const HvrtParams& base)
    : machine_(m), hp_(base) {
    machine_.validate();
    hp_.validate();
}

PowerReferences PqCoordinationController::step(double v_p, double p_mppt, double dt) {
    require(v_p > 0.0 && p_mppt > 0.0 && dt > 0.0, Errc::invalid_param,
            "controller inputs must be positive");

    // Capability snapshot refresh at the measured operating point.
    const double v_s = std::clamp(v_p, 0.5, 1.5);
    const OperatingPoint op{.p_s = p_mppt, .q_s = 0.0, .v_s = v_s};
    hp_.limits = deload_limits(machine_, op, machine_.k_de_max);
    const Gains g = compute_gains(hp_.limits, hp_);
    hp_.k1 = g.k1;
    hp_.k2 = g.k2;

    if (!active_ && v_p > hp_.v_ov_min) {
        active_ = true;
        satisfied_ = false;
    } else if (active_ && v_p <= hp_.v_ov_min - hp_.hysteresis) {
        active_ = false;
        satisfied_ = true;
    }

    PowerReferences refs;
    if (!active_) {
        refs.mode = ControlMode::normal;
        if (p_release_ >= 0.0 && p_release_ < p_mppt) {
            p_release_ = std::min(p_mppt, p_release_ + hp_.release_rate * dt);
            refs.p_s_ref = p_release_;
            if (p_release_ >= p_mppt) p_release_ = -1.0;
        } else {
            p_release_ = -1.0;
            refs.p_s_ref = p_mppt;
        }
    } else if (v_p <= hp_.v_ov1) {
        refs = split_stage1(q_demand(v_p, hp_), hp_.limits);
        refs.p_s_ref = p_mppt;
        p_release_ = refs.p_s_ref;
    } else if (v_p <= hp_.v_ov_max) {
        refs = split_stage2(v_p, hp_);
        refs.p_s_ref = p_ref_from_q_ref(machine_, refs.q_s_ref, v_s, p_mppt).p_s_ref;
        p_release_ = refs.p_s_ref;
    } else {
        refs.mode = ControlMode::saturated;
        refs.q_s_ref = signed_absorption(hp_.limits.q_s_deload_max);
        refs.q_g_ref = signed_absorption(hp_.limits.q_g_max);
        refs.p_s_ref = (1.0 - machine_.k_de_max) * p_mppt;
        p_release_ = refs.p_s_ref;
    }
    refs.k_de = p_mppt > 0.0 ? std::max(0.0, 1.0 - refs.p_s_ref / p_mppt) : 0.0;
    max_deload_ = max_deload_ || refs.k_de >= machine_.k_de_max - 1e-12;

    if (refs.mode != mode_) {
        transitions_.push_back({t_, mode_, refs.mode});
        mode_ = refs.mode;
    }
    t_ += dt;
    return refs;
}

PowerReferences baseline_unit_pf(double p_mppt) {
    PowerReferences refs;
    refs.p_s_ref = p_mppt;
    return refs;
}

AvcController::AvcController(const MachineParams& m, const AvcParams& params)
    : machine_(m), params_(params) {
    machine_.validate();
}

PowerReferences AvcController::step(double v_p, double p_mppt, double dt) {
    require(v_p > 0.0 && dt > 0.0, Errc::invalid_param, "controller inputs must be positive");
    const double v_s = std::clamp(v_p, 0.5, 1.5);
    const OperatingPoint op{.p_s = p_mppt, .q_s = 0.0, .v_s = v_s};
    const CapabilityLimits limits = stator_limits(machine_, op);

    const double err = params_.setpoint - v_p;
    const double unsat = params_.kp * err + integ_;
    const double total = std::clamp(unsat, -limits.q_total_max, limits.q_total_max);
    const bool push_deeper = (unsat > total && err > 0.0) || (unsat < total && err < 0.0);
    if (!push_deeper) integ_ += params_.ki * err * dt;  // clamping anti-windup

    PowerReferences refs;
    refs.p_s_ref = p_mppt;
    if (limits.q_total_max > 0.0) {
        refs.q_s_ref = limits.q_s_max / limits.q_total_max * total;
        refs.q_g_ref = limits.q_g_max / limits.q_total_max * total;
    }
    return refs;
}

}  // namespace hvrt
