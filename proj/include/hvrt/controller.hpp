#pragma once

#include <string_view>
#include <vector>

#include "hvrt/capability.hpp"

namespace hvrt {

enum class GainBasis { total, stator };

enum class ControlMode { normal, stage1, stage2, saturated };

constexpr std::string_view mode_name(ControlMode m) {
    switch (m) {
        case ControlMode::normal: return "normal";
        case ControlMode::stage1: return "stage1";
        case ControlMode::stage2: return "stage2";
        case ControlMode::saturated: return "saturated";
    }
    return "?";
}

/// Outer-loop power references. Reactive references are signed and stay
/// non-positive while ride-through is active.
struct PowerReferences {
    double q_s_ref = 0.0;
    double q_g_ref = 0.0;
    double p_s_ref = 0.0;
    ControlMode mode = ControlMode::normal;
    double k_de = 0.0;
};

struct HvrtParams {
    double v_ov_min = 1.1;   ///< ride-through activation voltage
    double v_ov1 = 1.15;     ///< de-loading trigger voltage
    double v_ov_max = 1.3;
    double k1 = 0.0;         ///< first-band droop slope
    double k2 = 0.0;         ///< second-band droop slope
    GainBasis gain_basis = GainBasis::total;
    CapabilityLimits limits;
    double hysteresis = 0.01;     ///< release band below v_ov_min
    double release_rate = 0.5;    ///< p.u./s ramp back to MPPT after the event

    void validate() const;
};

struct Gains {
    double k1 = 0.0;
    double k2 = 0.0;
};

/// Droop slopes from the capability spread across the voltage bands. The
/// stator basis replaces the total limit with the stator one, matching the
/// published operating table.
Gains compute_gains(const CapabilityLimits& limits, const HvrtParams& hp);

/// Total absorption demand (magnitude) of the piecewise Q-V rule.
double q_demand(double v_p, const HvrtParams& hp);

/// First-band split, proportional to the per-path limits.
PowerReferences split_stage1(double total_q, const CapabilityLimits& limits);

/// Second-band split: stator takes the slope, GSC pins at its limit.
PowerReferences split_stage2(double v_p, const HvrtParams& hp);

/// Piecewise P-V rule; the middle band projects the active power onto the
/// feasible region for the stage-2 reactive reference.
double p_demand(double v_p, double p_mppt, const HvrtParams& hp, const MachineParams& m);

struct ModeTransition {
    double t = 0.0;
    ControlMode from = ControlMode::normal;
    ControlMode to = ControlMode::normal;
};

/// Coordinated P-Q ride-through controller. Re-evaluates the capability
/// snapshot and droop gains every sample, then produces stage-appropriate
/// references. Single-owner sequential state.
class PqCoordinationController {
public:
    PqCoordinationController(const MachineParams& m, const HvrtParams& base);

    PowerReferences step(double v_p, double p_mppt, double dt);

    bool hvrt_active() const { return active_; }
    bool voltage_satisfied() const { return satisfied_; }
    bool max_deload_reached() const { return max_deload_; }
    ControlMode mode() const { return mode_; }
    const HvrtParams& params() const { return hp_; }
    const std::vector<ModeTransition>& transitions() const { return transitions_; }

private:
    MachineParams machine_;
    HvrtParams hp_;
    bool active_ = false;
    bool satisfied_ = false;
    bool max_deload_ = false;
    ControlMode mode_ = ControlMode::normal;
    double p_release_ = -1.0;  ///< ramp state while recovering to MPPT
    double t_ = 0.0;
    std::vector<ModeTransition> transitions_;
};

/// Method 1 baseline: unit power factor, no reactive response.
PowerReferences baseline_unit_pf(double p_mppt);

struct AvcParams {
    double kp = 2.0;
    double ki = 20.0;
    double setpoint = 1.0;
};

/// Method 2 baseline: PI voltage regulation at the PCC with clamping
/// anti-windup at the total reactive limit, no de-loading.
class AvcController {
public:
    AvcController(const MachineParams& m, const AvcParams& params);

    PowerReferences step(double v_p, double p_mppt, double dt);

    double integrator() const { return integ_; }

private:
    MachineParams machine_;
    AvcParams params_;
    double integ_ = 0.0;
};

}  // namespace hvrt
