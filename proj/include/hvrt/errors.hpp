#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hvrt {

enum class Errc {
    invalid_param,
    no_real_solution,
    degenerate_network,
    singular_sensitivity,
    infeasible_active_power,
    deload_out_of_range,
    infeasible_reactive_demand,
    exceeds_stage1_limit,
    invalid_thresholds,
    outside_wind_range,
    no_feasible_init,
    numeric_blowup,
    unknown_event,
    parse_error,
    schema_error,
};

constexpr std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_param: return "InvalidParam";
        case Errc::no_real_solution: return "NoRealSolution";
        case Errc::degenerate_network: return "DegenerateNetwork";
        case Errc::singular_sensitivity: return "SingularSensitivity";
        case Errc::infeasible_active_power: return "InfeasibleActivePower";
        case Errc::deload_out_of_range: return "DeloadOutOfRange";
        case Errc::infeasible_reactive_demand: return "InfeasibleReactiveDemand";
        case Errc::exceeds_stage1_limit: return "ExceedsStage1Limit";
        case Errc::invalid_thresholds: return "InvalidThresholds";
        case Errc::outside_wind_range: return "OutsideWindRange";
        case Errc::no_feasible_init: return "NoFeasibleInit";
        case Errc::numeric_blowup: return "NumericBlowup";
        case Errc::unknown_event: return "UnknownEvent";
        case Errc::parse_error: return "ParseError";
        case Errc::schema_error: return "SchemaError";
    }
    return "UnknownError";
}

/// Exception carrying a machine-readable error code alongside the message.
class SimError : public std::runtime_error {
public:
    SimError(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

    /// true for errors caused by bad configuration rather than numerics
    bool is_config_error() const noexcept {
        return code_ == Errc::parse_error || code_ == Errc::schema_error;
    }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw SimError(code, msg); }

inline void require(bool ok, Errc code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

}  // namespace hvrt
