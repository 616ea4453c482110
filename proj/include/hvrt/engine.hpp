#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hvrt/dynamics.hpp"
#include "hvrt/network.hpp"

namespace hvrt {

enum class Method { unit_pf, avc, pq_coordination };

constexpr std::string_view method_name(Method m) {
    switch (m) {
        case Method::unit_pf: return "unitpf";
        case Method::avc: return "avc";
        case Method::pq_coordination: return "pq";
    }
    return "?";
}

enum class EventKind { dc_bipolar_block, capacitor_trip, wind_step };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::dc_bipolar_block;
    double arg = 0.0;  ///< trip fraction or new wind speed
};

/// HVDC draw at the PCC before the block. p < 0 requests "match the farm
/// output"; q is q_ratio times the resolved active draw.
struct DcDraw {
    double p = -1.0;
    double q_ratio = 0.5;
};

struct Scenario {
    GridParams grid{0.5, 1.0, 0.5};  // SCR 2, q_c = 0.5
    MachineParams machine = table1_machine();
    TurbineParams turbine;
    ConverterParams conv;
    PiGainSet pi;
    HvrtParams hvrt;
    AvcParams avc;
    Method method = Method::pq_coordination;
    double v_wind = 12.0;
    std::vector<Event> events{{0.5, EventKind::dc_bipolar_block, 0.0}};
    double dt = 1e-3;
    double t_end = 3.0;
    DcDraw dc;

    void validate() const;
};

/// Uniformly sampled signals, one entry per channel per step.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> v_p;
    std::vector<double> p_dfig;
    std::vector<double> q_dfig;
    std::vector<double> omega_r;
    std::vector<double> v_dc;
    std::vector<double> i_r;
    std::vector<double> v_r;
    std::vector<ControlMode> mode;
    std::vector<double> q_s_ref;
    std::vector<double> q_g_ref;
    std::vector<double> p_s_ref;
    std::vector<double> k_de;

    size_t size() const { return t.size(); }
};

struct InitResult {
    DfigState state;
    GridParams adjusted;   ///< equivalent grid with the solved source folded in
    double v_e = 1.0;      ///< solved source magnitude
    double dc_p = 0.0;
    double dc_q = 0.0;
    double omega0 = 1.0;
    double p_mppt0 = 1.0;
};

/// Solves the source magnitude so the pre-event PCC voltage is exactly
/// 1 p.u. and places every state at its fixed point.
InitResult init_steady_state(const Scenario& sc);

struct EnergyAudit {
    double mech = 0.0;      ///< integrated mechanical input
    double elec = 0.0;      ///< integrated farm electrical output
    double ke_delta = 0.0;  ///< rotor kinetic energy change
    double dc_delta = 0.0;  ///< DC-link stored energy change
};

struct RunResult {
    TimeSeries ts;
    double max_eq1_residual = 0.0;
    double v_e = 1.0;
    GridParams final_grid;  ///< adjusted equivalent after all events
    PccInjection terminal_injection;
    double terminal_v_p = 0.0;
    EnergyAudit energy;
    std::vector<ModeTransition> transitions;
};

RunResult run(const Scenario& sc);

/// Mutates the live topology/draw/wind per the event kind.
void apply_event(const Event& ev, GridParams& physical, DcDraw& dc, double& v_wind);

struct RunMetrics {
    std::string label;
    double peak_v_p = 0.0;
    double settled_v_p = 0.0;    ///< mean over the trailing 0.5 s
    double time_to_band = 0.0;   ///< first time v stays below 1.1; NaN if never
    double peak_i_r = 0.0;
    double q_absorbed = 0.0;     ///< integral of absorbed reactive power
};

RunMetrics metrics_of(const std::string& label, const RunResult& rr, double band = 1.1);

/// Runs each labelled scenario and tabulates its metrics.
std::vector<RunMetrics> compare(const std::vector<std::pair<std::string, Scenario>>& scenarios);

/// Scalar network solve for mixed current-source and power-type injections:
/// farm currents (i_p, i_q) plus net constant powers (s_p, s_q) at the PCC.
double solve_terminal_voltage(const GridParams& adjusted, double i_p, double i_q, double s_p,
                              double s_q, double v_guess);

}  // namespace hvrt
