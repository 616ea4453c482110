#include "hvrt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace hvrt {

namespace {

bool on_grid(double t, double dt) {
    const double k = t / dt;
    return std::abs(k - std::round(k)) < 1e-9;
}

// KCL magnitude equation with the source folded to 1 p.u., normalized by
// V^2 so pure current injections do not leave a spurious root at zero:
// (V (1 - g x) - x i_q - x s_q / V)^2 + (x i_p + x s_p / V)^2 - 1 = 0,
// with net power-type injections (s_p, s_q) and farm currents (i_p, i_q).
struct NodeEquation {
    double x, g, i_p, i_q, s_p, s_q;

    double f(double v) const {
        const double a = v * (1.0 - g * x) - x * i_q - x * s_q / v;
        const double b = x * i_p + x * s_p / v;
        return a * a + b * b - 1.0;
    }
    double df(double v) const {
        const double a = v * (1.0 - g * x) - x * i_q - x * s_q / v;
        const double b = x * i_p + x * s_p / v;
        const double da = (1.0 - g * x) + x * s_q / (v * v);
        const double db = -x * s_p / (v * v);
        return 2.0 * a * da + 2.0 * b * db;
    }
};

}  // namespace

double solve_terminal_voltage(const GridParams& adjusted, double i_p, double i_q, double s_p,
                              double s_q, double v_guess) {
    const NodeEquation eq{adjusted.x_e, adjusted.g_c, i_p, i_q, s_p, s_q};
    constexpr double kVLo = 1e-3, kVHi = 50.0;

    double v = std::clamp(v_guess, 0.05, kVHi);
    for (int it = 0; it < 60; ++it) {
        const double f = eq.f(v);
        const double d = eq.df(v);
        if (d == 0.0) break;
        double vn = v - f / d;
        if (!(vn > kVLo) || vn > kVHi) break;
        if (std::abs(vn - v) < 1e-14 * std::max(1.0, v)) {
            if (std::abs(eq.f(vn)) < 1e-10) return vn;
            break;
        }
        v = vn;
    }
    // Newton stalled or wandered: bracket the root nearest the guess and bisect.
    const int kScan = 20000;
    double best_lo = -1.0, best_hi = -1.0, best_dist = 1e30;
    double prev_v = kVLo, prev_f = eq.f(prev_v);
    for (int i = 1; i <= kScan; ++i) {
        const double vi = kVLo + (kVHi - kVLo) * i / kScan;
        const double fi = eq.f(vi);
        if ((prev_f <= 0.0) != (fi <= 0.0)) {
            const double mid = 0.5 * (prev_v + vi);
            const double dist = std::abs(mid - v_guess);
            if (dist < best_dist) {
                best_dist = dist;
                best_lo = prev_v;
                best_hi = vi;
            }
        }
        prev_v = vi;
        prev_f = fi;
    }
    require(best_lo > 0.0, Errc::no_real_solution, "terminal voltage equation has no root");
    double lo = best_lo, hi = best_hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((eq.f(lo) <= 0.0) == (eq.f(mid) <= 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void Scenario::validate() const {
    grid.validate();
    machine.validate();
    turbine.validate();
    hvrt.validate();
    require(dt > 0.0 && t_end > dt, Errc::invalid_param, "dt and t_end must be positive");
    require(v_wind >= turbine.cut_in && v_wind <= turbine.cut_out, Errc::outside_wind_range,
            "scenario wind speed outside the configured range");
    int blocks = 0;
    double prev = 0.0;
    for (const Event& ev : events) {
        require(ev.time > 0.0 && ev.time <= t_end, Errc::invalid_param,
                "event times must lie inside (0, t_end]");
        require(on_grid(ev.time, dt), Errc::invalid_param, "dt must divide event times");
        require(ev.time >= prev, Errc::invalid_param, "events must be sorted by time");
        prev = ev.time;
        if (ev.kind == EventKind::dc_bipolar_block) ++blocks;
        if (ev.kind == EventKind::capacitor_trip)
            require(ev.arg >= 0.0 && ev.arg <= 1.0, Errc::invalid_param,
                    "trip fraction must lie in [0, 1]");
        if (ev.kind == EventKind::wind_step)
            require(ev.arg >= turbine.cut_in && ev.arg <= turbine.cut_out,
                    Errc::outside_wind_range, "wind step outside the configured range");
    }
    require(blocks <= 1, Errc::invalid_param, "at most one block event per scenario");
    require(dc.q_ratio >= 0.0, Errc::invalid_param, "dc reactive ratio must be non-negative");
}

InitResult init_steady_state(const Scenario& sc) {
    sc.validate();

    InitResult init;
    init.omega0 = equilibrium_speed(sc.v_wind, sc.turbine);
    init.p_mppt0 = mppt_power(sc.v_wind, init.omega0, sc.turbine);

    const double p_s0 = init.p_mppt0;
    const double p_rotor0 = (init.omega0 - 1.0) * p_s0;
    const double p_farm0 = p_s0 + p_rotor0;  // GSC passes the slip power through

    init.dc_p = sc.dc.p < 0.0 ? p_farm0 : sc.dc.p;
    init.dc_q = sc.dc.q_ratio * init.dc_p;

    // Source magnitude that puts the pre-event PCC voltage at exactly 1.
    const double p0 = p_farm0 - init.dc_p;
    const double q0 = -init.dc_q;
    const double k = 1.0 - sc.grid.g_c * sc.grid.x_e;
    init.v_e = std::hypot(k - q0 * sc.grid.x_e, p0 * sc.grid.x_e);
    require(init.v_e > 0.0, Errc::no_feasible_init, "pre-event flow needs a vanishing source");

    GridParams physical = sc.grid;
    physical.v_e = init.v_e;
    init.adjusted = absorb_source_voltage(physical);

    // The unit-voltage point must be the physical (high) branch.
    const PccSolution check = solve_pcc_voltage(init.adjusted, {p0, q0});
    require(std::abs(check.v_p - 1.0) < 1e-8, Errc::no_feasible_init,
            "pre-event operating point sits on the unstable branch");

    DfigState st;
    st.omega_r = init.omega0;
    st.int_rsc_p = p_s0;
    st.int_rsc_q = 0.0;
    st.int_gsc_q = 0.0;
    st.int_gsc_vdc = p_rotor0;
    st.i_p_lag = p_s0;  // terminal voltage is 1 at init
    st.i_q_lag = 0.0;
    st.i_qg_lag = 0.0;
    st.v_dc = sc.conv.v_dc_ref;
    init.state = st;
    return init;
}

void apply_event(const Event& ev, GridParams& physical, DcDraw& dc, double& v_wind) {
    switch (ev.kind) {
        case EventKind::dc_bipolar_block:
            dc.p = 0.0;
            dc.q_ratio = 0.0;
            return;
        case EventKind::capacitor_trip:
            physical.g_c *= (1.0 - ev.arg);
            return;
        case EventKind::wind_step:
            v_wind = ev.arg;
            return;
    }
    fail(Errc::unknown_event, "unrecognized event kind");
}

namespace {

struct OuterControl {
    Method method;
    std::unique_ptr<PqCoordinationController> pq;
    std::unique_ptr<AvcController> avc;

    PowerReferences step(double v_p, double p_mppt, double dt) {
        switch (method) {
            case Method::unit_pf: return baseline_unit_pf(p_mppt);
            case Method::avc: return avc->step(v_p, p_mppt, dt);
            case Method::pq_coordination: return pq->step(v_p, p_mppt, dt);
        }
        fail(Errc::invalid_param, "unknown control method");
    }
};

void check_sanity(const DfigState& st, double t) {
    const bool ok = st.omega_r > 0.1 && st.omega_r < 2.0 && st.v_dc > 0.2 && st.v_dc < 3.0 &&
                    std::abs(st.i_p_lag) < kInjectionCap && std::abs(st.i_q_lag) < kInjectionCap &&
                    std::abs(st.i_qg_lag) < kInjectionCap;
    if (!ok) fail(Errc::numeric_blowup, "state left sanity bounds at t = " + std::to_string(t));
}

DfigState axpy(const DfigState& s, double h, const DfigState& d) {
    DfigState r = s;
    r.omega_r += h * d.omega_r;
    r.int_rsc_p += h * d.int_rsc_p;
    r.int_rsc_q += h * d.int_rsc_q;
    r.int_gsc_vdc += h * d.int_gsc_vdc;
    r.int_gsc_q += h * d.int_gsc_q;
    r.i_p_lag += h * d.i_p_lag;
    r.i_q_lag += h * d.i_q_lag;
    r.i_qg_lag += h * d.i_qg_lag;
    r.v_dc += h * d.v_dc;
    return r;
}

}  // namespace

RunResult run(const Scenario& sc) {
    const InitResult init = init_steady_state(sc);

    DfigModel model{sc.machine, sc.turbine, sc.conv, sc.pi};
    GridParams physical = sc.grid;
    physical.v_e = init.v_e;
    GridParams adjusted = init.adjusted;
    DcDraw dc{init.dc_p, init.dc_p > 0.0 ? init.dc_q / init.dc_p : 0.0};
    double v_wind = sc.v_wind;

    OuterControl ctrl{sc.method, nullptr, nullptr};
    if (sc.method == Method::pq_coordination)
        ctrl.pq = std::make_unique<PqCoordinationController>(sc.machine, sc.hvrt);
    if (sc.method == Method::avc)
        ctrl.avc = std::make_unique<AvcController>(sc.machine, sc.avc);

    const int n_steps = static_cast<int>(std::round(sc.t_end / sc.dt));
    require(std::abs(n_steps * sc.dt - sc.t_end) < 1e-9, Errc::invalid_param,
            "dt must divide t_end");

    RunResult rr;
    rr.v_e = init.v_e;
    TimeSeries& ts = rr.ts;
    const size_t n_samples = static_cast<size_t>(n_steps) + 1;
    for (auto* ch : {&ts.t, &ts.v_p, &ts.p_dfig, &ts.q_dfig, &ts.omega_r, &ts.v_dc, &ts.i_r,
                     &ts.v_r, &ts.q_s_ref, &ts.q_g_ref, &ts.p_s_ref, &ts.k_de})
        ch->reserve(n_samples);
    ts.mode.reserve(n_samples);

    DfigState st = init.state;
    double v_warm = 1.0;
    double t_now = 0.0;
    size_t next_event = 0;
    PowerReferences refs;

    auto solve_v = [&](const DfigState& s, double guess) {
        const ElectricalOutput out = electrical_output(model, s, 1.0);  // p_gsc only
        const double s_p = out.p_gsc - dc.p;
        const double s_q = -dc.q_ratio * dc.p;
        try {
            return solve_terminal_voltage(adjusted, s.i_p_lag, s.i_q_lag + s.i_qg_lag, s_p, s_q,
                                          guess);
        } catch (const SimError& e) {
            fail(e.code(), "terminal voltage solve failed at t = " + std::to_string(t_now));
        }
    };

    for (int k = 0; k <= n_steps; ++k) {
        const double t = k * sc.dt;
        t_now = t;

        // Record with the pre-event topology, then let the controller react
        // to the post-event voltage within the same interval.
        const double v_pre = solve_v(st, v_warm);
        v_warm = v_pre;
        const ElectricalOutput out = electrical_output(model, st, v_pre);

        const PccInjection net{out.p_farm - dc.p, out.q_farm - dc.q_ratio * dc.p};
        rr.max_eq1_residual = std::max(
            rr.max_eq1_residual, std::abs(eq1_residual(quartic_coeffs(adjusted, net), v_pre)));

        const double slip = 1.0 - st.omega_r;
        const OperatingPoint op{.p_s = out.p_s, .q_s = out.q_s,
                                .v_s = std::clamp(v_pre, 0.5, 1.5)};
        const RotorQuantities rq = rotor_quantities(sc.machine, op, slip);

        bool fired = false;
        while (next_event < sc.events.size() && std::abs(sc.events[next_event].time - t) < sc.dt / 4) {
            apply_event(sc.events[next_event], physical, dc, v_wind);
            adjusted = absorb_source_voltage(physical);
            ++next_event;
            fired = true;
        }
        const double v_ctrl = fired ? solve_v(st, v_pre) : v_pre;

        const double p_mppt = mppt_power(v_wind, st.omega_r, sc.turbine);
        refs = ctrl.step(v_ctrl, p_mppt, sc.dt);

        ts.t.push_back(t);
        ts.v_p.push_back(v_pre);
        ts.p_dfig.push_back(out.p_farm);
        ts.q_dfig.push_back(out.q_farm);
        ts.omega_r.push_back(st.omega_r);
        ts.v_dc.push_back(st.v_dc);
        ts.i_r.push_back(rq.i_r_mag);
        ts.v_r.push_back(rq.v_r_mag);
        ts.mode.push_back(refs.mode);
        ts.q_s_ref.push_back(refs.q_s_ref);
        ts.q_g_ref.push_back(refs.q_g_ref);
        ts.p_s_ref.push_back(refs.p_s_ref);
        ts.k_de.push_back(refs.k_de);

        if (k == n_steps) {
            rr.terminal_injection = net;
            rr.terminal_v_p = v_pre;
            rr.final_grid = adjusted;
            break;
        }

        double stage_pm = 0.0, stage_pe = 0.0;
        auto deriv = [&](const DfigState& s) {
            const double v = solve_v(s, v_warm);
            stage_pm = mech_power(v_wind, s.omega_r, sc.turbine);
            stage_pe = electrical_output(model, s, v).p_farm;
            return state_derivatives(model, s, refs, v, v_wind);
        };
        // Energy quadrature shares the RK4 stages.
        double acc_pm = 0.0, acc_pe = 0.0;
        const DfigState k1 = deriv(st);
        acc_pm += stage_pm;
        acc_pe += stage_pe;
        const DfigState k2 = deriv(axpy(st, sc.dt / 2, k1));
        acc_pm += 2.0 * stage_pm;
        acc_pe += 2.0 * stage_pe;
        const DfigState k3 = deriv(axpy(st, sc.dt / 2, k2));
        acc_pm += 2.0 * stage_pm;
        acc_pe += 2.0 * stage_pe;
        const DfigState k4 = deriv(axpy(st, sc.dt, k3));
        acc_pm += stage_pm;
        acc_pe += stage_pe;
        rr.energy.mech += sc.dt / 6.0 * acc_pm;
        rr.energy.elec += sc.dt / 6.0 * acc_pe;

        DfigState next = axpy(st, sc.dt / 6, k1);
        next = axpy(next, sc.dt / 3, k2);
        next = axpy(next, sc.dt / 3, k3);
        next = axpy(next, sc.dt / 6, k4);
        st = next;
        check_sanity(st, t + sc.dt);
    }

    if (ctrl.pq) rr.transitions = ctrl.pq->transitions();

    // Energy bookkeeping over the full window (trapezoid on the recorded grid).
    const double h_turb = sc.turbine.h;
    rr.energy.ke_delta =
        h_turb * (ts.omega_r.back() * ts.omega_r.back() - ts.omega_r.front() * ts.omega_r.front());
    rr.energy.dc_delta = 0.5 * sc.conv.c_dc *
                         (ts.v_dc.back() * ts.v_dc.back() - ts.v_dc.front() * ts.v_dc.front());
    return rr;
}

RunMetrics metrics_of(const std::string& label, const RunResult& rr, double band) {
    RunMetrics m;
    m.label = label;
    const TimeSeries& ts = rr.ts;
    require(!ts.t.empty(), Errc::invalid_param, "empty time series");
    m.peak_v_p = *std::max_element(ts.v_p.begin(), ts.v_p.end());
    m.peak_i_r = *std::max_element(ts.i_r.begin(), ts.i_r.end());

    const double t_tail = ts.t.back() - 0.5;
    double acc = 0.0;
    size_t n_tail = 0;
    for (size_t i = 0; i < ts.size(); ++i)
        if (ts.t[i] >= t_tail) {
            acc += ts.v_p[i];
            ++n_tail;
        }
    m.settled_v_p = n_tail ? acc / static_cast<double>(n_tail) : ts.v_p.back();

    m.time_to_band = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = ts.size(); i-- > 0;) {
        if (ts.v_p[i] >= band) break;
        m.time_to_band = ts.t[i];
    }

    double q_acc = 0.0;
    for (size_t i = 1; i < ts.size(); ++i) {
        const double a = std::max(0.0, -ts.q_dfig[i - 1]);
        const double b = std::max(0.0, -ts.q_dfig[i]);
        q_acc += 0.5 * (a + b) * (ts.t[i] - ts.t[i - 1]);
    }
    m.q_absorbed = q_acc;
    return m;
}

std::vector<RunMetrics> compare(const std::vector<std::pair<std::string, Scenario>>& scenarios) {
    std::vector<RunMetrics> out;
    out.reserve(scenarios.size());
    for (const auto& [label, sc] : scenarios) out.push_back(metrics_of(label, run(sc)));
    return out;
}

}  // namespace hvrt
