#include "hvrt/controller.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace hvrt;

namespace {

// Published operating table, rounded as printed.
CapabilityLimits table3_limits() {
    CapabilityLimits lim;
    lim.q_s_max = 0.48;
    lim.q_g_max = 0.25;
    lim.q_total_max = 0.73;
    lim.q_s_deload_max = 0.77;
    lim.q_total_deload_max = 1.02;
    return lim;
}

HvrtParams default_params(GainBasis basis = GainBasis::total) {
    HvrtParams hp;
    hp.gain_basis = basis;
    hp.limits = table3_limits();
    const Gains g = compute_gains(hp.limits, hp);
    hp.k1 = g.k1;
    hp.k2 = g.k2;
    return hp;
}

}  // namespace

TEST_CASE("droop gains from the capability spread") {
    HvrtParams hp;
    CapabilityLimits lim = table3_limits();

    hp.gain_basis = GainBasis::total;
    Gains g = compute_gains(lim, hp);
    CHECK(g.k1 == doctest::Approx(14.6).epsilon(1e-12));
    CHECK(g.k2 == doctest::Approx(0.29 / 0.15).epsilon(1e-9));

    hp.gain_basis = GainBasis::stator;
    g = compute_gains(lim, hp);
    CHECK(g.k1 == doctest::Approx(9.6).epsilon(1e-12));
    CHECK(g.k2 == doctest::Approx(3.6).epsilon(1e-9));

    lim.q_total_deload_max = lim.q_total_max;
    hp.gain_basis = GainBasis::total;
    CHECK(compute_gains(lim, hp).k2 == doctest::Approx(0.0).epsilon(1e-15));

    hp.v_ov1 = 1.05;  // breaks the ordering
    CHECK_THROWS_AS(compute_gains(lim, hp), SimError);
}

TEST_CASE("piecewise reactive demand") {
    HvrtParams hp = default_params(GainBasis::stator);
    hp.k1 = 9.6;

    CHECK(q_demand(1.05, hp) == 0.0);
    CHECK(q_demand(1.12, hp) == doctest::Approx(0.192).epsilon(1e-12));
    CHECK(q_demand(1.35, hp) == doctest::Approx(1.02).epsilon(1e-12));
}

TEST_CASE("demand curve continuity and monotonicity with total basis") {
    const HvrtParams hp = default_params(GainBasis::total);

    for (double v : {hp.v_ov_min, hp.v_ov1, hp.v_ov_max}) {
        // one-sided limits straddling the branch switch
        const double below = q_demand(std::nextafter(v, 0.0), hp);
        const double at = q_demand(v, hp);
        const double above = q_demand(std::nextafter(v, 2.0), hp);
        CHECK(std::abs(at - below) < 1e-12);
        CHECK(std::abs(above - at) < 1e-12);
    }

    double prev = -1.0;
    for (double v = 0.95; v < 1.45; v += 1e-3) {
        const double d = q_demand(v, hp);
        CHECK(d >= prev - 1e-15);
        prev = d;
    }
}

TEST_CASE("stage-1 split is proportional and conservative") {
    const CapabilityLimits lim = table3_limits();

    const PowerReferences refs = split_stage1(0.192, lim);
    CHECK(refs.q_s_ref == doctest::Approx(-0.12624657534246575).epsilon(1e-12));
    CHECK(refs.q_g_ref == doctest::Approx(-0.06575342465753424).epsilon(1e-12));
    CHECK(refs.q_s_ref + refs.q_g_ref == doctest::Approx(-0.192).epsilon(1e-14));

    const PowerReferences zero = split_stage1(0.0, lim);
    CHECK(zero.q_s_ref == 0.0);
    CHECK(zero.q_g_ref == 0.0);

    const PowerReferences sat = split_stage1(lim.q_total_max, lim);
    CHECK(sat.q_s_ref == doctest::Approx(-lim.q_s_max).epsilon(1e-12));
    CHECK(sat.q_g_ref == doctest::Approx(-lim.q_g_max).epsilon(1e-12));

    CHECK_THROWS_AS(split_stage1(lim.q_total_max + 1e-6, lim), SimError);
}

TEST_CASE("stage-2 split pins the gsc and caps the stator") {
    HvrtParams hp = default_params(GainBasis::stator);
    hp.k2 = 3.6;

    const PowerReferences refs = split_stage2(1.20, hp);
    CHECK(refs.q_s_ref == doctest::Approx(-0.66).epsilon(1e-12));
    CHECK(refs.q_g_ref == doctest::Approx(-0.25).epsilon(1e-12));

    // continuity with the stage-1 endpoint
    const PowerReferences edge = split_stage2(hp.v_ov1 + 1e-13, hp);
    CHECK(edge.q_s_ref == doctest::Approx(-hp.limits.q_s_max).epsilon(1e-9));
    CHECK(edge.q_g_ref == doctest::Approx(-hp.limits.q_g_max).epsilon(1e-12));

    // deep overvoltage hits the de-loaded stator cap
    const PowerReferences capped = split_stage2(1.31, hp);
    CHECK(capped.q_s_ref == doctest::Approx(-hp.limits.q_s_deload_max).epsilon(1e-12));
}

TEST_CASE("piecewise active power demand") {
    const MachineParams m = table1_machine();
    HvrtParams hp;
    hp.limits = deload_limits(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}, m.k_de_max);
    const Gains g = compute_gains(hp.limits, hp);
    hp.k1 = g.k1;
    hp.k2 = g.k2;

    CHECK(p_demand(1.0, 1.0, hp, m) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p_demand(1.35, 1.0, hp, m) == doctest::Approx(0.8).epsilon(1e-12));

    // middle band: matches the direct feasibility projection
    const PowerReferences q_refs = split_stage2(1.20, hp);
    const double expected = p_ref_from_q_ref(m, q_refs.q_s_ref, 1.20, 1.0).p_s_ref;
    CHECK(p_demand(1.20, 1.0, hp, m) == doctest::Approx(expected).epsilon(1e-12));
    const double brute =
        oracles::brute_force_p_max(m.x_m, m.x_l, m.i_r_max, m.s_n, 1.20, q_refs.q_s_ref);
    CHECK(expected <= std::min(brute + 1e-3, 1.0));

    double prev = 2.0;
    for (double v = 1.0; v <= 1.4; v += 0.01) {
        const double p = p_demand(v, 1.0, hp, m);
        CHECK(p <= prev + 1e-12);
        CHECK(p >= (1.0 - m.k_de_max) - 1e-12);
        prev = p;
    }
}

TEST_CASE("coordination controller stages and release") {
    const MachineParams m = table1_machine();
    HvrtParams hp;
    PqCoordinationController ctrl(m, hp);
    const double dt = 1e-3;

    SUBCASE("below activation stays normal") {
        const PowerReferences refs = ctrl.step(1.05, 1.0, dt);
        CHECK(refs.mode == ControlMode::normal);
        CHECK(refs.q_s_ref == 0.0);
        CHECK(refs.q_g_ref == 0.0);
        CHECK(refs.p_s_ref == doctest::Approx(1.0).epsilon(1e-15));
        CHECK_FALSE(ctrl.hvrt_active());
    }

    SUBCASE("voltage step into the second band de-loads") {
        ctrl.step(1.0, 1.0, dt);
        const PowerReferences refs = ctrl.step(1.25, 1.0, dt);
        CHECK(refs.mode == ControlMode::stage2);
        CHECK(refs.k_de > 0.0);
        CHECK(refs.q_g_ref == doctest::Approx(-ctrl.params().limits.q_g_max).epsilon(1e-12));
        REQUIRE(ctrl.transitions().size() == 1);
        CHECK(ctrl.transitions()[0].from == ControlMode::normal);
        CHECK(ctrl.transitions()[0].to == ControlMode::stage2);
    }

    SUBCASE("recovery releases de-loading as a ramp") {
        ctrl.step(1.25, 1.0, dt);
        CHECK(ctrl.hvrt_active());
        const double p_deloaded = ctrl.step(1.25, 1.0, dt).p_s_ref;
        CHECK(p_deloaded < 1.0);

        PowerReferences refs = ctrl.step(1.08, 1.0, dt);  // below 1.1 - hysteresis
        CHECK_FALSE(ctrl.hvrt_active());
        CHECK(ctrl.voltage_satisfied());
        CHECK(refs.mode == ControlMode::normal);
        CHECK(refs.q_s_ref == 0.0);
        CHECK(refs.p_s_ref < 1.0);  // ramping, not stepping

        double prev = refs.p_s_ref;
        int guard = 0;
        while (prev < 1.0 && ++guard < 2000) {
            const double p = ctrl.step(1.0, 1.0, dt).p_s_ref;
            CHECK(p >= prev);
            CHECK(p - prev <= ctrl.params().release_rate * dt + 1e-12);
            prev = p;
        }
        CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("hysteresis holds activation between 1.09 and 1.1") {
        ctrl.step(1.12, 1.0, dt);
        CHECK(ctrl.hvrt_active());
        ctrl.step(1.095, 1.0, dt);
        CHECK(ctrl.hvrt_active());  // inside the band, still active
        ctrl.step(1.089, 1.0, dt);
        CHECK_FALSE(ctrl.hvrt_active());
    }

    SUBCASE("saturated mode above the upper threshold") {
        const PowerReferences refs = ctrl.step(1.32, 1.0, dt);
        CHECK(refs.mode == ControlMode::saturated);
        CHECK(refs.k_de == doctest::Approx(m.k_de_max).epsilon(1e-12));
        CHECK(ctrl.max_deload_reached());
        CHECK(-refs.q_s_ref ==
              doctest::Approx(ctrl.params().limits.q_s_deload_max).epsilon(1e-12));
    }
}

TEST_CASE("controller invariants over a random voltage trajectory") {
    const MachineParams m = table1_machine();
    PqCoordinationController ctrl(m, HvrtParams{});
    oracles::Rng rng(42);

    double v = 1.0;
    for (int i = 0; i < 5000; ++i) {
        v = std::clamp(v + rng.uniform(-0.01, 0.01), 0.9, 1.4);
        const PowerReferences refs = ctrl.step(v, 1.0, 1e-3);
        const CapabilityLimits& lim = ctrl.params().limits;
        CHECK(-refs.q_s_ref <= lim.q_s_deload_max + 1e-12);
        CHECK(-refs.q_g_ref <= lim.q_g_max + 1e-12);
        CHECK(refs.q_s_ref <= 0.0);
        CHECK(refs.q_g_ref <= 0.0);
        CHECK(refs.p_s_ref >= (1.0 - m.k_de_max) - 1e-12);
        CHECK(refs.k_de >= 0.0);
        CHECK(refs.k_de <= m.k_de_max + 1e-12);
    }
}

TEST_CASE("unit power factor baseline") {
    const PowerReferences refs = baseline_unit_pf(0.8);
    CHECK(refs.q_s_ref == 0.0);
    CHECK(refs.q_g_ref == 0.0);
    CHECK(refs.p_s_ref == 0.8);
    CHECK(refs.mode == ControlMode::normal);
}

TEST_CASE("avc baseline regulates and saturates cleanly") {
    const MachineParams m = table1_machine();

    SUBCASE("no action at the setpoint") {
        AvcController avc(m, AvcParams{});
        const PowerReferences refs = avc.step(1.0, 1.0, 1e-3);
        CHECK(refs.q_s_ref == 0.0);
        CHECK(refs.q_g_ref == 0.0);
        CHECK(avc.integrator() == 0.0);
    }

    SUBCASE("sustained overvoltage saturates at the total limit without windup") {
        AvcController avc(m, AvcParams{});
        const CapabilityLimits lim = stator_limits(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.2});
        PowerReferences refs;
        for (int i = 0; i < 20000; ++i) refs = avc.step(1.2, 1.0, 1e-3);
        CHECK(refs.q_s_ref + refs.q_g_ref == doctest::Approx(-lim.q_total_max).epsilon(1e-9));
        // bounded integrator: recovery starts promptly once the error flips
        CHECK(std::abs(avc.integrator()) < lim.q_total_max + 1.0);
        for (int i = 0; i < 400; ++i) refs = avc.step(0.995, 1.0, 1e-3);
        CHECK(refs.q_s_ref + refs.q_g_ref > -lim.q_total_max + 1e-3);
    }
}
