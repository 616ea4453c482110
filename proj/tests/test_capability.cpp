#include "hvrt/capability.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace hvrt;

TEST_CASE("per-unit conversion of the published test system") {
    const MachineParams m = table1_machine();
    CHECK(m.x_m == doctest::Approx(6.490233144297417).epsilon(1e-12));
    CHECK(m.x_l == doctest::Approx(7.0573408947700065).epsilon(1e-12));
    CHECK(m.x_ls == doctest::Approx(0.5671077504725899).epsilon(1e-10));
    CHECK(m.i_r_max == doctest::Approx(1.2747893943706936).epsilon(1e-12));
    CHECK(m.s_n == doctest::Approx(1.0 / 0.9).epsilon(1e-15));
    CHECK(m.s_c == doctest::Approx(50.0 / 150.0).epsilon(1e-15));
    CHECK(m.q_g_cap == 0.25);
}

TEST_CASE("stator limits at the rated point reproduce the design table") {
    const MachineParams m = table1_machine();
    const CapabilityLimits lim = stator_limits(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0});
    CHECK(lim.q_s_max == doctest::Approx(0.4843221048378528).epsilon(1e-10));
    CHECK(lim.q_s_max == doctest::Approx(0.48).epsilon(0.021));  // published rounding
    CHECK(lim.q_s1_max == doctest::Approx(0.7535843067894921).epsilon(1e-10));
    CHECK(lim.q_s2_max < lim.q_s1_max);  // capacity circle binds at rated power

    // capacity boundary
    CHECK(stator_limits(m, {.p_s = m.s_n, .q_s = 0.0, .v_s = 1.0}).q_s2_max ==
          doctest::Approx(0.0).epsilon(1e-12));
    // zero power, rotor circle wide open
    CHECK(stator_limits(m, {.p_s = 0.0, .q_s = 0.0, .v_s = 1.0}).q_s1_max ==
          doctest::Approx(1.3140473894659057).epsilon(1e-10));
}

TEST_CASE("gsc limit from capacity and slip") {
    MachineParams m = table1_machine();
    m.q_g_cap = 0.0;  // expose the raw capacity circle
    m.gsc_neglect_slip = false;

    m.s_c = 0.25;
    m.slip = 0.0;
    CHECK(gsc_limit(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}) == doctest::Approx(0.25).epsilon(1e-15));

    m.slip = 0.25;
    CHECK(gsc_limit(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}) == doctest::Approx(0.0).epsilon(1e-12));

    m.s_c = 0.3;
    m.slip = -0.2;
    CHECK(gsc_limit(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}) ==
          doctest::Approx(0.22360679774997896).epsilon(1e-12));

    m.gsc_neglect_slip = true;
    CHECK(gsc_limit(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}) == doctest::Approx(0.3).epsilon(1e-15));

    m.q_g_cap = 0.25;
    CHECK(gsc_limit(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("total and de-loaded limits reproduce the design table") {
    const MachineParams m = table1_machine();
    const OperatingPoint op{.p_s = 1.0, .q_s = 0.0, .v_s = 1.0};

    CHECK(total_limit(m, op) == doctest::Approx(0.7343221048378528).epsilon(1e-10));
    CHECK(total_limit(m, op) == doctest::Approx(0.73).epsilon(0.01));

    const CapabilityLimits deload = deload_limits(m, op, 0.2);
    CHECK(deload.q_total_deload_max == doctest::Approx(1.0210822921287765).epsilon(1e-10));
    CHECK(deload.q_total_deload_max == doctest::Approx(1.02).epsilon(0.01));
    CHECK(deload.q_s_deload_max == doctest::Approx(0.7710822921287765).epsilon(1e-10));

    CHECK(deload_limits(m, op, 0.0).q_total_deload_max ==
          doctest::Approx(total_limit(m, op)).epsilon(1e-12));

    double prev = 0.0;
    for (double k = 0.0; k <= 0.2 + 1e-12; k += 0.05) {
        const double q = deload_limits(m, op, k).q_total_deload_max;
        CHECK(q >= prev - 1e-12);
        prev = q;
    }

    CHECK_THROWS_AS(deload_limits(m, op, 0.25), SimError);
}

TEST_CASE("active power from a reactive demand") {
    const MachineParams m = table1_machine();

    SUBCASE("deep demand clamps at maximum de-loading") {
        const PRefResult r = p_ref_from_q_ref(m, -0.9, 1.0, 1.0);
        CHECK(r.binding == PRefBinding::clamped);
        CHECK(r.p_s_ref == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(r.k_de == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(r.achievable_q_abs == doctest::Approx(0.7710822921287765).epsilon(1e-10));
    }

    SUBCASE("the pre-clamp limit is the capacity circle") {
        // reproduce the intermediate: sqrt(s_n^2 - 0.81)
        const double p_s_max = std::sqrt(m.s_n * m.s_n - 0.81);
        CHECK(p_s_max == doctest::Approx(0.6515887516175889).epsilon(1e-12));
        const double brute =
            oracles::brute_force_p_max(m.x_m, m.x_l, m.i_r_max, m.s_n, 1.0, -0.9);
        CHECK(brute == doctest::Approx(p_s_max).epsilon(1e-3));
    }

    SUBCASE("no demand, no de-loading") {
        const PRefResult r = p_ref_from_q_ref(m, 0.0, 1.0, 1.0);
        CHECK(r.p_s_ref == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.k_de == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(r.binding == PRefBinding::mppt);
    }

    SUBCASE("feasibility closure over random demands") {
        oracles::Rng rng(808);
        for (int i = 0; i < 2000; ++i) {
            const double v_s = rng.uniform(0.9, 1.3);
            const double q_max0 = v_s * v_s / m.x_l + m.x_m * v_s * m.i_r_max / m.x_l;
            const double q = -rng.uniform(0.0, std::min(q_max0, m.s_n) - 1e-6);
            const double p_mppt = rng.uniform(0.2, 1.0);
            const PRefResult r = p_ref_from_q_ref(m, q, v_s, p_mppt);
            CHECK(r.k_de >= 0.0);
            CHECK(r.k_de <= m.k_de_max + 1e-12);
            if (r.binding != PRefBinding::clamped) {
                CHECK(rotor_circle_margin(m, r.p_s_ref, q, v_s) >= -1e-9);
                CHECK(capacity_margin(m, r.p_s_ref, q) >= -1e-9);
            }
        }
    }

    SUBCASE("infeasible demand is rejected") {
        CHECK_THROWS_AS(p_ref_from_q_ref(m, -2.0, 1.0, 1.0), SimError);
    }

    SUBCASE("capacity circle binds across the whole second band") {
        // stage-2 stator demand with the published gains: |q| = 0.48 + 3.6 (v - 1.15)
        for (double v = 1.151; v <= 1.3; v += 0.005) {
            const double q = -std::min(0.48 + 3.6 * (v - 1.15), 0.7710822921287765);
            const PRefResult r = p_ref_from_q_ref(m, q, v, 1.0);
            const double p_cap_circle = std::sqrt(m.s_n * m.s_n - q * q);
            if (p_cap_circle < 1.0) {
                CHECK(r.binding == PRefBinding::capacity);
                CHECK(r.p_s_ref == doctest::Approx(p_cap_circle).epsilon(1e-12));
            } else {
                CHECK(r.binding == PRefBinding::mppt);
            }
        }
    }
}

TEST_CASE("rotor current from stator powers") {
    const MachineParams m = table1_machine();

    const RotorCurrent magnetizing = rotor_current_from_pq(m, {.p_s = 0.0, .q_s = 0.0, .v_s = 1.0});
    CHECK(magnetizing.d == doctest::Approx(0.1540776699029126).epsilon(1e-10));
    CHECK(magnetizing.q == doctest::Approx(0.0).epsilon(1e-15));

    const RotorCurrent rated = rotor_current_from_pq(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0});
    CHECK(rated.q == doctest::Approx(-1.087378640776699).epsilon(1e-10));
    CHECK(rated.d == doctest::Approx(0.1540776699029126).epsilon(1e-10));
    CHECK(rated.mag() == doctest::Approx(1.0982405186388327).epsilon(1e-10));
    CHECK(rated.mag() < m.i_r_max);

    CHECK_THROWS_AS(rotor_current_from_pq(m, {.p_s = 0.0, .q_s = 0.0, .v_s = 0.0}), SimError);
}

TEST_CASE("rotor-current circle maps onto the stator constraint") {
    const MachineParams m = table1_machine();
    oracles::Rng rng(13579);
    const double two_pi = 6.283185307179586;

    for (int i = 0; i < 10000; ++i) {
        const double v_s = rng.uniform(0.8, 1.3);
        const double r = m.i_r_max * std::sqrt(rng.uniform(0.0, 1.0));
        const double th = rng.uniform(0.0, two_pi);
        const double i_rd = r * std::cos(th);
        const double i_rq = r * std::sin(th);
        const OperatingPoint op = pq_from_rotor_current(m, i_rd, i_rq, v_s);
        CHECK(rotor_circle_margin(m, op.p_s, op.q_s, v_s) >= -1e-9);
    }

    // boundary points achieve equality
    for (int i = 0; i < 2000; ++i) {
        const double v_s = rng.uniform(0.8, 1.3);
        const double th = rng.uniform(0.0, two_pi);
        const double i_rd = m.i_r_max * std::cos(th);
        const double i_rq = m.i_r_max * std::sin(th);
        const OperatingPoint op = pq_from_rotor_current(m, i_rd, i_rq, v_s);
        CHECK(std::abs(rotor_circle_margin(m, op.p_s, op.q_s, v_s)) < 1e-9);
        const RotorCurrent back = rotor_current_from_pq(m, op);
        CHECK(back.mag() == doctest::Approx(m.i_r_max).epsilon(1e-9));
    }
}

TEST_CASE("binding-constraint crossover") {
    const MachineParams m = table1_machine();

    // at rated voltage the capacity circle binds everywhere: no crossover
    CHECK(std::isnan(stator_limits(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}).p_0));

    // at depressed voltage the crossover exists and both limits meet there
    const CapabilityLimits lim = stator_limits(m, {.p_s = 0.5, .q_s = 0.0, .v_s = 0.9});
    CHECK(lim.p_0 == doctest::Approx(0.9441372845471361).epsilon(1e-9));
    const CapabilityLimits at_p0 = stator_limits(m, {.p_s = lim.p_0, .q_s = 0.0, .v_s = 0.9});
    CHECK(at_p0.q_s1_max == doctest::Approx(at_p0.q_s2_max).epsilon(1e-9));
}

TEST_CASE("limit monotonicity") {
    const MachineParams m = table1_machine();

    double prev = 1e9;
    for (double p = 0.0; p <= 1.05; p += 0.05) {
        const double q = stator_limits(m, {.p_s = p, .q_s = 0.0, .v_s = 1.0}).q_s_max;
        CHECK(q <= prev + 1e-12);
        prev = q;
    }

    prev = 0.0;
    for (double v = 0.9; v <= 1.3 + 1e-9; v += 0.05) {
        const double q1 = stator_limits(m, {.p_s = 0.5, .q_s = 0.0, .v_s = v}).q_s1_max;
        CHECK(q1 >= prev - 1e-12);
        prev = q1;
    }
}

TEST_CASE("capability grid export") {
    const MachineParams m = table1_machine();

    // degenerate grid equals the direct evaluation
    const auto single = capability_grid(m, {1.0, 1.0, 1}, {1.0, 1.0, 1}, {0.0, 0.0, 1});
    REQUIRE(single.size() == 1);
    CHECK(single[0].limits.q_s_max ==
          doctest::Approx(stator_limits(m, {.p_s = 1.0, .q_s = 0.0, .v_s = 1.0}).q_s_max)
              .epsilon(1e-15));

    // q_s_max non-decreasing along a voltage sweep at fixed power
    const auto vsweep = capability_grid(m, {0.8, 0.8, 1}, {0.9, 1.3, 9}, {0.0, 0.0, 1});
    for (size_t i = 1; i < vsweep.size(); ++i)
        CHECK(vsweep[i].limits.q_s_max >= vsweep[i - 1].limits.q_s_max - 1e-12);

    // wind-speed sweep through the tracking curve: limit shrinks toward rated
    double prev = 1e9;
    for (double v_wind : {8.0, 10.0, 12.0}) {
        const double p = std::pow(v_wind / 12.0, 3.0);
        const double q = stator_limits(m, {.p_s = p, .q_s = 0.0, .v_s = 1.0}).q_s_max;
        CHECK(q < prev);
        prev = q;
    }

    CHECK_THROWS_AS(stator_limits(m, {.p_s = 1.2, .q_s = 0.0, .v_s = 1.0}), SimError);
}
