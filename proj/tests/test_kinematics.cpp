#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "goalrl/kinematics.hpp"

using namespace goalrl;
using std::numbers::pi;

TEST_CASE("wrap_pi maps into [-pi, pi)") {
    CHECK(wrap_pi(0.0) == doctest::Approx(0.0));
    CHECK(wrap_pi(3.0 * pi / 2.0) == doctest::Approx(-pi / 2.0));
    CHECK(wrap_pi(-pi) == doctest::Approx(-pi));
    CHECK(wrap_pi(pi) == doctest::Approx(-pi));  // half-open upper end
    CHECK(wrap_pi(2.0 * pi) == doctest::Approx(0.0));
    Rng rng = make_rng(3, "wrap");
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 10000; ++i) {
        const double a = u(rng);
        const double w = wrap_pi(a);
        CHECK(w >= -pi);
        CHECK(w < pi);
        CHECK(wrap_pi(w) == doctest::Approx(w).epsilon(1e-15));  // idempotent
    }
    CHECK_THROWS(wrap_pi(std::numeric_limits<double>::quiet_NaN()));
    CHECK_THROWS(wrap_pi(std::numeric_limits<double>::infinity()));
}

TEST_CASE("goal features: distance and bearing error") {
    RobotState s;
    CHECK(goal_features(s, {3.0, 0.0}).d == doctest::Approx(3.0));
    CHECK(goal_features(s, {3.0, 0.0}).e == doctest::Approx(0.0));
    CHECK(goal_features(s, {0.0, 4.0}).d == doctest::Approx(4.0));
    CHECK(goal_features(s, {0.0, 4.0}).e == doctest::Approx(pi / 2.0));
    // Origin to workspace corner.
    CHECK(goal_features(s, {25.0, 25.0}).d ==
          doctest::Approx(35.36).epsilon(1e-3));
    // Degenerate bearing inside the tolerance is reported as zero.
    RobotState at_goal{2.0, 2.0, 1.0, 0.0, 0.0};
    CHECK(goal_features(at_goal, {2.0, 2.05}, 0.10).e == 0.0);
    CHECK(goal_features(at_goal, {2.0, 2.0}, 0.0).e == 0.0);
}

TEST_CASE("goal features invariant under rigid transforms") {
    Rng rng = make_rng(5, "rigid");
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_real_distribution<double> ang(-pi, pi);
    for (int i = 0; i < 2000; ++i) {
        RobotState s{u(rng), u(rng), ang(rng), 0.1, 0.0};
        Goal g{u(rng), u(rng)};
        const GoalFeatures f = goal_features(s, g);
        const double dx = u(rng), dy = u(rng), rot = ang(rng);
        const double c = std::cos(rot), sn = std::sin(rot);
        RobotState s2{c * s.x - sn * s.y + dx, sn * s.x + c * s.y + dy,
                      wrap_pi(s.theta + rot), s.v, s.omega};
        Goal g2{c * g.x - sn * g.y + dx, sn * g.x + c * g.y + dy};
        const GoalFeatures f2 = goal_features(s2, g2);
        CHECK(f2.d == doctest::Approx(f.d).epsilon(1e-9));
        CHECK(wrap_pi(f2.e - f.e) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("step: saturation and single-substep arithmetic") {
    MotionLimits lim;

    SUBCASE("upper velocity saturation") {
        RobotState s{0, 0, 0, 0.25, 0};
        RobotState n = step(s, {0.10, 0.0}, lim);
        CHECK(n.v == doctest::Approx(0.25));
    }
    SUBCASE("lower omega saturation") {
        RobotState s{0, 0, 0, 0, -0.15};
        RobotState n = step(s, {0.0, -0.02}, lim);
        CHECK(n.omega == doctest::Approx(-0.15));
    }
    SUBCASE("hand Euler arithmetic with a single coarse substep") {
        MotionLimits coarse = lim;
        coarse.dt_sim = coarse.dt_policy;  // one substep of 0.05 s
        RobotState s{0, 0, 0, 0, 0};
        RobotState n = step(s, {0.10, 0.0}, coarse);
        CHECK(n.v == doctest::Approx(0.005));
        CHECK(n.x == doctest::Approx(0.00025));
        CHECK(n.y == doctest::Approx(0.0));
    }
    SUBCASE("omega clamp directive zeroes rotation") {
        RobotState s{0, 0, 0.5, 0.1, 0.1};
        RobotState n = step(s, {0.0, 0.02}, lim, {true});
        CHECK(n.omega == 0.0);
        CHECK(n.theta == doctest::Approx(0.5));
    }
}

TEST_CASE("step keeps v, omega, theta in range after any sequence") {
    MotionLimits lim;
    Rng rng = make_rng(11, "fuzz");
    std::uniform_real_distribution<double> av(-0.2, 0.2);
    std::uniform_real_distribution<double> aw(-0.05, 0.05);
    RobotState s;
    for (int i = 0; i < 20000; ++i) {
        s = step(s, {av(rng), aw(rng)}, lim);
        CHECK(s.v >= lim.v_min);
        CHECK(s.v <= lim.v_max);
        CHECK(s.omega >= lim.omega_min);
        CHECK(s.omega <= lim.omega_max);
        CHECK(s.theta >= -pi);
        CHECK(s.theta < pi);
    }
}

TEST_CASE("substepped integration converges as dt_sim shrinks") {
    MotionLimits lim;
    Rng rng = make_rng(13, "conv");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        RobotState s{u(rng), u(rng), u(rng), 0.1 + 0.05 * u(rng),
                     0.05 * u(rng)};
        Action a{0.10 * u(rng), 0.02 * u(rng)};
        MotionLimits fine = lim;
        fine.dt_sim = lim.dt_sim / 2.0;
        RobotState n1 = step(s, a, lim);
        RobotState n2 = step(s, a, fine);
        CHECK(std::abs(n1.x - n2.x) < 5.0 * lim.dt_sim);
        CHECK(std::abs(n1.y - n2.y) < 5.0 * lim.dt_sim);
        CHECK(std::abs(wrap_pi(n1.theta - n2.theta)) < 5.0 * lim.dt_sim);
    }
}

TEST_CASE("termination outcomes and precedence") {
    Workspace ws;
    Goal g{10.0, 0.0};
    RobotState near_goal{9.96, 0, 0, 0, 0};
    CHECK(check_termination(near_goal, g, 10, 6000, 0.10, ws) ==
          Outcome::Goal);
    RobotState outside{26.0, 0, 0, 0, 0};
    CHECK(check_termination(outside, g, 10, 6000, 0.10, ws) ==
          Outcome::OutOfBounds);
    RobotState inside{5.0, 0, 0, 0, 0};
    CHECK(check_termination(inside, g, 6000, 6000, 0.10, ws) ==
          Outcome::Timeout);
    CHECK(check_termination(inside, g, 10, 6000, 0.10, ws) ==
          Outcome::Running);
    // Goal beats out-of-bounds beats timeout.
    Goal corner{25.02, 0.0};
    RobotState at_corner{25.05, 0, 0, 0, 0};
    CHECK(check_termination(at_corner, corner, 6000, 6000, 0.10, ws) ==
          Outcome::Goal);
    RobotState out_late{26.0, 0, 0, 0, 0};
    CHECK(check_termination(out_late, g, 6000, 6000, 0.10, ws) ==
          Outcome::OutOfBounds);
    // Purity: same inputs, same answer.
    CHECK(check_termination(inside, g, 6000, 6000, 0.10, ws) ==
          check_termination(inside, g, 6000, 6000, 0.10, ws));
}

TEST_CASE("advance_goal: translation, jitter bound and reflection") {
    Workspace ws;
    Rng rng = make_rng(17, "goal");

    SUBCASE("static goal is a no-op") {
        Goal g{1.0, 2.0, GoalMode::Static, 0.5, 1.0};
        Goal n = advance_goal(g, 0.05, ws, rng);
        CHECK(n.x == g.x);
        CHECK(n.y == g.y);
    }
    SUBCASE("zero speed leaves the position fixed") {
        Goal g{1.0, 2.0, GoalMode::Moving, 0.0, 1.0};
        Goal n = advance_goal(g, 0.05, ws, rng);
        CHECK(n.x == doctest::Approx(1.0));
        CHECK(n.y == doctest::Approx(2.0));
    }
    SUBCASE("linear advance along heading") {
        Goal g{0.0, 0.0, GoalMode::Moving, 0.1, 0.0};
        MovingGoalParams no_jitter{0.0};
        Goal n = advance_goal(g, 0.05, ws, rng, no_jitter);
        CHECK(n.x == doctest::Approx(0.005));
        CHECK(n.y == doctest::Approx(0.0));
    }
    SUBCASE("reflection keeps the goal inside the workspace") {
        Goal g{24.999, 0.0, GoalMode::Moving, 10.0, 0.0};
        for (int i = 0; i < 200; ++i) {
            g = advance_goal(g, 0.05, ws, rng);
            CHECK(ws.contains(g.x, g.y));
        }
    }
    SUBCASE("heading jitter stays within the stated bound") {
        MovingGoalParams params;  // 0.2 rad
        Goal g{0.0, 0.0, GoalMode::Moving, 0.0, 0.3};
        for (int i = 0; i < 500; ++i) {
            Goal n = advance_goal(g, 0.05, ws, rng, params);
            CHECK(std::abs(wrap_pi(n.heading - g.heading)) <=
                  params.heading_jitter + 1e-12);
            g = n;
        }
    }
}
