#pragma once

#include <cstdint>

#include "goalrl/rng.hpp"

namespace goalrl {

struct RobotState {
    double x = 0.0;      // m
    double y = 0.0;      // m
    double theta = 0.0;  // rad, in [-pi, pi)
    double v = 0.0;      // m/s
    double omega = 0.0;  // rad/s
};

enum class GoalMode { Static, Moving };

struct Goal {
    double x = 0.0;
    double y = 0.0;
    GoalMode mode = GoalMode::Static;
    double speed = 0.0;    // m/s, moving mode only
    double heading = 0.0;  // rad, moving mode only
};

struct Workspace {
    double x_min = -25.0;
    double x_max = 25.0;
    double y_min = -25.0;
    double y_max = 25.0;

    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
};

struct MotionLimits {
    double v_min = 0.0;
    double v_max = 0.25;
    double omega_min = -0.15;
    double omega_max = 0.15;
    double a_v_min = -0.10;
    double a_v_max = 0.10;
    double a_omega_min = -0.02;
    double a_omega_max = 0.02;
    Workspace workspace;
    double dt_policy = 0.05;  // s, action hold interval
    double dt_sim = 0.001;    // s, integration substep
};

struct Action {
    double a_v = 0.0;      // m/s^2
    double a_omega = 0.0;  // rad/s^2
};

enum class Outcome : std::uint8_t { Running, Goal, Timeout, OutOfBounds };

// Maps any finite angle into [-pi, pi).
double wrap_pi(double angle);

// Goal distance and heading error. Bearing is reported as zero inside the
// goal tolerance, where atan2 degenerates.
struct GoalFeatures {
    double d;  // m
    double e;  // rad, in [-pi, pi)
};
GoalFeatures goal_features(const RobotState& state, const Goal& goal,
                           double goal_tolerance = 0.0);

struct StepOptions {
    // Hard clamp from the zero-lock rule in evaluation mode: omega is forced
    // to zero for the whole policy interval while a_v proceeds.
    bool clamp_omega = false;
};

// Holds the action constant over dt_policy and integrates the saturated
// unicycle dynamics in dt_sim increments. Velocity saturation and heading
// wrapping are applied on every substep.
RobotState step(const RobotState& state, const Action& action,
                const MotionLimits& limits, const StepOptions& opts = {});

Outcome check_termination(const RobotState& state, const Goal& goal,
                          long steps_elapsed, long max_steps,
                          double goal_tolerance, const Workspace& ws);

struct MovingGoalParams {
    double heading_jitter = 0.2;  // rad, uniform per-step increment bound
};

// Translates a moving goal along its heading, perturbs the heading by a
// bounded random increment and reflects at the workspace bounds. No-op on
// static goals.
Goal advance_goal(const Goal& goal, double dt, const Workspace& ws, Rng& rng,
                  const MovingGoalParams& params = {});

}  // namespace goalrl
