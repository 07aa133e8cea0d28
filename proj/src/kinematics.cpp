#include "goalrl/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace goalrl {

double wrap_pi(double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("wrap_pi: non-finite angle");
    }
    const double two_pi = 2.0 * M_PI;
    double r = angle - two_pi * std::floor((angle + M_PI) / two_pi);
    // Guard against rounding landing exactly on +pi.
    if (r >= M_PI) r -= two_pi;
    if (r < -M_PI) r += two_pi;
    return r;
}

GoalFeatures goal_features(const RobotState& state, const Goal& goal,
                           double goal_tolerance) {
    const double dx = goal.x - state.x;
    const double dy = goal.y - state.y;
    const double d = std::hypot(dx, dy);
    if (d < goal_tolerance || d == 0.0) {
        return {d, 0.0};
    }
    return {d, wrap_pi(std::atan2(dy, dx) - state.theta)};
}

static double sat(double x, double lo, double hi) {
    return std::clamp(x, lo, hi);
}

RobotState step(const RobotState& state, const Action& action,
                const MotionLimits& limits, const StepOptions& opts) {
    RobotState s = state;
    if (opts.clamp_omega) s.omega = 0.0;
    const double dt = limits.dt_sim;
    const long n_sub = std::lround(limits.dt_policy / limits.dt_sim);
    for (long k = 0; k < n_sub; ++k) {
        s.v = sat(s.v + action.a_v * dt, limits.v_min, limits.v_max);
        if (!opts.clamp_omega) {
            s.omega = sat(s.omega + action.a_omega * dt, limits.omega_min,
                          limits.omega_max);
        }
        s.x += s.v * std::cos(s.theta) * dt;
        s.y += s.v * std::sin(s.theta) * dt;
        s.theta = wrap_pi(s.theta + s.omega * dt);
    }
    return s;
}

Outcome check_termination(const RobotState& state, const Goal& goal,
                          long steps_elapsed, long max_steps,
                          double goal_tolerance, const Workspace& ws) {
    const GoalFeatures f = goal_features(state, goal);
    if (f.d <= goal_tolerance) return Outcome::Goal;
    if (!ws.contains(state.x, state.y)) return Outcome::OutOfBounds;
    if (steps_elapsed >= max_steps) return Outcome::Timeout;
    return Outcome::Running;
}

Goal advance_goal(const Goal& goal, double dt, const Workspace& ws, Rng& rng,
                  const MovingGoalParams& params) {
    if (goal.mode != GoalMode::Moving) return goal;
    Goal g = goal;
    std::uniform_real_distribution<double> jitter(-params.heading_jitter,
                                                  params.heading_jitter);
    g.heading = wrap_pi(g.heading + jitter(rng));
    g.x += g.speed * std::cos(g.heading) * dt;
    g.y += g.speed * std::sin(g.heading) * dt;
    // Reflect at the workspace boundary so the goal stays reachable.
    bool reflected_x = false, reflected_y = false;
    if (g.x < ws.x_min) { g.x = 2.0 * ws.x_min - g.x; reflected_x = true; }
    if (g.x > ws.x_max) { g.x = 2.0 * ws.x_max - g.x; reflected_x = true; }
    if (g.y < ws.y_min) { g.y = 2.0 * ws.y_min - g.y; reflected_y = true; }
    if (g.y > ws.y_max) { g.y = 2.0 * ws.y_max - g.y; reflected_y = true; }
    if (reflected_x || reflected_y) {
        double cx = reflected_x ? -std::cos(g.heading) : std::cos(g.heading);
        double cy = reflected_y ? -std::sin(g.heading) : std::sin(g.heading);
        g.heading = wrap_pi(std::atan2(cy, cx));
    }
    return g;
}

}  // namespace goalrl
