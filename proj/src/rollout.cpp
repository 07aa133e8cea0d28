#include "goalrl/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace goalrl {

RuledAction apply_policy_rules(const RobotState& state, double d, double e,
                               const Action& proposed, PolicyMode mode,
                               const MotionLimits& limits,
                               const RewardWeights& weights,
                               const LockParams& lock) {
    RuledAction out{proposed, false};
    // Hysteresis: nearly aligned and rotating slowly -> no angular command.
    if (std::abs(e) < weights.e_db && std::abs(state.omega) < weights.w_db) {
        out.action.a_omega = 0.0;
    }
    // Zero-lock region near the goal overrides the hysteresis rule.
    if (std::abs(e) <= lock.e_lock && d <= lock.d_lock) {
        if (mode == PolicyMode::Train) {
            out.action.a_omega =
                std::clamp(-state.omega / limits.dt_policy, limits.a_omega_min,
                           limits.a_omega_max);
        } else {
            out.clamp_omega = true;
        }
    }
    return out;
}

StepPreview preview_step(const EnvConfig& env, const RobotState& state,
                         const GoalFeatures& features, int action_index,
                         PolicyMode mode) {
    // Replays the engine's execution path for one action without advancing
    // the episode. Moving goals are previewed at their current position.
    const auto actions = enumerate_actions(env.grid);
    const RuledAction ruled =
        apply_policy_rules(state, features.d, features.e,
                           actions.at(action_index), mode, env.limits,
                           env.weights, env.lock);
    StepPreview p;
    p.next_state = step(state, ruled.action, env.limits,
                        {.clamp_omega = ruled.clamp_omega});
    // Preview against the current goal captured by the caller through
    // features; reconstruct the goal point from range and bearing.
    const double bearing = wrap_pi(features.e + state.theta);
    Goal g{state.x + features.d * std::cos(bearing),
           state.y + features.d * std::sin(bearing)};
    p.next_features = goal_features(p.next_state, g, env.goal_tolerance);
    p.next_ds = quantize(p.next_features.d, p.next_features.e, p.next_state.v,
                         p.next_state.omega, env.bins);
    return p;
}

double control_effort_lambda(const MotionLimits& limits) {
    const double r = limits.v_max / limits.omega_max;
    return r * r;
}

RolloutResult rollout(const EnvConfig& env, const Goal& goal0,
                      SteppingPolicy& policy, const RolloutOptions& opts,
                      Rng* moving_rng) {
    if (goal0.mode == GoalMode::Moving && moving_rng == nullptr) {
        throw std::invalid_argument("rollout: moving goal needs an rng");
    }
    const auto actions = enumerate_actions(env.grid);
    const double lambda = control_effort_lambda(env.limits);
    const double dt = env.limits.dt_policy;

    RolloutResult res;
    RobotState state = env.start;
    Goal goal = goal0;
    GoalFeatures f = goal_features(state, goal, env.goal_tolerance);
    DiscreteState ds = quantize(f.d, f.e, state.v, state.omega, env.bins);
    policy.on_episode_start(state, f, ds);

    const double e0_sign =
        f.e > 0.0 ? 1.0 : (f.e < 0.0 ? -1.0 : 0.0);
    double energy = state.v * state.v + lambda * state.omega * state.omega;
    double gamma_pow = 1.0;

    auto record = [&](double t, const RobotState& s, const Action& a,
                      const GoalFeatures& ff, bool fb) {
        if (opts.keep_trajectory) {
            res.trajectory.push_back({t, s.x, s.y, s.theta, s.v, s.omega,
                                      a.a_v, a.a_omega, ff.d, ff.e, fb});
        }
    };
    record(0.0, state, {}, f, false);

    Outcome outcome = check_termination(state, goal, 0, env.max_steps,
                                        env.goal_tolerance,
                                        env.limits.workspace);
    long t = 0;
    while (outcome == Outcome::Running) {
        const StepDecision dec = policy.decide(state, f, ds);
        const RuledAction ruled =
            apply_policy_rules(state, f.d, f.e, actions.at(dec.action_index),
                               opts.mode, env.limits, env.weights, env.lock);
        if (opts.visit_counts) (*opts.visit_counts)[ds.packed] += 1;

        const RobotState next = step(state, ruled.action, env.limits,
                                     {.clamp_omega = ruled.clamp_omega});
        if (goal.mode == GoalMode::Moving) {
            goal = advance_goal(goal, dt, env.limits.workspace, *moving_rng);
        }
        const GoalFeatures fn = goal_features(next, goal, env.goal_tolerance);
        const DiscreteState dsn =
            quantize(fn.d, fn.e, next.v, next.omega, env.bins);
        ++t;
        outcome = check_termination(next, goal, t, env.max_steps,
                                    env.goal_tolerance, env.limits.workspace);

        Transition tr;
        tr.d_t = f.d;
        tr.d_next = fn.d;
        tr.e_t = f.e;
        tr.e_next = fn.e;
        tr.v_next = next.v;
        tr.omega_t = state.omega;
        tr.omega_next = next.omega;
        tr.a_v = ruled.action.a_v;
        tr.a_omega = ruled.action.a_omega;
        tr.outcome = outcome;
        tr.d_T = outcome == Outcome::Timeout ? fn.d : 0.0;
        tr.e_0_sign = e0_sign;
        const double r = total_reward(tr, env.weights);
        res.ret += gamma_pow * r;
        gamma_pow *= env.weights.gamma;

        TransitionContext ctx{state,   f,  ds,      dec.action_index,
                              ruled.action, next, fn, dsn, outcome, r,
                              dec.fallback};
        policy.on_transition(ctx);

        const double en =
            next.v * next.v + lambda * next.omega * next.omega;
        res.effort += 0.5 * (energy + en) * dt;
        energy = en;
        if (dec.fallback) ++res.fallback_count;
        record(t * dt, next, ruled.action, fn, dec.fallback);

        state = next;
        f = fn;
        ds = dsn;
        if (outcome != Outcome::Running) {
            policy.on_episode_end(ctx);
        }
    }

    res.outcome = outcome;
    res.steps = t;
    res.final_distance = f.d;
    res.final_state = state;
    res.final_goal = goal;
    return res;
}

Goal sample_goal(const EnvConfig& env, Rng& rng) {
    const Workspace& ws = env.limits.workspace;
    std::uniform_real_distribution<double> ux(ws.x_min, ws.x_max);
    std::uniform_real_distribution<double> uy(ws.y_min, ws.y_max);
    for (;;) {
        Goal g{ux(rng), uy(rng)};
        const double dx = g.x - env.start.x;
        const double dy = g.y - env.start.y;
        if (std::hypot(dx, dy) >= env.start_min_dist_to_goal) return g;
    }
}

}  // namespace goalrl
