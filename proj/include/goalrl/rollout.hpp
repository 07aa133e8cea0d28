#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "goalrl/kinematics.hpp"
#include "goalrl/reward.hpp"
#include "goalrl/statespace.hpp"

namespace goalrl {

enum class PolicyMode { Train, Eval };

struct LockParams {
    double e_lock = 0.03;  // rad
    double d_lock = 0.30;  // m
};

// Everything the simulator side of an experiment needs; shared by training,
// stabilizer refinement and evaluation.
struct EnvConfig {
    MotionLimits limits;
    BinningConfig bins;
    ActionGrid grid;
    RewardWeights weights;
    LockParams lock;
    double goal_tolerance = 0.10;
    double start_min_dist_to_goal = 0.20;
    long max_steps = 6000;
    RobotState start;  // origin, theta0 = 0, at rest
    MovingGoalParams moving;
    double moving_goal_speed = 0.125;  // m/s, strictly below v_max
};

struct RuledAction {
    Action action;
    bool clamp_omega = false;
};

// Policy-level zero-lock and hysteresis rules. Lock-region clamping
// overrides hysteresis zeroing, which overrides the learner's proposal.
RuledAction apply_policy_rules(const RobotState& state, double d, double e,
                               const Action& proposed, PolicyMode mode,
                               const MotionLimits& limits,
                               const RewardWeights& weights,
                               const LockParams& lock);

struct StepDecision {
    int action_index = 0;
    bool fallback = false;
};

struct TransitionContext {
    RobotState state;
    GoalFeatures features;
    DiscreteState ds;
    int action_index = 0;
    Action applied;
    RobotState next_state;
    GoalFeatures next_features;
    DiscreteState next_ds;
    Outcome outcome = Outcome::Running;
    double reward = 0.0;
    bool fallback = false;
};

class SteppingPolicy {
  public:
    virtual ~SteppingPolicy() = default;
    virtual StepDecision decide(const RobotState& state,
                                const GoalFeatures& features,
                                const DiscreteState& ds) = 0;
    virtual void on_episode_start(const RobotState&, const GoalFeatures&,
                                  const DiscreteState&) {}
    virtual void on_transition(const TransitionContext&) {}
    virtual void on_episode_end(const TransitionContext&) {}
};

struct TrajectorySample {
    double t, x, y, theta, v, omega, a_v, a_omega, d, e;
    bool fallback;
};

struct RolloutOptions {
    PolicyMode mode = PolicyMode::Eval;
    bool keep_trajectory = false;
    // Optional 4D visitation accumulator of size bins.cardinality();
    // incremented once per recorded policy step at the pre-step state.
    std::vector<long>* visit_counts = nullptr;
};

struct RolloutResult {
    Outcome outcome = Outcome::Running;
    long steps = 0;
    double final_distance = 0.0;
    long fallback_count = 0;
    double effort = 0.0;  // trapezoidal command-energy proxy
    double ret = 0.0;     // discounted return
    RobotState final_state;
    Goal final_goal;
    std::vector<TrajectorySample> trajectory;
};

// One-step preview of executing a grid action (rules applied) from a state;
// used by the stabilizer to form its TD target.
struct StepPreview {
    RobotState next_state;
    GoalFeatures next_features;
    DiscreteState next_ds;
};
StepPreview preview_step(const EnvConfig& env, const RobotState& state,
                         const GoalFeatures& features, int action_index,
                         PolicyMode mode);

// Runs a single episode. `moving_rng` is required when the goal is moving.
RolloutResult rollout(const EnvConfig& env, const Goal& goal,
                      SteppingPolicy& policy, const RolloutOptions& opts,
                      Rng* moving_rng = nullptr);

// Uniform workspace goal, rejection-sampled against the start distance.
Goal sample_goal(const EnvConfig& env, Rng& rng);

double control_effort_lambda(const MotionLimits& limits);

}  // namespace goalrl
