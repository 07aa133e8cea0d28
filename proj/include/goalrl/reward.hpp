#pragma once

#include <array>

#include "goalrl/kinematics.hpp"

namespace goalrl {

struct RewardWeights {
    // Task terms.
    double k_step = 0.01;
    double k_d = 1.0;
    double k_timeout = 0.1;
    // Shaping terms.
    double k_theta = 1.0;
    double k_omega = 0.5;
    double k_v = 0.5;
    double k_lat = 0.5;
    double k_a_v = 0.1;
    double k_a_omega = 0.1;
    double k_ws = 1.2;
    double k_wflip = 0.5;
    double k_heading_inc = 0.5;
    double k_heading_stall = 0.05;
    double k_wstop = 1.0;
    double k_wsign = 1.0;
    // Deadbands and auxiliaries.
    double w_db = 0.001;        // rad/s
    double e_db = 0.01;         // rad
    double d_goal_tol = 0.10;   // m
    double e_pad = 0.05;        // rad
    double a_omega_brake = 0.02;  // rad/s^2, assumed braking bound
    double gamma = 0.95;
    // Off by default: classical gamma-weighted potential shaping instead of
    // the plain-difference progress terms.
    bool discounted_shaping = false;
};

// One kinematics step, in the continuous features the reward reads.
struct Transition {
    double d_t = 0.0;
    double d_next = 0.0;
    double e_t = 0.0;
    double e_next = 0.0;
    double v_next = 0.0;
    double omega_t = 0.0;
    double omega_next = 0.0;
    double a_v = 0.0;
    double a_omega = 0.0;
    Outcome outcome = Outcome::Running;
    double d_T = 0.0;       // distance remaining at timeout
    double e_0_sign = 0.0;  // initial heading-error sign of the episode
};

// Indices into the shaping breakdown, mirroring the 12 itemized terms.
enum ShapingTerm : int {
    kTheta = 0,
    kOmega,
    kVParallel,
    kVPerp,
    kAccel,
    kHyst,
    kGoalBonus,
    kFlip,
    kHeadingInc,
    kHeadingStall,
    kStop,
    kSign,
    kNumShapingTerms
};

using ShapingBreakdown = std::array<double, kNumShapingTerms>;

double task_reward(const Transition& tr, const RewardWeights& w);

struct ShapingResult {
    double total = 0.0;
    ShapingBreakdown terms{};
};
ShapingResult shaping_reward(const Transition& tr, const RewardWeights& w);

// Phi(d, e) = k_d d + k_theta |e|; the distance- and heading-progress terms
// telescope this potential.
double potential(double d, double e, const RewardWeights& w);

double total_reward(const Transition& tr, const RewardWeights& w);

}  // namespace goalrl
