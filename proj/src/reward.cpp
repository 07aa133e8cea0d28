#include "goalrl/reward.hpp"

#include <algorithm>
#include <cmath>

namespace goalrl {

double task_reward(const Transition& tr, const RewardWeights& w) {
    const double gamma_next = w.discounted_shaping ? w.gamma : 1.0;
    double r = -w.k_step;
    r += w.k_d * (tr.d_t - gamma_next * tr.d_next);
    if (tr.outcome == Outcome::Timeout) {
        r += -w.k_timeout * tr.d_T;
    }
    return r;
}

ShapingResult shaping_reward(const Transition& tr, const RewardWeights& w) {
    ShapingResult res;
    auto& t = res.terms;
    const double abs_e = std::abs(tr.e_t);
    const double abs_e_next = std::abs(tr.e_next);
    const double cos_e_next = std::cos(abs_e_next);
    const double align = (1.0 + cos_e_next) / 2.0;

    const double gamma_next = w.discounted_shaping ? w.gamma : 1.0;
    t[kTheta] = w.k_theta * (abs_e - gamma_next * abs_e_next);
    t[kOmega] = -w.k_omega * align * tr.omega_next * tr.omega_next;
    const double fwd = std::max(0.0, std::cos(tr.e_next));
    t[kVParallel] = w.k_v * tr.v_next * fwd * fwd;
    const double lat = std::sin(tr.e_next);
    t[kVPerp] = -w.k_lat * tr.v_next * tr.v_next * lat * lat;
    t[kAccel] = -w.k_a_v * tr.a_v * tr.a_v -
                w.k_a_omega * (0.5 + 0.5 * align) * tr.a_omega * tr.a_omega;
    if (abs_e_next < w.e_db) {
        const double excess_w = std::max(0.0, std::abs(tr.omega_next) - w.w_db);
        t[kHyst] = -w.k_ws * excess_w * excess_w;
    }
    if (tr.d_next <= w.d_goal_tol) {
        t[kGoalBonus] = w.k_d * tr.d_t;
    }
    if (tr.omega_t * tr.omega_next < 0.0) {
        t[kFlip] = -w.k_wflip;
    }
    const double delta_e = abs_e_next - abs_e;
    t[kHeadingInc] = -w.k_heading_inc * std::max(0.0, delta_e);
    if (std::abs(delta_e) < w.e_db && abs_e_next > w.e_db) {
        t[kHeadingStall] = -w.k_heading_stall * abs_e_next;
    }
    const double theta_stop =
        tr.omega_next * tr.omega_next / (2.0 * w.a_omega_brake);
    const double excess = std::max(0.0, theta_stop - (abs_e_next + w.e_pad));
    t[kStop] = -w.k_wstop * excess * excess;
    const double wrong =
        std::max(0.0, -tr.e_0_sign * tr.omega_next - w.w_db);
    if (wrong > 0.0) {
        t[kSign] = -w.k_wsign * wrong * wrong;
    }

    for (double x : t) res.total += x;
    return res;
}

double potential(double d, double e, const RewardWeights& w) {
    return w.k_d * d + w.k_theta * std::abs(e);
}

double total_reward(const Transition& tr, const RewardWeights& w) {
    return task_reward(tr, w) + shaping_reward(tr, w).total;
}

}  // namespace goalrl
