#include "goalrl/stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace goalrl {

double Embedding::norm() const { return std::sqrt(norm2()); }

Embedding embed(double d, double e, const StageCostWeights& w) {
    return {d / w.d_scale, e / M_PI};
}

double stage_cost(double d, double e, double a_v, double a_omega,
                  const StageCostWeights& w, const MotionLimits& limits) {
    const Embedding phi = embed(d, e, w);
    const double u_v = a_v / limits.a_v_max;
    const double u_w = a_omega / limits.a_omega_max;
    return w.w_d * phi.phi_d * phi.phi_d + w.w_e * phi.phi_e * phi.phi_e +
           w.w_u * (u_v * u_v + u_w * u_w);
}

KappaBounds kappa_bounds(double phi_norm, double c_min, double c_max) {
    const double n2 = phi_norm * phi_norm;
    return {c_min * n2, c_max * n2};
}

KappaBounds CriticState::bounds_at(long packed) const {
    const double n2 = phi_norm2[packed];
    return {c_min * n2, c_max * n2};
}

CriticState make_critic(const EnvConfig& env, const StabilizerParams& p) {
    CriticState c;
    const long n = env.bins.cardinality();
    c.w = QTable(n, env.grid.size());
    c.phi_norm2.resize(n);
    c.nu_bar = p.nu_bar;
    c.c_min = p.c_min;
    c.c_max = p.c_max;
    c.alpha_crit = p.alpha_crit;
    c.gamma_crit = p.gamma_crit;
    for (long s = 0; s < n; ++s) {
        const DiscreteState ds = unpack(s, env.bins);
        const Embedding phi = embed(bin_center_d(ds.i_d, env.bins),
                                    bin_center_e(ds.i_e, env.bins), p.cost);
        c.phi_norm2[s] = phi.norm2();
        const double init = c.c_max * c.phi_norm2[s];
        for (int a = 0; a < c.w.n_actions; ++a) c.w.at(s, a) = init;
    }
    return c;
}

void begin_rollout(CriticState& critic, long s0_packed) {
    critic.ref_state = s0_packed;
    critic.ref_action = propose_action(critic, s0_packed);
    critic.q_ref = critic.w.at(s0_packed, critic.ref_action);
    critic.accepted_count = 0;
    critic.suspended = false;
}

int propose_action(const CriticState& critic, long packed) {
    int best = 0;
    double best_v = critic.w.at(packed, 0);
    for (int a = 1; a < critic.w.n_actions; ++a) {
        const double v = critic.w.at(packed, a);
        if (v < best_v) {
            best_v = v;
            best = a;
        }
    }
    return best;
}

UpdateStatus constrained_update(CriticState& critic, long s_packed,
                                int a_star, double td_target) {
    if (critic.suspended) {
        throw std::logic_error(
            "constrained_update: critic suspended; route through "
            "stabilized_step");
    }
    const KappaBounds kb = critic.bounds_at(s_packed);
    const double hi = std::min(kb.hi, critic.q_ref - critic.nu_bar);
    if (hi < kb.lo) return UpdateStatus::Infeasible;
    const double cell = critic.w.at(s_packed, a_star);
    const double damped = cell + critic.alpha_crit * (td_target - cell);
    // The decrease constraint must hold at the damped TD value itself.
    // Forcing the value down to the constraint boundary would write costs
    // below what the data supports and poison later proposals, so a value
    // above the admissible interval is treated as infeasible instead.
    if (damped > hi) return UpdateStatus::Infeasible;
    const double value = std::max(damped, kb.lo);
    critic.w.at(s_packed, a_star) = value;
    critic.ref_state = s_packed;
    critic.ref_action = a_star;
    critic.q_ref = value;
    critic.accepted_count += 1;
    return UpdateStatus::Accepted;
}

void knowledge_transfer(CriticState& critic,
                        const std::vector<KnowledgeSample>& segment,
                        double terminal_value) {
    if (segment.empty()) return;
    double acc = terminal_value;
    for (const auto& s : segment) acc += s.cost;
    const KappaBounds kb = critic.bounds_at(critic.ref_state);
    critic.w.at(critic.ref_state, critic.ref_action) =
        std::clamp(acc, kb.lo, kb.hi);
}

long update_budget(double q_ref0, double nu_bar) {
    if (nu_bar <= 0.0) {
        throw std::invalid_argument("update_budget: nu_bar must be positive");
    }
    const double t = std::max((q_ref0 - nu_bar) / nu_bar, 0.0);
    return static_cast<long>(std::floor(t));
}

StabilizedPolicy::StabilizedPolicy(CriticState& critic,
                                   const QTable& benchmark,
                                   const EnvConfig& env,
                                   const StabilizerParams& params)
    : critic_(&critic),
      benchmark_(&benchmark),
      env_(&env),
      params_(params),
      actions_(enumerate_actions(env.grid)) {}

void StabilizedPolicy::on_episode_start(const RobotState&,
                                        const GoalFeatures&,
                                        const DiscreteState& ds) {
    begin_rollout(*critic_, ds.packed);
    segment_.clear();
    stats_ = {};
    stats_.q_ref0 = critic_->q_ref;
    stats_.budget = update_budget(critic_->q_ref, critic_->nu_bar);
}

double StabilizedPolicy::td_target(const RobotState& state,
                                   const GoalFeatures& features,
                                   int a_star) const {
    // One-step lookahead under the deterministic simulator, greedy next
    // action under the stored critic.
    const RuledAction ruled = apply_policy_rules(
        state, features.d, features.e, actions_[a_star], PolicyMode::Eval,
        env_->limits, env_->weights, env_->lock);
    const RobotState next = step(state, ruled.action, env_->limits,
                                 {.clamp_omega = ruled.clamp_omega});
    const double bearing = wrap_pi(features.e + state.theta);
    const Goal g{state.x + features.d * std::cos(bearing),
                 state.y + features.d * std::sin(bearing)};
    const GoalFeatures fn = goal_features(next, g, env_->goal_tolerance);
    const DiscreteState dsn =
        quantize(fn.d, fn.e, next.v, next.omega, env_->bins);
    const double cost =
        stage_cost(features.d, features.e, ruled.action.a_v,
                   ruled.action.a_omega, params_.cost, env_->limits);
    const int a_next = propose_action(*critic_, dsn.packed);
    return cost + critic_->gamma_crit * critic_->w.at(dsn.packed, a_next);
}

void StabilizedPolicy::flush_segment(double terminal_value) {
    if (!params_.knowledge_transfer || segment_.empty()) {
        segment_.clear();
        return;
    }
    // Segment costs were already discounted when recorded; the terminal
    // critic value sits N steps past the segment start.
    const double discounted_terminal =
        terminal_value *
        std::pow(critic_->gamma_crit, static_cast<double>(segment_.size()));
    knowledge_transfer(*critic_, segment_, discounted_terminal);
    segment_.clear();
}

StepDecision StabilizedPolicy::decide(const RobotState& state,
                                      const GoalFeatures& features,
                                      const DiscreteState& ds) {
    const int a_star = propose_action(*critic_, ds.packed);
    const KappaBounds kb = critic_->bounds_at(ds.packed);
    const double hi = std::min(kb.hi, critic_->q_ref - critic_->nu_bar);
    if (hi < kb.lo) {
        critic_->suspended = true;
        const int a_fb = greedy_action(*benchmark_, ds.packed);
        if (segment_.empty()) {
            // Knowledge transfer targets the pair at which this
            // nominal-policy run starts.
            critic_->ref_state = ds.packed;
            critic_->ref_action = a_fb;
        }
        return {a_fb, true};
    }
    critic_->suspended = false;
    // A feasible step ends any nominal-policy segment: back up its
    // accumulated cost to the reference cell first.
    flush_segment(critic_->w.at(ds.packed, a_star));
    const double prev_ref = critic_->q_ref;
    const UpdateStatus st = constrained_update(
        *critic_, ds.packed, a_star, td_target(state, features, a_star));
    if (st != UpdateStatus::Accepted) {
        critic_->suspended = true;
        const int a_fb = greedy_action(*benchmark_, ds.packed);
        if (segment_.empty()) {
            critic_->ref_state = ds.packed;
            critic_->ref_action = a_fb;
        }
        return {a_fb, true};
    }
    const double gap = prev_ref - critic_->q_ref;
    stats_.min_gap = stats_.any_accept ? std::min(stats_.min_gap, gap) : gap;
    stats_.any_accept = true;
    stats_.accepted = critic_->accepted_count;
    return {a_star, false};
}

void StabilizedPolicy::on_transition(const TransitionContext& ctx) {
    if (ctx.fallback) {
        const double disc = std::pow(critic_->gamma_crit,
                                     static_cast<double>(segment_.size()));
        segment_.push_back(
            {ctx.ds.packed, ctx.action_index,
             disc * stage_cost(ctx.features.d, ctx.features.e,
                               ctx.applied.a_v, ctx.applied.a_omega,
                               params_.cost, env_->limits)});
    }
}

void StabilizedPolicy::on_episode_end(const TransitionContext& ctx) {
    const int a_end = propose_action(*critic_, ctx.next_ds.packed);
    const double terminal_value =
        ctx.outcome == Outcome::Goal
            ? 0.0
            : critic_->w.at(ctx.next_ds.packed, a_end);
    flush_segment(terminal_value);
}

RefineResult refine(const EnvConfig& env, const QTable& benchmark,
                    const StabilizerParams& params, long episodes,
                    std::uint64_t seed) {
    RefineResult out;
    out.critic = make_critic(env, params);
    out.ledger.reserve(episodes);
    for (long ep = 0; ep < episodes; ++ep) {
        Rng goal_rng = make_rng(seed, "refine.goals", ep);
        const Goal goal = sample_goal(env, goal_rng);
        StabilizedPolicy policy(out.critic, benchmark, env, params);
        RolloutOptions opts;
        opts.mode = PolicyMode::Eval;
        const RolloutResult r = rollout(env, goal, policy, opts);
        const auto& st = policy.episode_stats();
        out.ledger.push_back({ep, r.outcome, r.steps, r.fallback_count,
                              st.q_ref0, st.accepted, st.budget, st.min_gap});
    }
    return out;
}

}  // namespace goalrl
