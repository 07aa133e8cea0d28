#pragma once

#include <cstdint>
#include <vector>

#include "goalrl/learner.hpp"
#include "goalrl/rollout.hpp"

namespace goalrl {

struct StageCostWeights {
    double w_d = 1.0;
    double w_e = 0.1;
    double w_u = 0.01;
    double d_scale = 35.36;  // m
};

struct StabilizerParams {
    StageCostWeights cost;
    double c_min = 0.1;
    double c_max = 500.0;
    double nu_bar = 1e-2;     // required decrease margin
    double alpha_crit = 0.1;  // damped TD step size
    double gamma_crit = 0.95;  // critic cost-to-go discount
    bool knowledge_transfer = true;
};

// phi = (d / d_scale, e / pi); zero exactly at the goal-aligned
// configuration.
struct Embedding {
    double phi_d;
    double phi_e;
    double norm() const;
    double norm2() const { return phi_d * phi_d + phi_e * phi_e; }
};
Embedding embed(double d, double e, const StageCostWeights& w);

double stage_cost(double d, double e, double a_v, double a_omega,
                  const StageCostWeights& w, const MotionLimits& limits);

struct KappaBounds {
    double lo;
    double hi;
};
KappaBounds kappa_bounds(double phi_norm, double c_min, double c_max);

// Tabular critic over the shared discretized (s, a) space plus the
// reference memory and budget counters of the constrained-update scheme.
struct CriticState {
    QTable w;  // cost-to-go table
    std::vector<double> phi_norm2;  // per packed state, at bin centers
    double nu_bar = 1e-2;
    double c_min = 0.1;
    double c_max = 500.0;
    double alpha_crit = 0.1;
    double gamma_crit = 0.95;
    long ref_state = 0;
    int ref_action = 0;
    double q_ref = 0.0;
    long accepted_count = 0;
    bool suspended = false;

    KappaBounds bounds_at(long packed) const;
};

// Pessimistic initialization: every cell at kappa_max of its own state.
CriticState make_critic(const EnvConfig& env, const StabilizerParams& p);

// Resets the reference memory for a fresh rollout starting at s0.
void begin_rollout(CriticState& critic, long s0_packed);

int propose_action(const CriticState& critic, long packed);

enum class UpdateStatus { Accepted, Infeasible };

UpdateStatus constrained_update(CriticState& critic, long s_packed,
                                int a_star, double td_target);

struct KnowledgeSample {
    long s_packed;
    int action;
    double cost;
};

// Writes the discounted accumulated nominal-policy cost plus terminal critic
// value into the reference cell (the pair at which the nominal-policy run
// started), clipped into that state's kappa bounds. Does not count as an
// accepted decrease and does not touch q_ref.
void knowledge_transfer(CriticState& critic,
                        const std::vector<KnowledgeSample>& segment,
                        double terminal_value);

// Deterministic cap on accepted updates before permanent fallback.
long update_budget(double q_ref0, double nu_bar);

struct StabilizedEpisodeStats {
    double q_ref0 = 0.0;
    long accepted = 0;
    long budget = 0;
    double min_gap = 0.0;  // smallest accepted decrease observed
    bool any_accept = false;
};

// Online stabilized action selection: greedy critic proposal with a
// constrained update attempt, falling back to the benchmark policy when the
// update is infeasible. The critic is owned by the caller.
class StabilizedPolicy : public SteppingPolicy {
  public:
    StabilizedPolicy(CriticState& critic, const QTable& benchmark,
                     const EnvConfig& env, const StabilizerParams& params);

    StepDecision decide(const RobotState& state, const GoalFeatures& features,
                        const DiscreteState& ds) override;
    void on_episode_start(const RobotState&, const GoalFeatures&,
                          const DiscreteState& ds) override;
    void on_transition(const TransitionContext& ctx) override;
    void on_episode_end(const TransitionContext& ctx) override;

    const StabilizedEpisodeStats& episode_stats() const { return stats_; }

  private:
    double td_target(const RobotState& state, const GoalFeatures& features,
                     int a_star) const;
    void flush_segment(double terminal_value);

    CriticState* critic_;
    const QTable* benchmark_;
    const EnvConfig* env_;
    StabilizerParams params_;
    std::vector<Action> actions_;
    std::vector<KnowledgeSample> segment_;
    StabilizedEpisodeStats stats_;
};

struct RefineLedgerRow {
    long episode;
    Outcome outcome;
    long steps;
    long fallbacks;
    double q_ref0;
    long accepted;
    long budget;
    double min_gap;
};

struct RefineResult {
    CriticState critic;
    std::vector<RefineLedgerRow> ledger;
};

// Runs the stabilizer refinement episodes (goals sampled as in training)
// against a trained benchmark table.
RefineResult refine(const EnvConfig& env, const QTable& benchmark,
                    const StabilizerParams& params, long episodes,
                    std::uint64_t seed);

}  // namespace goalrl
