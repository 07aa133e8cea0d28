#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "goalrl/rollout.hpp"

namespace goalrl {

struct QTable {
    long n_states = 0;
    int n_actions = 0;
    std::vector<double> values;  // dense, row-major (state, action)

    QTable() = default;
    QTable(long n_states_, int n_actions_)
        : n_states(n_states_),
          n_actions(n_actions_),
          values(static_cast<std::size_t>(n_states_) * n_actions_, 0.0) {}

    double& at(long s, int a) { return values[s * n_actions + a]; }
    double at(long s, int a) const { return values[s * n_actions + a]; }
    std::span<const double> row(long s) const {
        return {values.data() + s * n_actions,
                static_cast<std::size_t>(n_actions)};
    }
};

enum class UpdateRule { QLearning, Sarsa };

struct TrainConfig {
    long episodes = 30000;
    double alpha = 0.10;
    double gamma = 0.95;
    double eps0 = 1.0;
    double eps_final = 1e-3;
    UpdateRule rule = UpdateRule::QLearning;
    std::uint64_t seed = 0;
};

// TD error for either rule. `terminal` zeroes the bootstrap term;
// `a_next` is required for SARSA only.
double td_error(UpdateRule rule, const QTable& q, double r, long s, int a,
                long s_next, int a_next, double gamma, bool terminal);

void update_q(QTable& q, long s, int a, double delta, double alpha);

// Epsilon-greedy with lowest-index tie-break in the greedy branch.
int select_action(const QTable& q, long s, double eps, Rng& rng);

int greedy_action(const QTable& q, long s);

// Geometric annealing from eps0 to eps_final across the episode index.
double epsilon_at(long episode, const TrainConfig& cfg);

struct TrainLogRow {
    long episode;
    Outcome outcome;
    long steps;
    double ret;
    double eps;
};

struct TrainResult {
    QTable q;
    std::vector<TrainLogRow> log;
};

TrainResult train(const EnvConfig& env, const TrainConfig& cfg);

// Greedy benchmark policy over a frozen Q-table.
class GreedyQPolicy : public SteppingPolicy {
  public:
    explicit GreedyQPolicy(const QTable& q) : q_(&q) {}
    StepDecision decide(const RobotState&, const GoalFeatures&,
                        const DiscreteState& ds) override {
        return {greedy_action(*q_, ds.packed), false};
    }

  private:
    const QTable* q_;
};

std::string outcome_name(Outcome o);

}  // namespace goalrl
