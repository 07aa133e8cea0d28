#include "goalrl/learner.hpp"

#include <cmath>
#include <stdexcept>

namespace goalrl {

double td_error(UpdateRule rule, const QTable& q, double r, long s, int a,
                long s_next, int a_next, double gamma, bool terminal) {
    double bootstrap = 0.0;
    if (!terminal) {
        if (rule == UpdateRule::QLearning) {
            double best = q.at(s_next, 0);
            for (int i = 1; i < q.n_actions; ++i) {
                best = std::max(best, q.at(s_next, i));
            }
            bootstrap = best;
        } else {
            if (a_next < 0) {
                throw std::invalid_argument("td_error: SARSA needs a_next");
            }
            bootstrap = q.at(s_next, a_next);
        }
    }
    return r + gamma * bootstrap - q.at(s, a);
}

void update_q(QTable& q, long s, int a, double delta, double alpha) {
    q.at(s, a) += alpha * delta;
}

int greedy_action(const QTable& q, long s) {
    int best = 0;
    double best_v = q.at(s, 0);
    for (int a = 1; a < q.n_actions; ++a) {
        if (q.at(s, a) > best_v) {
            best_v = q.at(s, a);
            best = a;
        }
    }
    return best;
}

int select_action(const QTable& q, long s, double eps, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < eps) {
        std::uniform_int_distribution<int> ua(0, q.n_actions - 1);
        return ua(rng);
    }
    return greedy_action(q, s);
}

double epsilon_at(long episode, const TrainConfig& cfg) {
    if (cfg.episodes <= 1) return cfg.eps0;
    const double frac =
        static_cast<double>(episode) / static_cast<double>(cfg.episodes - 1);
    return cfg.eps0 * std::pow(cfg.eps_final / cfg.eps0, frac);
}

TrainResult train(const EnvConfig& env, const TrainConfig& cfg) {
    TrainResult out;
    out.q = QTable(env.bins.cardinality(), env.grid.size());
    out.log.reserve(cfg.episodes);
    const auto actions = enumerate_actions(env.grid);

    for (long ep = 0; ep < cfg.episodes; ++ep) {
        Rng act_rng = make_rng(cfg.seed, "train", ep);
        Rng goal_rng = make_rng(cfg.seed, "goals", ep);
        const Goal goal = sample_goal(env, goal_rng);
        const double eps = epsilon_at(ep, cfg);

        RobotState state = env.start;
        GoalFeatures f = goal_features(state, goal, env.goal_tolerance);
        DiscreteState ds = quantize(f.d, f.e, state.v, state.omega, env.bins);
        const double e0_sign = f.e > 0.0 ? 1.0 : (f.e < 0.0 ? -1.0 : 0.0);
        int a = select_action(out.q, ds.packed, eps, act_rng);

        double ret = 0.0;
        double gamma_pow = 1.0;
        long t = 0;
        Outcome outcome = Outcome::Running;
        while (outcome == Outcome::Running) {
            const RuledAction ruled = apply_policy_rules(
                state, f.d, f.e, actions[a], PolicyMode::Train, env.limits,
                env.weights, env.lock);
            const RobotState next =
                step(state, ruled.action, env.limits,
                     {.clamp_omega = ruled.clamp_omega});
            const GoalFeatures fn =
                goal_features(next, goal, env.goal_tolerance);
            const DiscreteState dsn =
                quantize(fn.d, fn.e, next.v, next.omega, env.bins);
            ++t;
            outcome = check_termination(next, goal, t, env.max_steps,
                                        env.goal_tolerance,
                                        env.limits.workspace);
            const bool terminal = outcome != Outcome::Running;

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
            ret += gamma_pow * r;
            gamma_pow *= cfg.gamma;

            const int a_next = select_action(out.q, dsn.packed, eps, act_rng);
            const double delta =
                td_error(cfg.rule, out.q, r, ds.packed, a, dsn.packed, a_next,
                         cfg.gamma, terminal);
            update_q(out.q, ds.packed, a, delta, cfg.alpha);

            state = next;
            f = fn;
            ds = dsn;
            a = a_next;
        }
        out.log.push_back({ep, outcome, t, ret, eps});
    }
    return out;
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Running: return "Running";
        case Outcome::Goal: return "Goal";
        case Outcome::Timeout: return "Timeout";
        case Outcome::OutOfBounds: return "OutOfBounds";
    }
    return "Unknown";
}

}  // namespace goalrl
