#include "goalrl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <omp.h>

namespace goalrl {

namespace {

// Owns the per-episode critic scratch behind the SteppingPolicy interface.
class OwningStabilizedPolicy : public SteppingPolicy {
  public:
    OwningStabilizedPolicy(const CriticState& frozen, const QTable& benchmark,
                           const EnvConfig& env, const StabilizerParams& p)
        : scratch_(frozen), inner_(scratch_, benchmark, env, p) {}

    StepDecision decide(const RobotState& s, const GoalFeatures& f,
                        const DiscreteState& ds) override {
        return inner_.decide(s, f, ds);
    }
    void on_episode_start(const RobotState& s, const GoalFeatures& f,
                          const DiscreteState& ds) override {
        inner_.on_episode_start(s, f, ds);
    }
    void on_transition(const TransitionContext& ctx) override {
        inner_.on_transition(ctx);
    }
    void on_episode_end(const TransitionContext& ctx) override {
        inner_.on_episode_end(ctx);
    }

  private:
    CriticState scratch_;
    StabilizedPolicy inner_;
};

double lower_median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
}

EpisodeRecord run_one(const Goal& goal, const PolicyFactory& factory,
                      const EnvConfig& env, bool keep_trajectory,
                      std::vector<long>* visits) {
    auto policy = factory.make();
    RolloutOptions opts;
    opts.mode = PolicyMode::Eval;
    opts.keep_trajectory = keep_trajectory;
    opts.visit_counts = visits;
    const RolloutResult r = rollout(env, goal, *policy, opts);
    EpisodeRecord rec;
    rec.goal = goal;
    rec.policy_id = factory.id();
    rec.outcome = r.outcome;
    rec.steps = r.steps;
    rec.final_distance = r.final_distance;
    rec.fallback_count = r.fallback_count;
    rec.effort = r.effort;
    rec.trajectory = std::move(r.trajectory);
    return rec;
}

}  // namespace

std::unique_ptr<SteppingPolicy> StabilizedPolicyFactory::make() const {
    return std::make_unique<OwningStabilizedPolicy>(*frozen_, *benchmark_,
                                                    *env_, params_);
}

std::vector<Goal> sample_goals(long n, const EnvConfig& env, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_goals: n must be >= 1");
    std::vector<Goal> goals;
    goals.reserve(n);
    for (long i = 0; i < n; ++i) goals.push_back(sample_goal(env, rng));
    return goals;
}

std::vector<std::vector<EpisodeRecord>> run_matched_serial(
    const std::vector<Goal>& goals,
    const std::vector<const PolicyFactory*>& policies, const EnvConfig& env,
    const MatchedRunOptions& opts) {
    std::vector<std::vector<EpisodeRecord>> out(policies.size());
    if (opts.visit_counts) {
        opts.visit_counts->assign(
            policies.size(),
            std::vector<long>(env.bins.cardinality(), 0));
    }
    for (std::size_t p = 0; p < policies.size(); ++p) {
        out[p].reserve(goals.size());
        std::vector<long>* visits =
            opts.visit_counts ? &(*opts.visit_counts)[p] : nullptr;
        for (const Goal& g : goals) {
            out[p].push_back(run_one(g, *policies[p], env,
                                     opts.keep_trajectories, visits));
        }
    }
    return out;
}

std::vector<std::vector<EpisodeRecord>> run_matched(
    const std::vector<Goal>& goals,
    const std::vector<const PolicyFactory*>& policies, const EnvConfig& env,
    const MatchedRunOptions& opts) {
    const long n_goals = static_cast<long>(goals.size());
    const long n_pol = static_cast<long>(policies.size());
    std::vector<std::vector<EpisodeRecord>> out(n_pol);
    for (auto& v : out) v.resize(n_goals);
    if (opts.visit_counts) {
        opts.visit_counts->assign(
            n_pol, std::vector<long>(env.bins.cardinality(), 0));
    }
    const long total = n_goals * n_pol;
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
        std::vector<long> local_visits;
        long local_policy = -1;
#pragma omp for schedule(dynamic, 4)
        for (long k = 0; k < total; ++k) {
            const long p = k / n_goals;
            const long i = k % n_goals;
            std::vector<long>* visits = nullptr;
            if (opts.visit_counts) {
                if (local_policy != p) {
                    if (local_policy >= 0) {
#pragma omp critical(goalrl_visit_reduce)
                        for (std::size_t c = 0; c < local_visits.size(); ++c) {
                            (*opts.visit_counts)[local_policy][c] +=
                                local_visits[c];
                        }
                    }
                    local_visits.assign(env.bins.cardinality(), 0);
                    local_policy = p;
                }
                visits = &local_visits;
            }
            out[p][i] = run_one(goals[i], *policies[p], env,
                                opts.keep_trajectories, visits);
        }
        if (opts.visit_counts && local_policy >= 0) {
#pragma omp critical(goalrl_visit_reduce)
            for (std::size_t c = 0; c < local_visits.size(); ++c) {
                (*opts.visit_counts)[local_policy][c] += local_visits[c];
            }
        }
    }
    return out;
}

AggregateStats aggregate(const std::vector<EpisodeRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("aggregate: empty record set");
    }
    AggregateStats st;
    st.episodes = static_cast<long>(records.size());
    std::vector<double> steps_all, steps_success, dist_all, dist_fail,
        fallbacks, ratios, efforts;
    long n_goal = 0, n_timeout = 0, n_oob = 0;
    for (const auto& r : records) {
        steps_all.push_back(static_cast<double>(r.steps));
        dist_all.push_back(r.final_distance);
        fallbacks.push_back(static_cast<double>(r.fallback_count));
        if (r.steps > 0) {
            ratios.push_back(static_cast<double>(r.fallback_count) /
                             static_cast<double>(r.steps));
        }
        efforts.push_back(r.effort);
        switch (r.outcome) {
            case Outcome::Goal:
                ++n_goal;
                steps_success.push_back(static_cast<double>(r.steps));
                break;
            case Outcome::Timeout:
                ++n_timeout;
                dist_fail.push_back(r.final_distance);
                break;
            case Outcome::OutOfBounds:
                ++n_oob;
                dist_fail.push_back(r.final_distance);
                break;
            case Outcome::Running:
                throw std::invalid_argument(
                    "aggregate: non-terminal record");
        }
    }
    const double n = static_cast<double>(st.episodes);
    st.success_pct = 100.0 * n_goal / n;
    st.timeout_pct = 100.0 * n_timeout / n;
    st.oob_pct = 100.0 * n_oob / n;
    st.steps_median_all = lower_median(steps_all);
    st.steps_mean_all = mean(steps_all);
    if (!steps_success.empty()) {
        st.steps_median_success = lower_median(steps_success);
        st.steps_mean_success = mean(steps_success);
    }
    st.final_dist_median_all = lower_median(dist_all);
    st.final_dist_mean_all = mean(dist_all);
    if (!dist_fail.empty()) {
        st.final_dist_median_fail = lower_median(dist_fail);
        st.final_dist_mean_fail = mean(dist_fail);
    }
    st.fallbacks_median = lower_median(fallbacks);
    st.fallbacks_mean = mean(fallbacks);
    st.fallbacks_per_step_mean = mean(ratios);
    st.effort_mean = mean(efforts);
    return st;
}

double control_effort(const std::vector<TrajectorySample>& trajectory,
                      const MotionLimits& limits) {
    if (trajectory.size() < 2) {
        throw std::invalid_argument("control_effort: need >= 2 samples");
    }
    const double lambda = control_effort_lambda(limits);
    double e = 0.0;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const auto& a = trajectory[i - 1];
        const auto& b = trajectory[i];
        const double fa = a.v * a.v + lambda * a.omega * a.omega;
        const double fb = b.v * b.v + lambda * b.omega * b.omega;
        e += 0.5 * (fa + fb) * (b.t - a.t);
    }
    return e;
}

HeatmapGrid visitation_heatmap(const std::vector<long>& visit_counts,
                               const BinningConfig& bins,
                               const SliceSelector& slice) {
    int i_v = slice.i_v;
    int i_omega = slice.i_omega;
    if (slice.auto_most_visited) {
        std::vector<long> totals(bins.n_v * bins.n_omega, 0);
        for (long s = 0; s < bins.cardinality(); ++s) {
            const DiscreteState ds = unpack(s, bins);
            totals[ds.i_v * bins.n_omega + ds.i_omega] += visit_counts[s];
        }
        const auto it = std::max_element(totals.begin(), totals.end());
        const long idx = it - totals.begin();
        i_v = static_cast<int>(idx / bins.n_omega);
        i_omega = static_cast<int>(idx % bins.n_omega);
    }
    HeatmapGrid g;
    g.n_d = bins.n_d;
    g.n_e = bins.n_theta;
    g.slice_i_v = i_v;
    g.slice_i_omega = i_omega;
    g.cells.assign(static_cast<std::size_t>(g.n_d) * g.n_e, 0.0);
    for (int i_d = 0; i_d < bins.n_d; ++i_d) {
        for (int i_e = 0; i_e < bins.n_theta; ++i_e) {
            DiscreteState ds{i_d, i_e, i_v, i_omega, 0};
            g.at(i_d, i_e) =
                static_cast<double>(visit_counts[pack(ds, bins)]);
        }
    }
    return g;
}

std::pair<HeatmapGrid, HeatmapGrid> cost_to_go_maps(
    const QTable& q0, const CriticState& critic, const BinningConfig& bins,
    const SliceSelector& slice) {
    HeatmapGrid bench, stab;
    bench.n_d = stab.n_d = bins.n_d;
    bench.n_e = stab.n_e = bins.n_theta;
    bench.slice_i_v = stab.slice_i_v = slice.i_v;
    bench.slice_i_omega = stab.slice_i_omega = slice.i_omega;
    bench.cells.assign(static_cast<std::size_t>(bins.n_d) * bins.n_theta, 0.0);
    stab.cells = bench.cells;
    for (int i_d = 0; i_d < bins.n_d; ++i_d) {
        for (int i_e = 0; i_e < bins.n_theta; ++i_e) {
            DiscreteState ds{i_d, i_e, slice.i_v, slice.i_omega, 0};
            const long s = pack(ds, bins);
            double q_best = q0.at(s, 0);
            double c_best = critic.w.at(s, 0);
            for (int a = 1; a < q0.n_actions; ++a) {
                q_best = std::max(q_best, q0.at(s, a));
                c_best = std::min(c_best, critic.w.at(s, a));
            }
            bench.at(i_d, i_e) = -q_best;
            stab.at(i_d, i_e) = c_best;
        }
    }
    return {bench, stab};
}

std::vector<EpisodeRecord> run_moving_goal_sequence(
    const PolicyFactory& factory, long n_goals, const EnvConfig& env,
    Rng& rng, bool keep_trajectories) {
    if (n_goals < 1) {
        throw std::invalid_argument("run_moving_goal_sequence: n_goals >= 1");
    }
    std::vector<EpisodeRecord> out;
    out.reserve(n_goals);
    EnvConfig seg_env = env;
    std::uniform_real_distribution<double> uh(-M_PI, M_PI);
    for (long k = 0; k < n_goals; ++k) {
        Goal goal = sample_goal(seg_env, rng);
        goal.mode = GoalMode::Moving;
        goal.speed = env.moving_goal_speed;
        goal.heading = uh(rng);
        auto policy = factory.make();
        RolloutOptions opts;
        opts.mode = PolicyMode::Eval;
        opts.keep_trajectory = keep_trajectories;
        const RolloutResult r = rollout(seg_env, goal, *policy, opts, &rng);
        EpisodeRecord rec;
        rec.goal = goal;
        rec.policy_id = factory.id();
        rec.outcome = r.outcome;
        rec.steps = r.steps;
        rec.final_distance = r.final_distance;
        rec.fallback_count = r.fallback_count;
        rec.effort = r.effort;
        rec.trajectory = std::move(r.trajectory);
        out.push_back(std::move(rec));
        // Next segment starts where the robot ended up.
        seg_env.start = r.final_state;
        seg_env.start_min_dist_to_goal = env.start_min_dist_to_goal;
    }
    return out;
}

double paired_success_z(const std::vector<EpisodeRecord>& reference,
                        const std::vector<EpisodeRecord>& candidate) {
    if (reference.size() != candidate.size() || reference.empty()) {
        throw std::invalid_argument("paired_success_z: mismatched records");
    }
    long ref_only = 0, cand_only = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const bool a = reference[i].outcome == Outcome::Goal;
        const bool b = candidate[i].outcome == Outcome::Goal;
        if (a && !b) ++ref_only;
        if (b && !a) ++cand_only;
    }
    const double discordant = static_cast<double>(ref_only + cand_only);
    if (discordant == 0.0) return 0.0;
    return (static_cast<double>(cand_only) - static_cast<double>(ref_only)) /
           std::sqrt(discordant);
}

}  // namespace goalrl
