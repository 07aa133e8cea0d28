#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "goalrl/rollout.hpp"
#include "goalrl/stabilizer.hpp"

namespace goalrl {

struct EpisodeRecord {
    Goal goal;
    std::string policy_id;
    Outcome outcome = Outcome::Running;
    long steps = 0;
    double final_distance = 0.0;
    long fallback_count = 0;
    double effort = 0.0;
    std::vector<TrajectorySample> trajectory;  // kept only when requested
};

struct AggregateStats {
    long episodes = 0;
    double success_pct = 0.0;
    double timeout_pct = 0.0;
    double oob_pct = 0.0;
    double steps_median_all = 0.0;
    double steps_mean_all = 0.0;
    // Success-only / failure-only statistics are absent when the record set
    // has no member of that class.
    std::optional<double> steps_median_success;
    std::optional<double> steps_mean_success;
    double final_dist_median_all = 0.0;
    double final_dist_mean_all = 0.0;
    std::optional<double> final_dist_median_fail;
    std::optional<double> final_dist_mean_fail;
    double fallbacks_median = 0.0;
    double fallbacks_mean = 0.0;
    double fallbacks_per_step_mean = 0.0;
    double effort_mean = 0.0;
};

struct HeatmapGrid {
    int n_d = 0;
    int n_e = 0;
    int slice_i_v = 0;
    int slice_i_omega = 0;
    std::vector<double> cells;  // row-major (i_d, i_e)

    double& at(int i_d, int i_e) { return cells[i_d * n_e + i_e]; }
    double at(int i_d, int i_e) const { return cells[i_d * n_e + i_e]; }
};

// A policy instance per rollout; stabilized policies carry per-episode
// critic scratch, so matched runs construct one instance per episode.
class PolicyFactory {
  public:
    virtual ~PolicyFactory() = default;
    virtual std::string id() const = 0;
    virtual std::unique_ptr<SteppingPolicy> make() const = 0;
};

class BenchmarkPolicyFactory : public PolicyFactory {
  public:
    BenchmarkPolicyFactory(const QTable& q, std::string id = "benchmark")
        : q_(&q), id_(std::move(id)) {}
    std::string id() const override { return id_; }
    std::unique_ptr<SteppingPolicy> make() const override {
        return std::make_unique<GreedyQPolicy>(*q_);
    }

  private:
    const QTable* q_;
    std::string id_;
};

// Each episode runs on a private copy of the frozen refined critic, so the
// online constrained updates of one rollout never leak into another.
class StabilizedPolicyFactory : public PolicyFactory {
  public:
    StabilizedPolicyFactory(const CriticState& frozen, const QTable& benchmark,
                            const EnvConfig& env, const StabilizerParams& p,
                            std::string id = "stabilizer")
        : frozen_(&frozen),
          benchmark_(&benchmark),
          env_(&env),
          params_(p),
          id_(std::move(id)) {}
    std::string id() const override { return id_; }
    std::unique_ptr<SteppingPolicy> make() const override;

  private:
    const CriticState* frozen_;
    const QTable* benchmark_;
    const EnvConfig* env_;
    StabilizerParams params_;
    std::string id_;
};

std::vector<Goal> sample_goals(long n, const EnvConfig& env, Rng& rng);

struct MatchedRunOptions {
    bool keep_trajectories = false;
    // Per-policy 4D visitation accumulators (size bins.cardinality()) are
    // filled when non-null; entry i corresponds to policies[i].
    std::vector<std::vector<long>>* visit_counts = nullptr;
    int threads = 0;  // 0 = OpenMP default
};

// Serial reference implementation; byte-for-byte the contract for the
// parallel kernel below.
std::vector<std::vector<EpisodeRecord>> run_matched_serial(
    const std::vector<Goal>& goals,
    const std::vector<const PolicyFactory*>& policies, const EnvConfig& env,
    const MatchedRunOptions& opts = {});

// OpenMP-parallel fan-out over episodes. Rollouts under frozen policies are
// independent and deterministic, so results are identical to the serial
// reference in any thread count.
std::vector<std::vector<EpisodeRecord>> run_matched(
    const std::vector<Goal>& goals,
    const std::vector<const PolicyFactory*>& policies, const EnvConfig& env,
    const MatchedRunOptions& opts = {});

AggregateStats aggregate(const std::vector<EpisodeRecord>& records);

// Trapezoidal command-energy proxy over a stored trajectory.
double control_effort(const std::vector<TrajectorySample>& trajectory,
                      const MotionLimits& limits);

struct SliceSelector {
    bool auto_most_visited = true;
    int i_v = 0;
    int i_omega = 0;
};

// Visit counts per (i_d, i_e) cell within one (i_v, i_omega) slice of a 4D
// visitation accumulator. Raw counts; the log10(count+1) display transform
// is applied at export time.
HeatmapGrid visitation_heatmap(const std::vector<long>& visit_counts,
                               const BinningConfig& bins,
                               const SliceSelector& slice = {});

// Benchmark cost proxy (-max_a Q0) and stabilizer critic (min_a Qhat) over
// the same slice.
std::pair<HeatmapGrid, HeatmapGrid> cost_to_go_maps(
    const QTable& q0, const CriticState& critic, const BinningConfig& bins,
    const SliceSelector& slice);

// Sequential moving-goal scenario: each segment ends on capture or timeout,
// the robot carrying its state over to the next goal.
std::vector<EpisodeRecord> run_moving_goal_sequence(
    const PolicyFactory& policy, long n_goals, const EnvConfig& env, Rng& rng,
    bool keep_trajectories = false);

// One-sided paired success comparison (normal approximation on discordant
// pairs). Returns the z statistic for "candidate beats reference".
double paired_success_z(const std::vector<EpisodeRecord>& reference,
                        const std::vector<EpisodeRecord>& candidate);

}  // namespace goalrl
