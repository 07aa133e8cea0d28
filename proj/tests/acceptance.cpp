// Acceptance gate: end-to-end statistical and exact property checks over the
// full train -> refine -> matched-evaluation pipeline. Prints one PASS/FAIL
// line per criterion and exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "goalrl/artifact.hpp"
#include "goalrl/config.hpp"
#include "goalrl/evaluation.hpp"
#include "goalrl/learner.hpp"

using namespace goalrl;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

double success_pct(const std::vector<EpisodeRecord>& rs) {
    long ok = 0;
    for (const auto& r : rs) ok += r.outcome == Outcome::Goal;
    return 100.0 * ok / static_cast<double>(rs.size());
}

// Per-step fallback-soundness monitor wrapped around the stabilized policy.
class SoundnessCheckingFactory : public PolicyFactory {
  public:
    SoundnessCheckingFactory(const CriticState& frozen, const QTable& bench,
                             const EnvConfig& env, const StabilizerParams& p,
                             long* violations)
        : inner_(frozen, bench, env, p, "stabilizer"),
          bench_(&bench),
          violations_(violations) {}
    std::string id() const override { return inner_.id(); }
    std::unique_ptr<SteppingPolicy> make() const override;

  private:
    class Checking : public SteppingPolicy {
      public:
        Checking(std::unique_ptr<SteppingPolicy> base, const QTable* bench,
                 long* violations)
            : base_(std::move(base)), bench_(bench), violations_(violations) {}
        StepDecision decide(const RobotState& s, const GoalFeatures& f,
                            const DiscreteState& ds) override {
            StepDecision d = base_->decide(s, f, ds);
            if (d.fallback && d.action_index != greedy_action(*bench_, ds.packed)) {
                ++*violations_;
            }
            return d;
        }
        void on_episode_start(const RobotState& s, const GoalFeatures& f,
                              const DiscreteState& ds) override {
            base_->on_episode_start(s, f, ds);
        }
        void on_transition(const TransitionContext& c) override {
            base_->on_transition(c);
        }
        void on_episode_end(const TransitionContext& c) override {
            base_->on_episode_end(c);
        }

      private:
        std::unique_ptr<SteppingPolicy> base_;
        const QTable* bench_;
        long* violations_;
    };

    StabilizedPolicyFactory inner_;
    const QTable* bench_;
    long* violations_;
};

std::unique_ptr<SteppingPolicy> SoundnessCheckingFactory::make() const {
    return std::make_unique<Checking>(inner_.make(), bench_, violations_);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    EnvConfig env;
    const std::uint64_t seed = 42;

    // ---- Shared pipeline: benchmark training -------------------------------
    std::printf("training benchmark policy (30000 episodes)...\n");
    std::fflush(stdout);
    TrainConfig tcfg;
    tcfg.episodes = 30000;
    tcfg.seed = seed;
    TrainResult tr = train(env, tcfg);

    // ---- Criterion 1: training viability ----------------------------------
    {
        Rng rng = make_rng(seed, "accept.fresh");
        auto goals = sample_goals(1000, env, rng);
        BenchmarkPolicyFactory bf(tr.q);
        auto recs = run_matched(goals, {&bf}, env);
        const double sp = success_pct(recs[0]);
        report(1, sp >= 75.0,
               fmt("benchmark success %.1f%% over 1000 fresh goals "
                   "(threshold >= 75%%)",
                   sp));
    }

    // ---- Shared pipeline: stabilizer refinement ---------------------------
    std::printf("refining stabilizer critic...\n");
    std::fflush(stdout);
    StabilizerParams sp;
    RunConfig rc = default_config();
    RefineResult rr = refine(env, tr.q, sp, rc.refine_episodes, seed);

    // ---- Criterion 8: decrease margin and budget, zero violations ---------
    {
        long violations = 0;
        for (const auto& row : rr.ledger) {
            if (row.accepted > row.budget) ++violations;
            if (row.accepted > 0 && row.min_gap < sp.nu_bar - 1e-12) {
                ++violations;
            }
        }
        report(8, violations == 0,
               fmt("decrease/budget violations across %zu refinement "
                   "episodes: %ld (required 0)",
                   rr.ledger.size(), violations));
    }

    // ---- Criterion 9: exhaustive bound sandwich ---------------------------
    {
        long violations = 0;
        for (long s = 0; s < rr.critic.w.n_states; ++s) {
            const KappaBounds kb = rr.critic.bounds_at(s);
            for (int a = 0; a < rr.critic.w.n_actions; ++a) {
                const double v = rr.critic.w.at(s, a);
                if (v < kb.lo - 1e-12 || v > kb.hi + 1e-12) ++violations;
            }
        }
        report(9, violations == 0,
               fmt("kappa-bound violations over %ld cells: %ld (required 0)",
                   rr.critic.w.n_states * rr.critic.w.n_actions, violations));
    }

    // ---- Shared pipeline: N=2000 matched evaluation -----------------------
    std::printf("running 2000 matched-goal rollouts...\n");
    std::fflush(stdout);
    Rng grng = make_rng(seed, "eval.goals");
    auto goals = sample_goals(2000, env, grng);
    BenchmarkPolicyFactory bench_f(tr.q, "benchmark");
    long soundness_violations = 0;
    SoundnessCheckingFactory stab_f(rr.critic, tr.q, env, sp,
                                    &soundness_violations);
    auto matched = run_matched(goals, {&bench_f, &stab_f}, env);
    const auto& br = matched[0];
    const auto& sr = matched[1];

    // ---- Criterion 2: stabilizer uplift -----------------------------------
    {
        const double sb = success_pct(br);
        const double ss = success_pct(sr);
        const double z = paired_success_z(br, sr);
        const bool pass = ss >= 92.0 && (ss - sb) >= 5.0 && z > 1.645;
        report(2, pass,
               fmt("stabilized %.1f%% vs benchmark %.1f%% (needs >= 92%% and "
                   "+5pp), paired z=%.2f (needs > 1.645)",
                   ss, sb, z));
    }

    // ---- Criterion 3: efficiency on mutual successes ----------------------
    double bench_mutual_steps = 0.0, stab_mutual_steps = 0.0;
    {
        long n = 0;
        double sum_b = 0.0, sum_s = 0.0;
        for (std::size_t i = 0; i < br.size(); ++i) {
            if (br[i].outcome == Outcome::Goal &&
                sr[i].outcome == Outcome::Goal) {
                sum_b += static_cast<double>(br[i].steps);
                sum_s += static_cast<double>(sr[i].steps);
                ++n;
            }
        }
        bench_mutual_steps = sum_b / n;
        stab_mutual_steps = sum_s / n;
        report(3, stab_mutual_steps < bench_mutual_steps,
               fmt("mean steps on %ld mutual successes: stabilized %.1f vs "
                   "benchmark %.1f (needs strict <)",
                   n, stab_mutual_steps, bench_mutual_steps));
    }

    // ---- Criterion 4: OOB elimination -------------------------------------
    {
        long oob = 0;
        for (const auto& r : sr) oob += r.outcome == Outcome::OutOfBounds;
        report(4, oob == 0,
               fmt("stabilized out-of-bounds terminations: %ld of %zu "
                   "(required 0)",
                   oob, sr.size()));
    }

    // ---- Criterion 5: fallback regime -------------------------------------
    {
        double ratio = 0.0;
        for (const auto& r : sr) {
            ratio += static_cast<double>(r.fallback_count) / r.steps;
        }
        ratio /= static_cast<double>(sr.size());
        report(5, ratio >= 0.5 && ratio <= 1.0,
               fmt("mean fallback/steps ratio %.3f (required in [0.5, 1.0])",
                   ratio));
    }

    // ---- Criterion 6: control effort --------------------------------------
    {
        // Quadrature agreement on every trajectory of a 100-goal matched run
        // with retained trajectories.
        MatchedRunOptions traj_opts;
        traj_opts.keep_trajectories = true;
        std::vector<Goal> sub(goals.begin(), goals.begin() + 100);
        StabilizedPolicyFactory stab_plain(rr.critic, tr.q, env, sp);
        auto traj_run = run_matched(sub, {&bench_f, &stab_plain}, env,
                                    traj_opts);
        const double lambda = control_effort_lambda(env.limits);
        long quad_violations = 0;
        for (const auto& policy_recs : traj_run) {
            for (const auto& r : policy_recs) {
                const double trap = control_effort(r.trajectory, env.limits);
                // Dense rectangle-sum oracle: left-endpoint rectangles over
                // 1000 sub-intervals per sample, integrand linearly
                // interpolated between samples.
                constexpr int kSub = 1000;
                const double h = env.limits.dt_policy / kSub;
                double rect = 0.0;
                for (std::size_t i = 0; i + 1 < r.trajectory.size(); ++i) {
                    const auto& a = r.trajectory[i];
                    const auto& b = r.trajectory[i + 1];
                    const double fa = a.v * a.v + lambda * a.omega * a.omega;
                    const double fb = b.v * b.v + lambda * b.omega * b.omega;
                    for (int k = 0; k < kSub; ++k) {
                        const double u = static_cast<double>(k) / kSub;
                        rect += (fa + u * (fb - fa)) * h;
                    }
                }
                const double scale = std::max(std::abs(rect), 1e-9);
                if (std::abs(trap - rect) / scale > 1e-3) ++quad_violations;
            }
        }
        double eff_b = 0.0, eff_s = 0.0;
        long n = 0;
        for (std::size_t i = 0; i < br.size(); ++i) {
            if (br[i].outcome == Outcome::Goal &&
                sr[i].outcome == Outcome::Goal) {
                eff_b += br[i].effort;
                eff_s += sr[i].effort;
                ++n;
            }
        }
        eff_b /= n;
        eff_s /= n;
        const bool pass = quad_violations == 0 && eff_s <= eff_b;
        report(6, pass,
               fmt("trapezoid-vs-rectangle mismatches: %ld (required 0); "
                   "matched-success mean effort stabilized %.3f vs benchmark "
                   "%.3f (needs <=)",
                   quad_violations, eff_s, eff_b));
    }

    // ---- Criterion 7: potential identity on 1e6 transitions ---------------
    {
        Rng rng = make_rng(seed, "accept.potential");
        std::uniform_real_distribution<double> ud(0.0, 36.0);
        std::uniform_real_distribution<double> ue(-M_PI,
                                                  std::nextafter(M_PI, 0.0));
        long violations = 0;
        const long n = 1000000;
        for (long i = 0; i < n; ++i) {
            Transition t;
            t.d_t = ud(rng);
            t.d_next = ud(rng);
            t.e_t = ue(rng);
            t.e_next = ue(rng);
            ShapingResult srw = shaping_reward(t, env.weights);
            const double lhs = srw.terms[kTheta] +
                               env.weights.k_d * (t.d_t - t.d_next);
            const double rhs = potential(t.d_t, t.e_t, env.weights) -
                               potential(t.d_next, t.e_next, env.weights);
            const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
            if (std::abs(lhs - rhs) / scale > 1e-12) ++violations;
        }
        report(7, violations == 0,
               fmt("potential-identity violations over %ld transitions: %ld "
                   "(tolerance 1e-12 relative)",
                   n, violations));
    }

    // ---- Criterion 10: dynamics fuzz --------------------------------------
    {
        Rng rng = make_rng(seed, "accept.fuzz");
        std::uniform_real_distribution<double> ua_v(env.limits.a_v_min * 3,
                                                    env.limits.a_v_max * 3);
        std::uniform_real_distribution<double> ua_w(env.limits.a_omega_min * 3,
                                                    env.limits.a_omega_max * 3);
        RobotState s{0, 0, 0, 0, 0};
        long violations = 0;
        const long n = 1000000;
        for (long i = 0; i < n; ++i) {
            s = step(s, {ua_v(rng), ua_w(rng)}, env.limits, {});
            if (s.v < env.limits.v_min - 1e-12 ||
                s.v > env.limits.v_max + 1e-12 ||
                s.omega < env.limits.omega_min - 1e-12 ||
                s.omega > env.limits.omega_max + 1e-12 || s.theta < -M_PI ||
                s.theta >= M_PI || !std::isfinite(s.x) || !std::isfinite(s.y)) {
                ++violations;
            }
            if (i % 5000 == 4999) s = {0, 0, 0, 0, 0};  // keep positions sane
        }
        report(10, violations == 0,
               fmt("saturation/wrap violations over %ld fuzz steps: %ld",
                   n, violations));
    }

    // ---- Criterion 11: fallback soundness (monitored above) ---------------
    report(11, soundness_violations == 0,
           fmt("fallback actions differing from the benchmark policy across "
               "all 2000 stabilized rollouts: %ld (required 0)",
               soundness_violations));

    // ---- Criterion 12: permanent-fallback equivalence ---------------------
    {
        StabilizerParams huge = sp;
        huge.nu_bar = 1e7;  // above the global kappa_max (~1020)
        CriticState limit_critic = make_critic(env, huge);
        StabilizedPolicyFactory limit_f(limit_critic, tr.q, env, huge);
        std::vector<Goal> sub(goals.begin(), goals.begin() + 100);
        MatchedRunOptions traj_opts;
        traj_opts.keep_trajectories = true;
        auto runs = run_matched(sub, {&bench_f, &limit_f}, env, traj_opts);
        long mismatches = 0;
        for (std::size_t i = 0; i < sub.size(); ++i) {
            const auto& a = runs[0][i];
            const auto& b = runs[1][i];
            if (a.outcome != b.outcome || a.steps != b.steps ||
                a.trajectory.size() != b.trajectory.size()) {
                ++mismatches;
                continue;
            }
            for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
                const auto& ta = a.trajectory[k];
                const auto& tb = b.trajectory[k];
                if (ta.x != tb.x || ta.y != tb.y || ta.theta != tb.theta ||
                    ta.v != tb.v || ta.omega != tb.omega ||
                    ta.a_v != tb.a_v || ta.a_omega != tb.a_omega) {
                    ++mismatches;
                    break;
                }
            }
        }
        report(12, mismatches == 0,
               fmt("step-identity mismatches vs benchmark with nu_bar=1e7 "
                   "over 100 goals: %ld (required 0)",
                   mismatches));
    }

    // ---- Criterion 13: byte-identical episode CSVs from equal seeds -------
    {
        namespace fs = std::filesystem;
        const fs::path base = fs::temp_directory_path() / "goalrl_acceptance";
        fs::remove_all(base);
        fs::create_directories(base);
        RunConfig cfg = default_config();
        PolicyArtifact art;
        art.bins = env.bins;
        art.grid = env.grid;
        art.q = tr.q;
        art.rule = "qlearning";
        art.episodes = tcfg.episodes;
        art.seed = seed;
        art.config_hash = config_hash(cfg);
        art.config_ini = to_ini(cfg);
        const std::string apath = (base / "policy.json").string();
        save_artifact(art, apath);
        const std::string cli = GOALRL_CLI_PATH;
        bool pass = true;
        std::string detail;
        for (const char* run : {"r1", "r2"}) {
            const std::string cmd = cli + " eval " + apath + " --seed 5 " +
                                    "--goals 40 --out " +
                                    (base / run).string() + " >/dev/null";
            if (std::system(cmd.c_str()) != 0) {
                pass = false;
                detail = "CLI eval run failed";
            }
        }
        if (pass) {
            const std::string a = slurp((base / "r1" / "episodes.csv").string());
            const std::string b = slurp((base / "r2" / "episodes.csv").string());
            pass = !a.empty() && a == b;
            detail = fmt("episode CSVs byte-identical across equal-seed CLI "
                         "runs: %s (%zu bytes)",
                         pass ? "yes" : "NO", a.size());
        }
        report(13, pass, detail);
        fs::remove_all(base);
    }

    std::printf("%d of 13 criteria passed\n", 13 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
