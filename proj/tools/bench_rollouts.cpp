// Times the OpenMP matched-rollout fan-out against the serial reference and
// checks that both produce identical episode records.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <omp.h>

#include "goalrl/artifact.hpp"
#include "goalrl/config.hpp"
#include "goalrl/evaluation.hpp"

using namespace goalrl;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool records_equal(const std::vector<std::vector<EpisodeRecord>>& a,
                   const std::vector<std::vector<EpisodeRecord>>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t p = 0; p < a.size(); ++p) {
        if (a[p].size() != b[p].size()) return false;
        for (std::size_t i = 0; i < a[p].size(); ++i) {
            const auto& x = a[p][i];
            const auto& y = b[p][i];
            if (x.outcome != y.outcome || x.steps != y.steps ||
                x.fallback_count != y.fallback_count ||
                std::memcmp(&x.final_distance, &y.final_distance,
                            sizeof(double)) != 0 ||
                std::memcmp(&x.effort, &y.effort, sizeof(double)) != 0) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    long n_goals = 200;
    std::string artifact_path;
    std::uint64_t seed = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--goals" && i + 1 < argc) {
            n_goals = std::stol(argv[++i]);
        } else if (arg == "--artifact" && i + 1 < argc) {
            artifact_path = argv[++i];
        } else if (arg == "--seed" && i + 1 < argc) {
            seed = std::stoull(argv[++i]);
        } else {
            std::fprintf(stderr,
                         "usage: bench_rollouts [--goals N] [--seed S] "
                         "[--artifact policy.json]\n");
            return 1;
        }
    }

    RunConfig cfg = default_config();
    cfg.seed = seed;
    cfg.train.seed = seed;

    QTable q(cfg.env.bins.cardinality(),
             static_cast<int>(cfg.env.grid.a_v_levels.size() *
                              cfg.env.grid.a_omega_levels.size()));
    if (!artifact_path.empty()) {
        const PolicyArtifact art = load_artifact(artifact_path);
        if (!art.q) {
            std::fprintf(stderr, "artifact carries no Q-table\n");
            return 1;
        }
        q = *art.q;
    } else {
        // Short warm-up training run so rollouts do something non-trivial.
        TrainConfig tc = cfg.train;
        tc.episodes = 300;
        std::printf("no artifact given; training %ld warm-up episodes...\n",
                    tc.episodes);
        q = train(cfg.env, tc).q;
    }

    BenchmarkPolicyFactory factory(q);
    std::vector<const PolicyFactory*> policies{&factory};
    Rng rng = make_rng(seed, "bench.goals");
    const std::vector<Goal> goals = sample_goals(n_goals, cfg.env, rng);

    auto t0 = Clock::now();
    const auto serial = run_matched_serial(goals, policies, cfg.env);
    const double t_serial = seconds_since(t0);

    const int max_threads = omp_get_max_threads();
    std::printf("%-10s %8s %10s %8s\n", "kernel", "threads", "seconds",
                "speedup");
    std::printf("%-10s %8d %10.3f %8.2f\n", "serial", 1, t_serial, 1.0);

    for (int threads = 1; threads <= max_threads; threads *= 2) {
        MatchedRunOptions opts;
        opts.threads = threads;
        t0 = Clock::now();
        const auto parallel = run_matched(goals, policies, cfg.env, opts);
        const double t_par = seconds_since(t0);
        const bool ok = records_equal(serial, parallel);
        std::printf("%-10s %8d %10.3f %8.2f  %s\n", "openmp", threads, t_par,
                    t_serial / t_par, ok ? "match" : "MISMATCH");
        if (!ok) return 2;
    }
    return 0;
}
