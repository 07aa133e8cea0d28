#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "goalrl/artifact.hpp"
#include "goalrl/config.hpp"
#include "goalrl/evaluation.hpp"

namespace fs = std::filesystem;
using namespace goalrl;

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitArtifactError = 2;
constexpr int kExitRuntimeError = 3;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

RunConfig resolve_config(const CommonFlags& flags) {
    RunConfig cfg = flags.config_path.empty() ? default_config()
                                              : load_config(flags.config_path);
    if (flags.seed) {
        cfg.seed = *flags.seed;
        cfg.train.seed = *flags.seed;
    }
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    return cfg;
}

std::ofstream open_output(const fs::path& path, const RunConfig& cfg) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    char head[96];
    std::snprintf(head, sizeof(head),
                  "# config_hash=%016" PRIx64 " seed=%" PRIu64 "\n",
                  config_hash(cfg), cfg.seed);
    out << head;
    return out;
}

void write_episode_csv(std::ofstream& out,
                       const std::vector<std::vector<EpisodeRecord>>& runs) {
    out << "policy,episode,goal_x,goal_y,outcome,steps,final_distance,"
           "fallbacks,effort\n";
    for (const auto& records : runs) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            char line[256];
            std::snprintf(line, sizeof(line),
                          "%s,%zu,%.17g,%.17g,%s,%ld,%.17g,%ld,%.17g\n",
                          r.policy_id.c_str(), i, r.goal.x, r.goal.y,
                          outcome_name(r.outcome).c_str(), r.steps,
                          r.final_distance, r.fallback_count, r.effort);
            out << line;
        }
    }
}

void write_stats_csv(std::ofstream& out,
                     const std::vector<std::string>& ids,
                     const std::vector<AggregateStats>& stats,
                     const std::string& provenance) {
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", *v);
        return std::string(buf);
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    out << "# provenance: " << provenance << "\n";
    out << "Metric";
    for (const auto& id : ids) out << "," << id;
    out << "\n";
    auto row = [&](const std::string& label, auto getter) {
        out << label;
        for (const auto& s : stats) out << "," << getter(s);
        out << "\n";
    };
    row("Success rate (%)", [&](const AggregateStats& s) { return num(s.success_pct); });
    row("Goal end (%)", [&](const AggregateStats& s) { return num(s.success_pct); });
    row("Timeout end (%)", [&](const AggregateStats& s) { return num(s.timeout_pct); });
    row("Out of bounds end (%)", [&](const AggregateStats& s) { return num(s.oob_pct); });
    row("Steps (all eps), median", [&](const AggregateStats& s) { return num(s.steps_median_all); });
    row("Steps (all eps), mean", [&](const AggregateStats& s) { return num(s.steps_mean_all); });
    row("Steps, median (success)", [&](const AggregateStats& s) { return cell(s.steps_median_success); });
    row("Steps, mean (success)", [&](const AggregateStats& s) { return cell(s.steps_mean_success); });
    row("Final dis, median (all)", [&](const AggregateStats& s) { return num(s.final_dist_median_all); });
    row("Final dis, mean (all)", [&](const AggregateStats& s) { return num(s.final_dist_mean_all); });
    row("Final dis, median (fail)", [&](const AggregateStats& s) { return cell(s.final_dist_median_fail); });
    row("Final dis, mean (fail)", [&](const AggregateStats& s) { return cell(s.final_dist_mean_fail); });
    row("Fallbacks, median", [&](const AggregateStats& s) { return num(s.fallbacks_median); });
    row("Fallbacks, mean", [&](const AggregateStats& s) { return num(s.fallbacks_mean); });
    row("Fallbacks/steps, mean", [&](const AggregateStats& s) { return num(s.fallbacks_per_step_mean); });
    row("Control effort, mean", [&](const AggregateStats& s) { return num(s.effort_mean); });
}

void write_heatmap_csv(std::ofstream& out, const HeatmapGrid& g,
                       bool log_transform) {
    out << "i_d,i_e,value\n";
    for (int i_d = 0; i_d < g.n_d; ++i_d) {
        for (int i_e = 0; i_e < g.n_e; ++i_e) {
            const double v = log_transform ? std::log10(g.at(i_d, i_e) + 1.0)
                                           : g.at(i_d, i_e);
            char line[64];
            std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", i_d, i_e, v);
            out << line;
        }
    }
}

void write_trajectory_csv(std::ofstream& out, const EpisodeRecord& r) {
    out << "t,x,y,theta,v,omega,a_v,a_omega,d,e,fallback\n";
    for (const auto& s : r.trajectory) {
        char line[320];
        std::snprintf(line, sizeof(line),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%d\n",
                      s.t, s.x, s.y, s.theta, s.v, s.omega, s.a_v, s.a_omega,
                      s.d, s.e, s.fallback ? 1 : 0);
        out << line;
    }
}

int cmd_train(const CommonFlags& flags, std::optional<long> episodes,
              const std::string& rule) {
    RunConfig cfg = resolve_config(flags);
    if (episodes) cfg.train.episodes = *episodes;
    if (!rule.empty()) {
        if (rule == "qlearning") {
            cfg.train.rule = UpdateRule::QLearning;
        } else if (rule == "sarsa") {
            cfg.train.rule = UpdateRule::Sarsa;
        } else {
            std::cerr << "unknown rule: " << rule << "\n";
            return kExitConfigError;
        }
    }
    const TrainResult result = train(cfg.env, cfg.train);

    PolicyArtifact art;
    art.bins = cfg.env.bins;
    art.grid = cfg.env.grid;
    art.q = result.q;
    art.rule = cfg.train.rule == UpdateRule::QLearning ? "qlearning" : "sarsa";
    art.episodes = cfg.train.episodes;
    art.seed = cfg.seed;
    art.config_hash = config_hash(cfg);
    art.config_ini = to_ini(cfg);
    fs::create_directories(cfg.out_dir);
    save_artifact(art, (fs::path(cfg.out_dir) / "policy.json").string());
    save_config(cfg, (fs::path(cfg.out_dir) / "run_config.ini").string());

    auto log = open_output(fs::path(cfg.out_dir) / "training_log.csv", cfg);
    log << "episode,outcome,steps,return,eps\n";
    for (const auto& row : result.log) {
        char line[160];
        std::snprintf(line, sizeof(line), "%ld,%s,%ld,%.17g,%.17g\n",
                      row.episode, outcome_name(row.outcome).c_str(),
                      row.steps, row.ret, row.eps);
        log << line;
    }
    std::cout << "wrote " << cfg.out_dir << "/policy.json ("
              << result.q.n_states << " states x " << result.q.n_actions
              << " actions)\n";
    return 0;
}

int cmd_refine(const CommonFlags& flags, const std::string& benchmark_path,
               std::optional<long> episodes, std::optional<double> nu_bar) {
    RunConfig cfg = resolve_config(flags);
    if (episodes) cfg.refine_episodes = *episodes;
    if (nu_bar) cfg.stabilizer.nu_bar = *nu_bar;
    const PolicyArtifact bench = load_artifact(benchmark_path);
    if (!bench.q) {
        throw ArtifactError("refine: benchmark artifact carries no Q-table");
    }
    PolicyArtifact probe;
    probe.bins = cfg.env.bins;
    probe.grid = cfg.env.grid;
    if (bench.space_signature() != probe.space_signature()) {
        throw ArtifactError("refine: space mismatch: artifact " +
                            bench.space_signature() + " vs config " +
                            probe.space_signature());
    }
    bool all_zero = true;
    for (double v : bench.q->values) {
        if (v != 0.0) { all_zero = false; break; }
    }
    if (all_zero) {
        std::cout << "note: benchmark table is empty; refinement will behave "
                     "as pure fallback to a constant policy\n";
    }

    const RefineResult result = refine(cfg.env, *bench.q, cfg.stabilizer,
                                       cfg.refine_episodes, cfg.seed);

    PolicyArtifact art;
    art.bins = cfg.env.bins;
    art.grid = cfg.env.grid;
    art.q = bench.q;
    art.critic = result.critic;
    art.rule = "stabilizer";
    art.episodes = cfg.refine_episodes;
    art.seed = cfg.seed;
    art.config_hash = config_hash(cfg);
    art.config_ini = to_ini(cfg);
    fs::create_directories(cfg.out_dir);
    save_artifact(art, (fs::path(cfg.out_dir) / "stabilizer.json").string());

    auto log = open_output(fs::path(cfg.out_dir) / "refine_ledger.csv", cfg);
    log << "episode,outcome,steps,fallbacks,q_ref0,accepted,budget,min_gap\n";
    for (const auto& row : result.ledger) {
        char line[192];
        std::snprintf(line, sizeof(line), "%ld,%s,%ld,%ld,%.17g,%ld,%ld,%.17g\n",
                      row.episode, outcome_name(row.outcome).c_str(),
                      row.steps, row.fallbacks, row.q_ref0, row.accepted,
                      row.budget, row.min_gap);
        log << line;
    }
    std::cout << "wrote " << cfg.out_dir << "/stabilizer.json\n";
    return 0;
}

int cmd_eval(const CommonFlags& flags,
             const std::vector<std::string>& artifact_paths,
             std::optional<long> n_goals, const std::string& mode,
             bool export_heatmaps, bool export_trajectories) {
    RunConfig cfg = resolve_config(flags);
    if (n_goals) cfg.eval_goals = *n_goals;

    std::vector<PolicyArtifact> artifacts;
    for (const auto& p : artifact_paths) artifacts.push_back(load_artifact(p));

    std::vector<std::unique_ptr<PolicyFactory>> factories;
    std::vector<const PolicyFactory*> factory_ptrs;
    std::vector<std::string> ids;
    for (const auto& art : artifacts) {
        if (!art.q) throw ArtifactError("eval: artifact carries no Q-table");
        if (art.critic) {
            factories.push_back(std::make_unique<StabilizedPolicyFactory>(
                *art.critic, *art.q, cfg.env, cfg.stabilizer, "stabilizer"));
        } else {
            factories.push_back(std::make_unique<BenchmarkPolicyFactory>(
                *art.q, "benchmark"));
        }
        factory_ptrs.push_back(factories.back().get());
        ids.push_back(factories.back()->id());
    }

    fs::create_directories(cfg.out_dir);
    const std::string provenance =
        "artifacts=" + std::to_string(artifacts.size()) +
        " rule0=" + artifacts.front().rule +
        " episodes0=" + std::to_string(artifacts.front().episodes);

    std::vector<std::vector<EpisodeRecord>> runs;
    std::vector<std::vector<long>> visits;
    if (mode == "moving") {
        Rng rng = make_rng(cfg.seed, "moving-goal");
        for (const auto* f : factory_ptrs) {
            // Matched seeds: every policy sees the same goal randomness.
            Rng policy_rng = rng;
            runs.push_back(run_moving_goal_sequence(
                *f, cfg.moving_goals, cfg.env, policy_rng,
                export_trajectories));
        }
    } else if (mode == "static") {
        Rng goal_rng = make_rng(cfg.seed, "eval.goals");
        const std::vector<Goal> goals =
            sample_goals(cfg.eval_goals, cfg.env, goal_rng);
        MatchedRunOptions opts;
        opts.keep_trajectories = export_trajectories;
        opts.visit_counts = export_heatmaps ? &visits : nullptr;
        runs = run_matched(goals, factory_ptrs, cfg.env, opts);
    } else {
        std::cerr << "unknown mode: " << mode << "\n";
        return kExitConfigError;
    }

    auto episodes_csv = open_output(fs::path(cfg.out_dir) / "episodes.csv", cfg);
    write_episode_csv(episodes_csv, runs);

    std::vector<AggregateStats> stats;
    for (const auto& records : runs) stats.push_back(aggregate(records));
    auto stats_csv = open_output(fs::path(cfg.out_dir) / "stats.csv", cfg);
    write_stats_csv(stats_csv, ids, stats, provenance);

    if (export_heatmaps && !visits.empty()) {
        for (std::size_t p = 0; p < visits.size(); ++p) {
            const HeatmapGrid g = visitation_heatmap(visits[p], cfg.env.bins);
            auto f = open_output(fs::path(cfg.out_dir) /
                                     ("visitation_" + ids[p] + ".csv"),
                                 cfg);
            write_heatmap_csv(f, g, /*log_transform=*/true);
            if (artifacts[p].critic) {
                const auto [bench_grid, stab_grid] = cost_to_go_maps(
                    *artifacts[p].q, *artifacts[p].critic, cfg.env.bins,
                    {false, g.slice_i_v, g.slice_i_omega});
                auto fb = open_output(
                    fs::path(cfg.out_dir) / "cost_to_go_benchmark.csv", cfg);
                write_heatmap_csv(fb, bench_grid, false);
                auto fsb = open_output(
                    fs::path(cfg.out_dir) / "cost_to_go_stabilizer.csv", cfg);
                write_heatmap_csv(fsb, stab_grid, false);
            }
        }
    }
    if (export_trajectories) {
        for (std::size_t p = 0; p < runs.size(); ++p) {
            for (std::size_t i = 0; i < runs[p].size(); ++i) {
                auto f = open_output(
                    fs::path(cfg.out_dir) /
                        ("trajectory_" + ids[p] + "_" + std::to_string(i) +
                         ".csv"),
                    cfg);
                write_trajectory_csv(f, runs[p][i]);
            }
        }
    }

    for (std::size_t p = 0; p < ids.size(); ++p) {
        std::printf("%s: success %.1f%%, timeout %.1f%%, oob %.1f%%\n",
                    ids[p].c_str(), stats[p].success_pct,
                    stats[p].timeout_pct, stats[p].oob_pct);
    }
    return 0;
}

int cmd_export(const std::string& artifact_path) {
    const PolicyArtifact art = load_artifact(artifact_path);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, art.config_hash);
    std::cout << "format_version: " << art.format_version << "\n";
    std::cout << "space: " << art.space_signature() << "\n";
    std::cout << "rule: " << art.rule << "\n";
    std::cout << "episodes: " << art.episodes << "\n";
    std::cout << "seed: " << art.seed << "\n";
    std::cout << "config_hash: " << hash << "\n";
    auto summarize = [](const char* name, const QTable& t) {
        double lo = 0.0, hi = 0.0;
        long nonzero = 0;
        if (!t.values.empty()) {
            lo = hi = t.values.front();
            for (double v : t.values) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                if (v != 0.0) ++nonzero;
            }
        }
        std::printf("%s: %ld x %d, min %.6g, max %.6g, nonzero %ld\n", name,
                    t.n_states, t.n_actions, lo, hi, nonzero);
    };
    if (art.q) summarize("q_table", *art.q);
    if (art.critic) summarize("critic", art.critic->w);
    std::cout << "config:\n" << art.config_ini;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-reaching RL controller with Lyapunov-like stabilizer"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::optional<long> episodes, goals;
    std::optional<double> nu_bar;
    std::string rule, mode = "static";
    std::string benchmark_path, artifact_path;
    std::vector<std::string> artifact_paths;
    bool export_heatmaps = false, export_trajectories = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", flags.config_path, "Run config (ini)");
        cmd->add_option("--seed", flags.seed, "Root seed");
        cmd->add_option("--out", flags.out_dir, "Output directory");
    };

    auto* t = app.add_subcommand("train", "Train the benchmark policy");
    add_common(t);
    t->add_option("--episodes", episodes, "Training episodes");
    t->add_option("--rule", rule, "qlearning | sarsa");

    auto* r = app.add_subcommand("refine", "Stabilizer refinement");
    add_common(r);
    r->add_option("benchmark", benchmark_path, "Benchmark artifact")
        ->required();
    r->add_option("--episodes", episodes, "Refinement episodes");
    r->add_option("--nu-bar", nu_bar, "Decrease margin override");

    auto* e = app.add_subcommand("eval", "Matched-goal evaluation");
    add_common(e);
    e->add_option("artifacts", artifact_paths, "Policy artifacts")
        ->required();
    e->add_option("--goals", goals, "Number of evaluation goals");
    e->add_option("--mode", mode, "static | moving");
    e->add_flag("--export-heatmaps", export_heatmaps);
    e->add_flag("--export-trajectories", export_trajectories);

    auto* x = app.add_subcommand("export", "Dump an artifact");
    x->add_option("artifact", artifact_path, "Artifact path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_train(flags, episodes, rule);
        if (r->parsed()) return cmd_refine(flags, benchmark_path, episodes,
                                           nu_bar);
        if (e->parsed()) return cmd_eval(flags, artifact_paths, goals, mode,
                                         export_heatmaps,
                                         export_trajectories);
        if (x->parsed()) return cmd_export(artifact_path);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
    } catch (const ArtifactError& ex) {
        std::cerr << "artifact error: " << ex.what() << "\n";
        return kExitArtifactError;
    } catch (const std::exception& ex) {
        std::cerr << "runtime error: " << ex.what() << "\n";
        return kExitRuntimeError;
    }
    return 0;
}
