#pragma once

#include <cstdint>
#include <string>

#include "goalrl/learner.hpp"
#include "goalrl/stabilizer.hpp"

namespace goalrl {

// Full run configuration: every simulator, binning, reward, training and
// stabilizer parameter, keyed in the config file by the names used in the
// parameter tables (goalTol, e_lock, nu_bar, ...).
struct RunConfig {
    EnvConfig env;
    TrainConfig train;
    StabilizerParams stabilizer;
    long refine_episodes = 2000;
    long eval_goals = 2000;
    long moving_goals = 7;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    // Acceleration grid construction (levels = min..max in steps).
    double da_v = 0.10;
    double da_omega = 0.02;

    void rebuild_action_grid();
};

RunConfig default_config();

// INI-style serialization; reloading a written config reproduces the run.
std::string to_ini(const RunConfig& cfg);
RunConfig from_ini(const std::string& text);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

// FNV-1a over the canonical serialized form.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace goalrl
