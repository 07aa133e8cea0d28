#pragma once

#include <optional>
#include <string>

#include "goalrl/config.hpp"

namespace goalrl {

inline constexpr int kArtifactFormatVersion = 1;

// Self-describing policy artifact: loading needs no external config.
struct PolicyArtifact {
    int format_version = kArtifactFormatVersion;
    BinningConfig bins;
    ActionGrid grid;
    std::optional<QTable> q;            // benchmark table
    std::optional<CriticState> critic;  // stabilizer critic
    // Provenance.
    std::string rule;  // "qlearning" | "sarsa" | "stabilizer"
    long episodes = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string config_ini;  // full run configuration, embedded

    // Space signature used for compatibility checks between artifacts.
    std::string space_signature() const;
};

void save_artifact(const PolicyArtifact& art, const std::string& path);
PolicyArtifact load_artifact(const std::string& path);

struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace goalrl
