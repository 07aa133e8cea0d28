#pragma once

#include <cstdint>
#include <vector>

#include "goalrl/kinematics.hpp"

namespace goalrl {

// Uniform binning of the continuous features (d, e, v, omega) into the
// discrete 4-tuple state. Upper range boundaries clamp into the last bin.
struct BinningConfig {
    int n_d = 36;
    double d_max = 36.0;
    int n_theta = 24;  // over [-pi, pi)
    int n_v = 4;
    double v_min = 0.0;
    double v_max = 0.25;
    int n_omega = 5;
    double omega_min = -0.15;
    double omega_max = 0.15;

    long cardinality() const {
        return static_cast<long>(n_d) * n_theta * n_v * n_omega;
    }
};

struct DiscreteState {
    int i_d = 0;
    int i_e = 0;
    int i_v = 0;
    int i_omega = 0;
    long packed = 0;

    bool operator==(const DiscreteState&) const = default;
};

struct ActionGrid {
    std::vector<double> a_v_levels{-0.10, 0.0, 0.10};
    std::vector<double> a_omega_levels{-0.02, 0.0, 0.02};

    int size() const {
        return static_cast<int>(a_v_levels.size() * a_omega_levels.size());
    }
};

DiscreteState quantize(double d, double e, double v, double omega,
                       const BinningConfig& cfg);

// Row-major mixed-radix encoding of the 4D index tuple.
long pack(const DiscreteState& ds, const BinningConfig& cfg);
DiscreteState unpack(long label, const BinningConfig& cfg);

// Deterministic row-major Cartesian product, stable across runs.
std::vector<Action> enumerate_actions(const ActionGrid& grid);

// Bin-center feature values, used for critic embeddings and heatmap axes.
double bin_center_d(int i_d, const BinningConfig& cfg);
double bin_center_e(int i_e, const BinningConfig& cfg);
double bin_center_v(int i_v, const BinningConfig& cfg);
double bin_center_omega(int i_omega, const BinningConfig& cfg);

}  // namespace goalrl
