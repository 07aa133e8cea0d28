#include "goalrl/statespace.hpp"

#include <cmath>
#include <stdexcept>

namespace goalrl {

static int bin_index(double x, double lo, double hi, int n) {
    if (x <= lo) return 0;
    if (x >= hi) return n - 1;
    int i = static_cast<int>((x - lo) / (hi - lo) * n);
    return std::min(i, n - 1);
}

DiscreteState quantize(double d, double e, double v, double omega,
                       const BinningConfig& cfg) {
    DiscreteState ds;
    ds.i_d = bin_index(d, 0.0, cfg.d_max, cfg.n_d);
    ds.i_e = bin_index(e, -M_PI, M_PI, cfg.n_theta);
    ds.i_v = bin_index(v, cfg.v_min, cfg.v_max, cfg.n_v);
    ds.i_omega = bin_index(omega, cfg.omega_min, cfg.omega_max, cfg.n_omega);
    ds.packed = pack(ds, cfg);
    return ds;
}

long pack(const DiscreteState& ds, const BinningConfig& cfg) {
    if (ds.i_d < 0 || ds.i_d >= cfg.n_d || ds.i_e < 0 ||
        ds.i_e >= cfg.n_theta || ds.i_v < 0 || ds.i_v >= cfg.n_v ||
        ds.i_omega < 0 || ds.i_omega >= cfg.n_omega) {
        throw std::out_of_range("pack: bin index out of range");
    }
    return ((static_cast<long>(ds.i_d) * cfg.n_theta + ds.i_e) * cfg.n_v +
            ds.i_v) *
               cfg.n_omega +
           ds.i_omega;
}

DiscreteState unpack(long label, const BinningConfig& cfg) {
    if (label < 0 || label >= cfg.cardinality()) {
        throw std::out_of_range("unpack: label out of range");
    }
    DiscreteState ds;
    ds.packed = label;
    ds.i_omega = static_cast<int>(label % cfg.n_omega);
    label /= cfg.n_omega;
    ds.i_v = static_cast<int>(label % cfg.n_v);
    label /= cfg.n_v;
    ds.i_e = static_cast<int>(label % cfg.n_theta);
    ds.i_d = static_cast<int>(label / cfg.n_theta);
    return ds;
}

std::vector<Action> enumerate_actions(const ActionGrid& grid) {
    std::vector<Action> actions;
    actions.reserve(grid.size());
    for (double av : grid.a_v_levels) {
        for (double aw : grid.a_omega_levels) {
            actions.push_back({av, aw});
        }
    }
    return actions;
}

double bin_center_d(int i_d, const BinningConfig& cfg) {
    return (i_d + 0.5) * cfg.d_max / cfg.n_d;
}

double bin_center_e(int i_e, const BinningConfig& cfg) {
    return -M_PI + (i_e + 0.5) * 2.0 * M_PI / cfg.n_theta;
}

double bin_center_v(int i_v, const BinningConfig& cfg) {
    return cfg.v_min + (i_v + 0.5) * (cfg.v_max - cfg.v_min) / cfg.n_v;
}

double bin_center_omega(int i_omega, const BinningConfig& cfg) {
    return cfg.omega_min +
           (i_omega + 0.5) * (cfg.omega_max - cfg.omega_min) / cfg.n_omega;
}

}  // namespace goalrl
