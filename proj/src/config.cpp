#include "goalrl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace goalrl {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct IniMap {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    double num(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw std::invalid_argument("config: missing key " + key);
        }
        return std::stod(it->second);
    }
    double num(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : std::stod(it->second);
    }
    std::string str(const std::string& key, std::string fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? std::move(fallback) : it->second;
    }
};

IniMap parse_ini(const std::string& text) {
    IniMap ini;
    std::istringstream in(text);
    std::string line, section;
    auto trim = [](std::string s) {
        const char* ws = " \t\r\n";
        const auto a = s.find_first_not_of(ws);
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(ws);
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: malformed line: " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        ini.kv[section + "." + key] = val;
    }
    return ini;
}

}  // namespace

void RunConfig::rebuild_action_grid() {
    auto levels = [](double lo, double hi, double step) {
        std::vector<double> out;
        const int n = static_cast<int>(std::lround((hi - lo) / step)) + 1;
        for (int i = 0; i < n; ++i) out.push_back(lo + i * step);
        return out;
    };
    env.grid.a_v_levels =
        levels(env.limits.a_v_min, env.limits.a_v_max, da_v);
    env.grid.a_omega_levels =
        levels(env.limits.a_omega_min, env.limits.a_omega_max, da_omega);
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.rebuild_action_grid();
    return cfg;
}

std::string to_ini(const RunConfig& c) {
    std::ostringstream o;
    const auto& L = c.env.limits;
    const auto& B = c.env.bins;
    const auto& W = c.env.weights;
    const auto& S = c.stabilizer;
    o << "[run]\n";
    // out_dir is an invocation detail, not an experiment parameter; keeping
    // it out of the ini keeps config_hash stable across output locations.
    o << "seed = " << c.seed << "\n";
    o << "\n[simulation]\n";
    o << "dt_policy = " << fmt(L.dt_policy) << "\n";
    o << "dt_sim = " << fmt(L.dt_sim) << "\n";
    o << "x_min = " << fmt(L.workspace.x_min) << "\n";
    o << "x_max = " << fmt(L.workspace.x_max) << "\n";
    o << "y_min = " << fmt(L.workspace.y_min) << "\n";
    o << "y_max = " << fmt(L.workspace.y_max) << "\n";
    o << "goalTol = " << fmt(c.env.goal_tolerance) << "\n";
    o << "startMinDistToGoal = " << fmt(c.env.start_min_dist_to_goal) << "\n";
    o << "maxSteps = " << c.env.max_steps << "\n";
    o << "start_x = " << fmt(c.env.start.x) << "\n";
    o << "start_y = " << fmt(c.env.start.y) << "\n";
    o << "theta0 = " << fmt(c.env.start.theta) << "\n";
    o << "movingGoalSpeed = " << fmt(c.env.moving_goal_speed) << "\n";
    o << "movingHeadingJitter = " << fmt(c.env.moving.heading_jitter) << "\n";
    o << "\n[limits]\n";
    o << "v_min = " << fmt(L.v_min) << "\n";
    o << "v_max = " << fmt(L.v_max) << "\n";
    o << "omega_min = " << fmt(L.omega_min) << "\n";
    o << "omega_max = " << fmt(L.omega_max) << "\n";
    o << "a_v_min = " << fmt(L.a_v_min) << "\n";
    o << "a_v_max = " << fmt(L.a_v_max) << "\n";
    o << "a_omega_min = " << fmt(L.a_omega_min) << "\n";
    o << "a_omega_max = " << fmt(L.a_omega_max) << "\n";
    o << "da_v = " << fmt(c.da_v) << "\n";
    o << "da_omega = " << fmt(c.da_omega) << "\n";
    o << "\n[binning]\n";
    o << "n_d = " << B.n_d << "\n";
    o << "d_max = " << fmt(B.d_max) << "\n";
    o << "n_theta = " << B.n_theta << "\n";
    o << "n_v = " << B.n_v << "\n";
    o << "n_omega = " << B.n_omega << "\n";
    o << "\n[reward]\n";
    o << "k_step = " << fmt(W.k_step) << "\n";
    o << "k_d = " << fmt(W.k_d) << "\n";
    o << "k_timeout = " << fmt(W.k_timeout) << "\n";
    o << "k_theta = " << fmt(W.k_theta) << "\n";
    o << "k_omega = " << fmt(W.k_omega) << "\n";
    o << "k_v = " << fmt(W.k_v) << "\n";
    o << "k_lat = " << fmt(W.k_lat) << "\n";
    o << "k_a_v = " << fmt(W.k_a_v) << "\n";
    o << "k_a_omega = " << fmt(W.k_a_omega) << "\n";
    o << "k_ws = " << fmt(W.k_ws) << "\n";
    o << "k_wflip = " << fmt(W.k_wflip) << "\n";
    o << "k_heading_inc = " << fmt(W.k_heading_inc) << "\n";
    o << "k_heading_stall = " << fmt(W.k_heading_stall) << "\n";
    o << "k_wstop = " << fmt(W.k_wstop) << "\n";
    o << "k_wsign = " << fmt(W.k_wsign) << "\n";
    o << "w_db = " << fmt(W.w_db) << "\n";
    o << "e_db = " << fmt(W.e_db) << "\n";
    o << "e_pad = " << fmt(W.e_pad) << "\n";
    o << "a_omega_B = " << fmt(W.a_omega_brake) << "\n";
    o << "discounted_shaping = " << (W.discounted_shaping ? 1 : 0) << "\n";
    o << "e_lock = " << fmt(c.env.lock.e_lock) << "\n";
    o << "d_lock = " << fmt(c.env.lock.d_lock) << "\n";
    o << "\n[training]\n";
    o << "episodes = " << c.train.episodes << "\n";
    o << "alpha = " << fmt(c.train.alpha) << "\n";
    o << "gamma = " << fmt(c.train.gamma) << "\n";
    o << "eps0 = " << fmt(c.train.eps0) << "\n";
    o << "epsFinal = " << fmt(c.train.eps_final) << "\n";
    o << "rule = "
      << (c.train.rule == UpdateRule::QLearning ? "qlearning" : "sarsa")
      << "\n";
    o << "\n[stabilizer]\n";
    o << "episodes = " << c.refine_episodes << "\n";
    o << "alpha_crit = " << fmt(S.alpha_crit) << "\n";
    o << "gamma_crit = " << fmt(S.gamma_crit) << "\n";
    o << "nu_bar = " << fmt(S.nu_bar) << "\n";
    o << "C_low = " << fmt(S.c_min) << "\n";
    o << "C_up = " << fmt(S.c_max) << "\n";
    o << "w_d = " << fmt(S.cost.w_d) << "\n";
    o << "w_e = " << fmt(S.cost.w_e) << "\n";
    o << "w_u = " << fmt(S.cost.w_u) << "\n";
    o << "d_scale = " << fmt(S.cost.d_scale) << "\n";
    o << "knowledge_transfer = " << (S.knowledge_transfer ? 1 : 0) << "\n";
    o << "\n[evaluation]\n";
    o << "goals = " << c.eval_goals << "\n";
    o << "movingGoals = " << c.moving_goals << "\n";
    return o.str();
}

RunConfig from_ini(const std::string& text) {
    const IniMap ini = parse_ini(text);
    RunConfig c = default_config();
    auto& L = c.env.limits;
    auto& B = c.env.bins;
    auto& W = c.env.weights;
    auto& S = c.stabilizer;
    c.seed = static_cast<std::uint64_t>(ini.num("run.seed", 0));
    L.dt_policy = ini.num("simulation.dt_policy", L.dt_policy);
    L.dt_sim = ini.num("simulation.dt_sim", L.dt_sim);
    L.workspace.x_min = ini.num("simulation.x_min", L.workspace.x_min);
    L.workspace.x_max = ini.num("simulation.x_max", L.workspace.x_max);
    L.workspace.y_min = ini.num("simulation.y_min", L.workspace.y_min);
    L.workspace.y_max = ini.num("simulation.y_max", L.workspace.y_max);
    c.env.goal_tolerance =
        ini.num("simulation.goalTol", c.env.goal_tolerance);
    c.env.start_min_dist_to_goal = ini.num("simulation.startMinDistToGoal",
                                           c.env.start_min_dist_to_goal);
    c.env.max_steps =
        static_cast<long>(ini.num("simulation.maxSteps", c.env.max_steps));
    c.env.start.x = ini.num("simulation.start_x", c.env.start.x);
    c.env.start.y = ini.num("simulation.start_y", c.env.start.y);
    c.env.start.theta = ini.num("simulation.theta0", c.env.start.theta);
    c.env.moving_goal_speed =
        ini.num("simulation.movingGoalSpeed", c.env.moving_goal_speed);
    c.env.moving.heading_jitter =
        ini.num("simulation.movingHeadingJitter", c.env.moving.heading_jitter);
    L.v_min = ini.num("limits.v_min", L.v_min);
    L.v_max = ini.num("limits.v_max", L.v_max);
    L.omega_min = ini.num("limits.omega_min", L.omega_min);
    L.omega_max = ini.num("limits.omega_max", L.omega_max);
    L.a_v_min = ini.num("limits.a_v_min", L.a_v_min);
    L.a_v_max = ini.num("limits.a_v_max", L.a_v_max);
    L.a_omega_min = ini.num("limits.a_omega_min", L.a_omega_min);
    L.a_omega_max = ini.num("limits.a_omega_max", L.a_omega_max);
    c.da_v = ini.num("limits.da_v", c.da_v);
    c.da_omega = ini.num("limits.da_omega", c.da_omega);
    B.n_d = static_cast<int>(ini.num("binning.n_d", B.n_d));
    B.d_max = ini.num("binning.d_max", B.d_max);
    B.n_theta = static_cast<int>(ini.num("binning.n_theta", B.n_theta));
    B.n_v = static_cast<int>(ini.num("binning.n_v", B.n_v));
    B.n_omega = static_cast<int>(ini.num("binning.n_omega", B.n_omega));
    B.v_min = L.v_min;
    B.v_max = L.v_max;
    B.omega_min = L.omega_min;
    B.omega_max = L.omega_max;
    W.k_step = ini.num("reward.k_step", W.k_step);
    W.k_d = ini.num("reward.k_d", W.k_d);
    W.k_timeout = ini.num("reward.k_timeout", W.k_timeout);
    W.k_theta = ini.num("reward.k_theta", W.k_theta);
    W.k_omega = ini.num("reward.k_omega", W.k_omega);
    W.k_v = ini.num("reward.k_v", W.k_v);
    W.k_lat = ini.num("reward.k_lat", W.k_lat);
    W.k_a_v = ini.num("reward.k_a_v", W.k_a_v);
    W.k_a_omega = ini.num("reward.k_a_omega", W.k_a_omega);
    W.k_ws = ini.num("reward.k_ws", W.k_ws);
    W.k_wflip = ini.num("reward.k_wflip", W.k_wflip);
    W.k_heading_inc = ini.num("reward.k_heading_inc", W.k_heading_inc);
    W.k_heading_stall = ini.num("reward.k_heading_stall", W.k_heading_stall);
    W.k_wstop = ini.num("reward.k_wstop", W.k_wstop);
    W.k_wsign = ini.num("reward.k_wsign", W.k_wsign);
    W.w_db = ini.num("reward.w_db", W.w_db);
    W.e_db = ini.num("reward.e_db", W.e_db);
    W.e_pad = ini.num("reward.e_pad", W.e_pad);
    W.a_omega_brake = ini.num("reward.a_omega_B", W.a_omega_brake);
    W.discounted_shaping = ini.num("reward.discounted_shaping", 0) != 0;
    W.d_goal_tol = c.env.goal_tolerance;
    c.env.lock.e_lock = ini.num("reward.e_lock", c.env.lock.e_lock);
    c.env.lock.d_lock = ini.num("reward.d_lock", c.env.lock.d_lock);
    c.train.episodes =
        static_cast<long>(ini.num("training.episodes", c.train.episodes));
    c.train.alpha = ini.num("training.alpha", c.train.alpha);
    c.train.gamma = ini.num("training.gamma", c.train.gamma);
    c.train.eps0 = ini.num("training.eps0", c.train.eps0);
    c.train.eps_final = ini.num("training.epsFinal", c.train.eps_final);
    const std::string rule = ini.str("training.rule", "qlearning");
    if (rule == "qlearning") {
        c.train.rule = UpdateRule::QLearning;
    } else if (rule == "sarsa") {
        c.train.rule = UpdateRule::Sarsa;
    } else {
        throw std::invalid_argument("config: unknown rule: " + rule);
    }
    c.train.seed = c.seed;
    W.gamma = c.train.gamma;
    c.refine_episodes =
        static_cast<long>(ini.num("stabilizer.episodes", c.refine_episodes));
    S.alpha_crit = ini.num("stabilizer.alpha_crit", S.alpha_crit);
    S.gamma_crit = ini.num("stabilizer.gamma_crit", S.gamma_crit);
    S.nu_bar = ini.num("stabilizer.nu_bar", S.nu_bar);
    S.c_min = ini.num("stabilizer.C_low", S.c_min);
    S.c_max = ini.num("stabilizer.C_up", S.c_max);
    S.cost.w_d = ini.num("stabilizer.w_d", S.cost.w_d);
    S.cost.w_e = ini.num("stabilizer.w_e", S.cost.w_e);
    S.cost.w_u = ini.num("stabilizer.w_u", S.cost.w_u);
    S.cost.d_scale = ini.num("stabilizer.d_scale", S.cost.d_scale);
    S.knowledge_transfer = ini.num("stabilizer.knowledge_transfer", 1) != 0;
    c.eval_goals =
        static_cast<long>(ini.num("evaluation.goals", c.eval_goals));
    c.moving_goals =
        static_cast<long>(ini.num("evaluation.movingGoals", c.moving_goals));
    c.rebuild_action_grid();

    // Itemized validation before any compute.
    std::vector<std::string> errors;
    if (!(c.train.alpha > 0.0 && c.train.alpha <= 1.0)) {
        errors.push_back("alpha must be in (0, 1]");
    }
    if (!(c.train.gamma >= 0.0 && c.train.gamma < 1.0)) {
        errors.push_back("gamma must be in [0, 1)");
    }
    if (c.train.eps_final > c.train.eps0) {
        errors.push_back("epsFinal must not exceed eps0");
    }
    if (L.v_min > L.v_max) errors.push_back("v_min > v_max");
    if (L.omega_min > L.omega_max) errors.push_back("omega_min > omega_max");
    if (B.n_d < 1 || B.n_theta < 1 || B.n_v < 1 || B.n_omega < 1) {
        errors.push_back("bin counts must be >= 1");
    }
    const double ratio = L.dt_policy / L.dt_sim;
    if (std::abs(ratio - std::lround(ratio)) > 1e-9) {
        errors.push_back("dt_policy must be an integer multiple of dt_sim");
    }
    if (S.nu_bar <= 0.0) errors.push_back("nu_bar must be positive");
    if (!(S.gamma_crit > 0.0 && S.gamma_crit <= 1.0)) {
        errors.push_back("gamma_crit must be in (0, 1]");
    }
    if (!(S.c_min > 0.0 && S.c_min < S.c_max)) {
        errors.push_back("need 0 < C_low < C_up");
    }
    if (c.env.moving_goal_speed >= L.v_max) {
        errors.push_back("movingGoalSpeed must be below v_max");
    }
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_ini(ss.str());
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << to_ini(cfg);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string s = to_ini(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace goalrl
