#include "goalrl/artifact.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace goalrl {

using nlohmann::json;

std::string PolicyArtifact::space_signature() const {
    std::ostringstream o;
    o << bins.n_d << "x" << bins.n_theta << "x" << bins.n_v << "x"
      << bins.n_omega << "/" << grid.a_v_levels.size() << "x"
      << grid.a_omega_levels.size();
    return o.str();
}

namespace {

json table_to_json(const QTable& q) {
    return json{{"n_states", q.n_states},
                {"n_actions", q.n_actions},
                {"values", q.values}};
}

QTable table_from_json(const json& j) {
    QTable q;
    q.n_states = j.at("n_states").get<long>();
    q.n_actions = j.at("n_actions").get<int>();
    q.values = j.at("values").get<std::vector<double>>();
    if (static_cast<long>(q.values.size()) !=
        q.n_states * static_cast<long>(q.n_actions)) {
        throw ArtifactError("artifact: table size mismatch");
    }
    return q;
}

}  // namespace

void save_artifact(const PolicyArtifact& art, const std::string& path) {
    json j;
    j["format_version"] = art.format_version;
    j["bins"] = {{"n_d", art.bins.n_d},         {"d_max", art.bins.d_max},
                 {"n_theta", art.bins.n_theta}, {"n_v", art.bins.n_v},
                 {"v_min", art.bins.v_min},     {"v_max", art.bins.v_max},
                 {"n_omega", art.bins.n_omega},
                 {"omega_min", art.bins.omega_min},
                 {"omega_max", art.bins.omega_max}};
    j["grid"] = {{"a_v_levels", art.grid.a_v_levels},
                 {"a_omega_levels", art.grid.a_omega_levels}};
    if (art.q) j["q"] = table_to_json(*art.q);
    if (art.critic) {
        const CriticState& c = *art.critic;
        j["critic"] = {{"w", table_to_json(c.w)},
                       {"phi_norm2", c.phi_norm2},
                       {"nu_bar", c.nu_bar},
                       {"c_min", c.c_min},
                       {"c_max", c.c_max},
                       {"alpha_crit", c.alpha_crit},
                       {"gamma_crit", c.gamma_crit},
                       {"accepted_count", c.accepted_count}};
    }
    j["provenance"] = {{"rule", art.rule},
                       {"episodes", art.episodes},
                       {"seed", art.seed},
                       {"config_hash", art.config_hash}};
    j["config_ini"] = art.config_ini;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("artifact: cannot write " + path);
    out << j.dump();
}

PolicyArtifact load_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("artifact: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ArtifactError(std::string("artifact: parse error: ") + e.what());
    }
    PolicyArtifact art;
    art.format_version = j.at("format_version").get<int>();
    if (art.format_version != kArtifactFormatVersion) {
        throw ArtifactError("artifact: format version " +
                            std::to_string(art.format_version) +
                            " found, supported: " +
                            std::to_string(kArtifactFormatVersion));
    }
    const json& b = j.at("bins");
    art.bins.n_d = b.at("n_d").get<int>();
    art.bins.d_max = b.at("d_max").get<double>();
    art.bins.n_theta = b.at("n_theta").get<int>();
    art.bins.n_v = b.at("n_v").get<int>();
    art.bins.v_min = b.at("v_min").get<double>();
    art.bins.v_max = b.at("v_max").get<double>();
    art.bins.n_omega = b.at("n_omega").get<int>();
    art.bins.omega_min = b.at("omega_min").get<double>();
    art.bins.omega_max = b.at("omega_max").get<double>();
    art.grid.a_v_levels = j.at("grid").at("a_v_levels").get<std::vector<double>>();
    art.grid.a_omega_levels =
        j.at("grid").at("a_omega_levels").get<std::vector<double>>();
    if (j.contains("q")) art.q = table_from_json(j.at("q"));
    if (j.contains("critic")) {
        CriticState c;
        const json& cj = j.at("critic");
        c.w = table_from_json(cj.at("w"));
        c.phi_norm2 = cj.at("phi_norm2").get<std::vector<double>>();
        c.nu_bar = cj.at("nu_bar").get<double>();
        c.c_min = cj.at("c_min").get<double>();
        c.c_max = cj.at("c_max").get<double>();
        c.alpha_crit = cj.at("alpha_crit").get<double>();
        c.gamma_crit = cj.value("gamma_crit", 0.95);
        c.accepted_count = cj.value("accepted_count", 0L);
        art.critic = std::move(c);
    }
    const json& p = j.at("provenance");
    art.rule = p.at("rule").get<std::string>();
    art.episodes = p.at("episodes").get<long>();
    art.seed = p.at("seed").get<std::uint64_t>();
    art.config_hash = p.at("config_hash").get<std::uint64_t>();
    art.config_ini = j.at("config_ini").get<std::string>();
    return art;
}

}  // namespace goalrl
