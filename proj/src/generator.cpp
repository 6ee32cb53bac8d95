#include "parkopt/generator.hpp"

#include <fstream>

#include "json.hpp"
#include "parkopt/errors.hpp"

namespace parkopt {

namespace {

using nlohmann::json;

Uniform range_field(const json& j, const std::string& key) {
    if (!j.contains(key))
        throw SchemaError("generator spec: missing range '" + key + "'");
    const json& r = j.at(key);
    if (!r.is_array() || r.size() != 2)
        throw SchemaError("generator spec: '" + key + "' must be [lo, hi]");
    Uniform u{r[0].get<double>(), r[1].get<double>()};
    if (!(u.lo <= u.hi))
        throw SchemaError("generator spec: '" + key + "' has lo > hi");
    return u;
}

json parse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open generator spec " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("generator spec: invalid JSON: ") +
                          e.what());
    }
    return j;
}

} // namespace

bool is_gen_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) return false;
    json j = json::parse(in, nullptr, false);
    return j.is_object() && j.contains("kind") && j["kind"] == "iid";
}

ScenarioGenSpec load_gen_spec(const std::string& path) {
    const json j = parse(path);
    if (!j.contains("kind") || j["kind"] != "iid")
        throw SchemaError("generator spec: unknown kind (expected \"iid\")");
    ScenarioGenSpec s;
    if (!j.contains("slots"))
        throw SchemaError("generator spec: missing 'slots'");
    s.slots = j["slots"].get<std::size_t>();
    s.p_e = range_field(j, "p_e");
    s.p_o = range_field(j, "p_o");
    if (!j.contains("p_g"))
        throw SchemaError("generator spec: missing 'p_g'");
    s.p_g = j["p_g"].get<double>();
    s.r_quiet = range_field(j, "r_quiet");
    s.r_active_prob =
        j.contains("r_active_prob") ? j["r_active_prob"].get<double>() : 0.0;
    s.r_active = j.contains("r_active") ? range_field(j, "r_active") : s.r_quiet;
    s.x_il = range_field(j, "x_il");
    s.h_load = range_field(j, "h_load");
    s.g_load = range_field(j, "g_load");
    return s;
}

ScenarioSeries generate_scenario(const ScenarioGenSpec& spec,
                                 const ParkConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ScenarioSeries s;
    const std::size_t kk = cfg.hub_count();
    const std::size_t ii = cfg.user_count();
    for (std::size_t t = 0; t < spec.slots; ++t) {
        s.p_e.push_back(sample(spec.p_e, rng));
        s.p_g.push_back(spec.p_g);
        s.p_o.push_back(sample(spec.p_o, rng));
        std::vector<double> r(kk);
        for (std::size_t k = 0; k < kk; ++k) {
            // Two draws per hub unconditionally, so the stream layout does
            // not depend on which state fires.
            const bool active = u01(rng) < spec.r_active_prob;
            r[k] = sample(active ? spec.r_active : spec.r_quiet, rng);
        }
        s.r.push_back(std::move(r));
        std::vector<double> x(ii);
        for (std::size_t i = 0; i < ii; ++i) x[i] = sample(spec.x_il, rng);
        s.x_il.push_back(std::move(x));
        s.h_load.push_back(sample(spec.h_load, rng));
        s.g_load.push_back(sample(spec.g_load, rng));
    }
    s.validate();
    return s;
}

} // namespace parkopt
