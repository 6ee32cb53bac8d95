#include "parkopt/scenario_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace parkopt {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok, std::size_t row,
                    const std::string& col) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw SchemaError("slot " + std::to_string(row) + ": column " + col +
                          " has non-numeric value '" + tok + "'");
    }
}

} // namespace

LoadedScenario load_scenario_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path);

    LoadedScenario out;
    std::string line;
    std::string header;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::size_t colon = t.find(':');
            if (colon != std::string::npos) {
                const std::string key = trim(t.substr(1, colon - 1));
                const std::string val = trim(t.substr(colon + 1));
                if (!key.empty()) out.metadata[key] = val;
            }
            continue;
        }
        header = t;
        break;
    }
    if (header.empty()) throw SchemaError("scenario file has no header row");

    const auto units = out.metadata.find("units");
    if (units == out.metadata.end())
        throw UnitError("scenario file lacks the mandatory 'units' metadata");
    double energy_scale = 1.0, price_scale = 1.0;
    if (units->second == "MWh") {
        // native
    } else if (units->second == "kWh") {
        energy_scale = 1e-3;
        price_scale = 1e3;
    } else {
        throw UnitError("unknown energy unit '" + units->second +
                        "' (expected MWh or kWh)");
    }

    const auto cols = split(header, ',');
    std::vector<std::string> names;
    for (const auto& c : cols) names.push_back(trim(c));

    auto col_index = [&](const std::string& name) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            throw SchemaError("scenario header missing column " + name);
        return static_cast<std::size_t>(it - names.begin());
    };
    const std::size_t c_t = col_index("t");
    const std::size_t c_pe = col_index("p_e");
    const std::size_t c_pg = col_index("p_g");
    const std::size_t c_po = col_index("p_o");
    const std::size_t c_h = col_index("h_load");
    const std::size_t c_g = col_index("g_load");
    std::vector<std::size_t> c_r, c_x;
    for (std::size_t k = 1;; ++k) {
        const std::string name = "r_" + std::to_string(k);
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) break;
        c_r.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    for (std::size_t i = 1;; ++i) {
        const std::string name = "x_il_" + std::to_string(i);
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) break;
        c_x.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    if (c_r.empty()) throw SchemaError("scenario header missing column r_1");

    ScenarioSeries& s = out.series;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto toks = split(t, ',');
        if (toks.size() != names.size())
            throw SchemaError("slot " + std::to_string(row) + ": expected " +
                              std::to_string(names.size()) + " fields, got " +
                              std::to_string(toks.size()));
        (void)parse_number(trim(toks[c_t]), row, "t");
        s.p_e.push_back(price_scale * parse_number(trim(toks[c_pe]), row, "p_e"));
        s.p_g.push_back(price_scale * parse_number(trim(toks[c_pg]), row, "p_g"));
        s.p_o.push_back(price_scale * parse_number(trim(toks[c_po]), row, "p_o"));
        std::vector<double> r, x;
        for (std::size_t k = 0; k < c_r.size(); ++k)
            r.push_back(energy_scale *
                        parse_number(trim(toks[c_r[k]]), row,
                                     "r_" + std::to_string(k + 1)));
        for (std::size_t i = 0; i < c_x.size(); ++i)
            x.push_back(energy_scale *
                        parse_number(trim(toks[c_x[i]]), row,
                                     "x_il_" + std::to_string(i + 1)));
        s.r.push_back(std::move(r));
        s.x_il.push_back(std::move(x));
        s.h_load.push_back(energy_scale *
                           parse_number(trim(toks[c_h]), row, "h_load"));
        s.g_load.push_back(energy_scale *
                           parse_number(trim(toks[c_g]), row, "g_load"));
        ++row;
    }
    s.validate();
    return out;
}

void save_scenario_csv(const std::string& path, const ScenarioSeries& s,
                       std::map<std::string, std::string> metadata) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scenario file " + path);
    metadata["units"] = "MWh";
    for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << "\n";
    const std::size_t kk = s.r.empty() ? 0 : s.r[0].size();
    const std::size_t ii = s.x_il.empty() ? 0 : s.x_il[0].size();
    out << "t,p_e,p_g,p_o";
    for (std::size_t k = 1; k <= kk; ++k) out << ",r_" << k;
    for (std::size_t i = 1; i <= ii; ++i) out << ",x_il_" << i;
    out << ",h_load,g_load\n";
    for (std::size_t t = 0; t < s.size(); ++t) {
        out << t << ',' << format_double(s.p_e[t]) << ','
            << format_double(s.p_g[t]) << ',' << format_double(s.p_o[t]);
        for (std::size_t k = 0; k < kk; ++k)
            out << ',' << format_double(s.r[t][k]);
        for (std::size_t i = 0; i < ii; ++i)
            out << ',' << format_double(s.x_il[t][i]);
        out << ',' << format_double(s.h_load[t]) << ','
            << format_double(s.g_load[t]) << "\n";
    }
    if (!out) throw IoError("failed writing scenario file " + path);
}

EstimationData load_estimation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open estimation file " + path);
    EstimationData out;
    std::string line, header;
    std::map<std::string, std::string> meta;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::size_t colon = t.find(':');
            if (colon != std::string::npos)
                meta[trim(t.substr(1, colon - 1))] = trim(t.substr(colon + 1));
            continue;
        }
        header = t;
        break;
    }
    if (header != "t,price,x_il,delta")
        throw SchemaError("estimation file header must be t,price,x_il,delta");
    const auto beta_it = meta.find("beta");
    if (beta_it == meta.end())
        throw SchemaError("estimation file lacks the 'beta' share metadata");
    for (const std::string& tok : split(beta_it->second, ';'))
        if (!trim(tok).empty())
            out.beta.push_back(parse_number(trim(tok), 0, "beta"));
    if (const auto it = meta.find("eta"); it != meta.end())
        out.eta = parse_number(it->second, 0, "eta");
    if (const auto it = meta.find("window"); it != meta.end())
        out.window = static_cast<int>(parse_number(it->second, 0, "window"));
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto toks = split(t, ',');
        if (toks.size() != 4)
            throw SchemaError("slot " + std::to_string(row) +
                              ": expected 4 fields");
        out.prices.push_back(parse_number(trim(toks[1]), row, "price"));
        out.x_il.push_back(parse_number(trim(toks[2]), row, "x_il"));
        out.deltas.push_back(parse_number(trim(toks[3]), row, "delta"));
        ++row;
    }
    if (out.x_il.empty())
        throw SchemaError("estimation file has no data rows");
    return out;
}

namespace {

using nlohmann::json;

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key))
        throw SchemaError("config: missing field '" + key + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError("config: field '" + key + "' in " + where +
                          " has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

} // namespace

ParkConfig load_park_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config: invalid JSON: ") + e.what());
    }

    ParkConfig cfg;
    cfg.p_e_cap = get_field<double>(j, "p_e_cap", "root");
    cfg.p_o_floor = get_field<double>(j, "p_o_floor", "root");
    cfg.e_max = get_field<double>(j, "e_max", "root");
    cfg.e_o_max = get_field<double>(j, "e_o_max", "root");
    cfg.g_max = get_field<double>(j, "g_max", "root");
    cfg.shift_cap = get_or<double>(j, "shift_cap", cfg.shift_cap);
    cfg.shift_window = get_or<int>(j, "shift_window", cfg.shift_window);
    cfg.heat_share = get_field<std::vector<double>>(j, "heat_share", "root");

    const json hubs = get_field<json>(j, "hubs", "root");
    for (std::size_t k = 0; k < hubs.size(); ++k) {
        const std::string where = "hubs[" + std::to_string(k) + "]";
        const json& h = hubs[k];
        HubParams p;
        p.b_min = get_field<double>(h, "b_min", where);
        p.b_max = get_field<double>(h, "b_max", where);
        p.w_min = get_field<double>(h, "w_min", where);
        p.w_max = get_field<double>(h, "w_max", where);
        p.b_init = get_field<double>(h, "b_init", where);
        p.w_init = get_field<double>(h, "w_init", where);
        p.c_e_max = get_field<double>(h, "c_e_max", where);
        p.d_e_max = get_field<double>(h, "d_e_max", where);
        p.c_h_max = get_field<double>(h, "c_h_max", where);
        p.d_h_max = get_field<double>(h, "d_h_max", where);
        p.eta_ce = get_or<double>(h, "eta_ce", 1.0);
        p.eta_de = get_or<double>(h, "eta_de", 1.0);
        p.eta_ch = get_or<double>(h, "eta_ch", 1.0);
        p.eta_dh = get_or<double>(h, "eta_dh", 1.0);
        p.eta_pg = get_field<double>(h, "eta_pg", where);
        p.eta_hg = get_field<double>(h, "eta_hg", where);
        p.eta_bg = get_field<double>(h, "eta_bg", where);
        p.e_chp_max = get_field<double>(h, "e_chp_max", where);
        p.h_chp_max = get_field<double>(h, "h_chp_max", where);
        p.h_b_max = get_field<double>(h, "h_b_max", where);
        cfg.hubs.push_back(p);
    }

    const json shares = get_field<json>(j, "shares", "root");
    for (std::size_t k = 0; k < shares.size(); ++k) {
        const std::string where = "shares[" + std::to_string(k) + "]";
        TradeShares t;
        t.e_buy = get_field<double>(shares[k], "e_buy", where);
        t.e_sell = get_field<double>(shares[k], "e_sell", where);
        t.gas = get_field<double>(shares[k], "gas", where);
        cfg.shares.push_back(t);
    }

    cfg.x_max = get_field<std::vector<std::array<double, 2>>>(j, "x_max",
                                                              "root");

    const json elastic = get_field<json>(j, "elastic", "root");
    for (std::size_t k = 0; k < elastic.size(); ++k) {
        std::vector<std::array<ElasticLoad, kEnergyCount>> hub_loads;
        for (std::size_t q = 0; q < elastic[k].size(); ++q) {
            const std::string where = "elastic[" + std::to_string(k) + "][" +
                                      std::to_string(q) + "]";
            if (elastic[k][q].size() != kEnergyCount)
                throw SchemaError("config: " + where +
                                  " needs one entry per energy");
            std::array<ElasticLoad, kEnergyCount> pair;
            for (int e = 0; e < kEnergyCount; ++e) {
                const json& el = elastic[k][q][e];
                pair[e].a = get_field<double>(el, "a", where);
                pair[e].b = get_field<double>(el, "b", where);
                pair[e].x_max = get_field<double>(el, "x_max", where);
            }
            hub_loads.push_back(pair);
        }
        cfg.elastic.push_back(std::move(hub_loads));
    }

    const json users = get_or<json>(j, "users", json::array());
    for (std::size_t i = 0; i < users.size(); ++i) {
        const std::string where = "users[" + std::to_string(i) + "]";
        UserParams u;
        u.a = get_field<double>(users[i], "a", where);
        u.b = get_field<double>(users[i], "b", where);
        u.hub_weight =
            get_field<std::vector<double>>(users[i], "hub_weight", where);
        u.gamma = get_or<double>(users[i], "gamma", 0.0);
        u.alpha = get_or<double>(users[i], "alpha", 1.0);
        cfg.users.push_back(std::move(u));
    }

    cfg.validate();
    return cfg;
}

} // namespace parkopt
