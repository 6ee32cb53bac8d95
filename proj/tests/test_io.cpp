#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "parkopt/errors.hpp"
#include "parkopt/experiment.hpp"
#include "parkopt/generator.hpp"
#include "parkopt/scenario_io.hpp"

using namespace parkopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "parkopt_io" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_file(const fs::path& dir, const std::string& name,
                    const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The caught message, or "" when nothing was thrown.
template <typename E, typename Fn>
std::string thrown_message(Fn&& fn) {
    try {
        fn();
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

nlohmann::ordered_json clearing_config_json() {
    using ojson = nlohmann::ordered_json;
    ojson hub;
    hub["b_min"] = 0.0;
    hub["b_max"] = 1.0;
    hub["w_min"] = 0.0;
    hub["w_max"] = 1.0;
    hub["b_init"] = 0.5;
    hub["w_init"] = 0.5;
    hub["c_e_max"] = 0.0;
    hub["d_e_max"] = 0.0;
    hub["c_h_max"] = 0.0;
    hub["d_h_max"] = 0.0;
    hub["eta_pg"] = 0.35;
    hub["eta_hg"] = 0.45;
    hub["eta_bg"] = 0.85;
    hub["e_chp_max"] = 3.5;
    hub["h_chp_max"] = 4.5;
    hub["h_b_max"] = 2.0;

    ojson el_e{{"a", -1.0}, {"b", 7.0}, {"x_max", 10.0}};
    ojson el_h{{"a", -1.0}, {"b", 0.0}, {"x_max", 0.0}};

    ojson j;
    j["p_e_cap"] = 3.6;
    j["p_o_floor"] = 0.2;
    j["e_max"] = 1.0;
    j["e_o_max"] = 0.0;
    j["g_max"] = 0.0;
    j["heat_share"] = {1.0};
    j["hubs"] = ojson::array({hub});
    j["shares"] =
        ojson::array({ojson{{"e_buy", 1.0}, {"e_sell", 0.0}, {"gas", 0.0}}});
    j["x_max"] = ojson::array({ojson::array({10.0, 5.0})});
    j["elastic"] =
        ojson::array({ojson::array({ojson::array({el_e, el_h})})});
    return j;
}

ScenarioSeries six_slot_series() {
    ScenarioSeries s;
    for (double p : {3.0, 2.6, 3.4, 3.0, 2.8, 3.2}) {
        s.p_e.push_back(p);
        s.p_g.push_back(0.1);
        s.p_o.push_back(0.5);
        s.r.push_back({0.0});
        s.x_il.push_back({});
        s.h_load.push_back(0.0);
        s.g_load.push_back(0.0);
    }
    return s;
}

} // namespace

TEST_CASE("doubles format to shortest round-trip text") {
    // (std::stod rejects denormals with ERANGE, so the probe values stay
    // inside the normal range.)
    for (double v : {0.1, 1.0 / 3.0, 0.30000000000000004, 12345.6789,
                     1e-300, 1e300, 3.141592653589793}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("scenario files round-trip bit for bit") {
    const fs::path dir = scratch_dir("roundtrip");
    ScenarioSeries s;
    s.p_e = {3.0000000000000004, 2.7};
    s.p_g = {0.1, 1.0 / 7.0};
    s.p_o = {1.0 / 3.0, 0.2};
    s.r = {{0.30000000000000004, 1e-17}, {0.0, 2.5000000000000004}};
    s.x_il = {{0.12345678901234567, 0.25}, {0.0, 0.7000000000000001}};
    s.h_load = {0.5, 0.0};
    s.g_load = {0.0, 1.25};

    const fs::path p = dir / "scenario.csv";
    save_scenario_csv(p.string(), s, {{"note", "hand built"}});
    const LoadedScenario back = load_scenario_csv(p.string());

    CHECK(back.metadata.at("units") == "MWh");
    CHECK(back.metadata.at("note") == "hand built");
    REQUIRE(back.series.size() == 2);
    for (std::size_t t = 0; t < 2; ++t) {
        CHECK(back.series.p_e[t] == s.p_e[t]);
        CHECK(back.series.p_g[t] == s.p_g[t]);
        CHECK(back.series.p_o[t] == s.p_o[t]);
        CHECK(back.series.h_load[t] == s.h_load[t]);
        CHECK(back.series.g_load[t] == s.g_load[t]);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(back.series.r[t][k] == s.r[t][k]);
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(back.series.x_il[t][i] == s.x_il[t][i]);
    }

    // Saving what was loaded reproduces the file byte for byte.
    const fs::path p2 = dir / "scenario2.csv";
    save_scenario_csv(p2.string(), back.series, {{"note", "hand built"}});
    CHECK(read_file(p) == read_file(p2));
}

TEST_CASE("kilowatt-hour inputs are converted on load") {
    const fs::path dir = scratch_dir("units");
    const fs::path p = write_file(dir, "kwh.csv",
                                  "# units: kWh\n"
                                  "t,p_e,p_g,p_o,r_1,x_il_1,h_load,g_load\n"
                                  "0,0.003,0.0001,0.0005,500,100,250,0\n");
    const LoadedScenario in = load_scenario_csv(p.string());
    CHECK(in.series.p_e[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(in.series.p_g[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(in.series.p_o[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(in.series.r[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(in.series.x_il[0][0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(in.series.h_load[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("scenario schema problems name the offender") {
    const fs::path dir = scratch_dir("schema");
    const std::string units = "# units: MWh\n";

    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_scenario_csv((dir / "nope.csv").string()),
                        IoError);
    }
    SUBCASE("no header") {
        const fs::path p = write_file(dir, "empty.csv", units);
        CHECK_THROWS_AS(load_scenario_csv(p.string()), SchemaError);
    }
    SUBCASE("missing units metadata") {
        const fs::path p =
            write_file(dir, "nounits.csv",
                       "t,p_e,p_g,p_o,r_1,h_load,g_load\n0,1,1,1,0,0,0\n");
        CHECK_THROWS_AS(load_scenario_csv(p.string()), UnitError);
    }
    SUBCASE("unknown units") {
        const fs::path p = write_file(
            dir, "gwh.csv",
            "# units: GWh\nt,p_e,p_g,p_o,r_1,h_load,g_load\n0,1,1,1,0,0,0\n");
        const std::string msg = thrown_message<UnitError>(
            [&] { load_scenario_csv(p.string()); });
        CHECK(msg.find("GWh") != std::string::npos);
    }
    SUBCASE("missing price column") {
        const fs::path p = write_file(
            dir, "nopo.csv", units + "t,p_e,p_g,r_1,h_load,g_load\n");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_scenario_csv(p.string()); });
        CHECK(msg.find("p_o") != std::string::npos);
    }
    SUBCASE("missing infeed column") {
        const fs::path p = write_file(
            dir, "nor.csv", units + "t,p_e,p_g,p_o,h_load,g_load\n");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_scenario_csv(p.string()); });
        CHECK(msg.find("r_1") != std::string::npos);
    }
    SUBCASE("non-numeric token points at slot and column") {
        const fs::path p = write_file(
            dir, "token.csv",
            units + "t,p_e,p_g,p_o,r_1,h_load,g_load\n0,3,abc,0.5,0,0,0\n");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_scenario_csv(p.string()); });
        CHECK(msg.find("slot 0") != std::string::npos);
        CHECK(msg.find("p_g") != std::string::npos);
    }
    SUBCASE("ragged row") {
        const fs::path p = write_file(
            dir, "ragged.csv",
            units + "t,p_e,p_g,p_o,r_1,h_load,g_load\n0,3,0.1,0.5,0,0\n");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_scenario_csv(p.string()); });
        CHECK(msg.find("expected 7 fields") != std::string::npos);
    }
}

TEST_CASE("config files load field for field") {
    const fs::path dir = scratch_dir("config");
    const fs::path p =
        write_file(dir, "park.json", clearing_config_json().dump(2) + "\n");
    const ParkConfig cfg = load_park_config(p.string());

    CHECK(cfg.p_e_cap == 3.6);
    CHECK(cfg.p_o_floor == 0.2);
    CHECK(cfg.hub_count() == 1);
    CHECK(cfg.hubs[0].b_max == 1.0);
    CHECK(cfg.hubs[0].e_chp_max == 3.5);
    CHECK(cfg.hubs[0].eta_ce == 1.0); // omitted, defaulted
    CHECK(cfg.shares[0].e_buy == 1.0);
    CHECK(cfg.x_max[0][0] == 10.0);
    CHECK(cfg.x_max[0][1] == 5.0);
    CHECK(cfg.elastic[0][0][0].b == 7.0);
    CHECK(cfg.elastic[0][0][1].x_max == 0.0);
    CHECK(cfg.user_count() == 0); // users omitted
}

TEST_CASE("config schema problems name the missing field") {
    const fs::path dir = scratch_dir("config_bad");

    SUBCASE("missing root field") {
        auto j = clearing_config_json();
        j.erase("e_max");
        const fs::path p = write_file(dir, "noemax.json", j.dump());
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_park_config(p.string()); });
        CHECK(msg.find("e_max") != std::string::npos);
    }
    SUBCASE("missing hub field") {
        auto j = clearing_config_json();
        j["hubs"][0].erase("eta_pg");
        const fs::path p = write_file(dir, "noeta.json", j.dump());
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_park_config(p.string()); });
        CHECK(msg.find("eta_pg") != std::string::npos);
        CHECK(msg.find("hubs[0]") != std::string::npos);
    }
    SUBCASE("elastic entry without both energies") {
        auto j = clearing_config_json();
        j["elastic"][0][0].erase(1);
        const fs::path p = write_file(dir, "oneenergy.json", j.dump());
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_park_config(p.string()); });
        CHECK(msg.find("one entry per energy") != std::string::npos);
    }
    SUBCASE("broken json") {
        const fs::path p = write_file(dir, "broken.json", "{ \"p_e_cap\": ");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_park_config(p.string()); });
        CHECK(msg.find("invalid JSON") != std::string::npos);
    }
}

TEST_CASE("estimation files carry shares and defaults") {
    const fs::path dir = scratch_dir("estimation");

    const fs::path p = write_file(dir, "est.csv",
                                  "# beta: 0.6;0.4\n"
                                  "# eta: 0.2\n"
                                  "# window: 3\n"
                                  "t,price,x_il,delta\n"
                                  "0,0.5,1.25,-0.1\n"
                                  "1,0.55,1.5,0.04\n");
    const EstimationData d = load_estimation_csv(p.string());
    REQUIRE(d.beta.size() == 2);
    CHECK(d.beta[0] == 0.6);
    CHECK(d.beta[1] == 0.4);
    CHECK(d.eta == 0.2);
    CHECK(d.window == 3);
    REQUIRE(d.prices.size() == 2);
    CHECK(d.prices[1] == 0.55);
    CHECK(d.x_il[0] == 1.25);
    CHECK(d.deltas[1] == 0.04);

    const fs::path q = write_file(dir, "defaults.csv",
                                  "# beta: 1.0\n"
                                  "t,price,x_il,delta\n"
                                  "0,0.5,1.0,0.0\n");
    const EstimationData e = load_estimation_csv(q.string());
    CHECK(e.eta == 0.15);
    CHECK(e.window == 4);

    SUBCASE("wrong header") {
        const fs::path b = write_file(dir, "hdr.csv",
                                      "# beta: 1.0\nt,price,delta\n");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_estimation_csv(b.string()); });
        CHECK(msg.find("t,price,x_il,delta") != std::string::npos);
    }
    SUBCASE("missing shares") {
        const fs::path b = write_file(
            dir, "nobeta.csv", "t,price,x_il,delta\n0,0.5,1,0\n");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_estimation_csv(b.string()); });
        CHECK(msg.find("beta") != std::string::npos);
    }
    SUBCASE("no data rows") {
        const fs::path b =
            write_file(dir, "norows.csv", "# beta: 1.0\nt,price,x_il,delta\n");
        CHECK_THROWS_AS(load_estimation_csv(b.string()), SchemaError);
    }
}

TEST_CASE("generator specs draw a fixed layout") {
    const fs::path dir = scratch_dir("genspec");
    const std::string spec_text =
        "{ \"kind\": \"iid\", \"slots\": 40,\n"
        "  \"p_e\": [3.0, 3.2], \"p_o\": [0.5, 0.65], \"p_g\": 0.15,\n"
        "  \"r_quiet\": [0.0, 0.25], \"r_active\": [2.35, 2.65],\n"
        "  \"r_active_prob\": 0.5,\n"
        "  \"x_il\": [0.08, 0.25], \"h_load\": [0.15, 0.35],\n"
        "  \"g_load\": [0.2, 0.6] }\n";
    const fs::path p = write_file(dir, "spec.json", spec_text);

    CHECK(is_gen_spec(p.string()));
    CHECK_FALSE(is_gen_spec((dir / "absent.json").string()));
    const fs::path notspec = write_file(dir, "table.csv", "t,p_e\n0,3\n");
    CHECK_FALSE(is_gen_spec(notspec.string()));

    const ScenarioGenSpec spec = load_gen_spec(p.string());
    CHECK(spec.slots == 40);
    CHECK(spec.p_g == 0.15);

    const ParkConfig cfg = testing::desk_config();
    const ScenarioSeries a = generate_scenario(spec, cfg, 42);
    const ScenarioSeries b = generate_scenario(spec, cfg, 42);
    const ScenarioSeries c = generate_scenario(spec, cfg, 43);
    REQUIRE(a.size() == 40);
    CHECK(a.p_e == b.p_e);
    CHECK(a.r == b.r);
    CHECK(a.x_il == b.x_il);
    CHECK(a.p_e != c.p_e);

    bool saw_active = false, saw_quiet = false;
    for (std::size_t t = 0; t < a.size(); ++t) {
        CHECK(a.p_e[t] >= 3.0);
        CHECK(a.p_e[t] <= 3.2);
        CHECK(a.p_o[t] >= 0.5);
        CHECK(a.p_o[t] <= 0.65);
        const double r = a.r[t][0];
        CHECK((r <= 0.25 || r >= 2.35));
        (r >= 2.35 ? saw_active : saw_quiet) = true;
    }
    CHECK(saw_active);
    CHECK(saw_quiet);

    // Changing one range leaves every other column untouched because each
    // slot consumes a fixed number of draws.
    std::string wider = spec_text;
    const auto at = wider.find("[0.08, 0.25]");
    REQUIRE(at != std::string::npos);
    wider.replace(at, 12, "[0.50, 0.90]");
    const fs::path p2 = write_file(dir, "spec2.json", wider);
    const ScenarioSeries w = generate_scenario(load_gen_spec(p2.string()),
                                               cfg, 42);
    CHECK(w.p_e == a.p_e);
    CHECK(w.p_o == a.p_o);
    CHECK(w.r == a.r);
    CHECK(w.h_load == a.h_load);
    CHECK(w.g_load == a.g_load);
    CHECK(w.x_il != a.x_il);
    for (std::size_t t = 0; t < w.size(); ++t) {
        CHECK(w.x_il[t][0] >= 0.5);
        CHECK(w.x_il[t][0] <= 0.9);
    }

    SUBCASE("spec schema errors") {
        const fs::path b1 = write_file(dir, "nokind.json", "{\"slots\": 5}");
        CHECK_THROWS_AS(load_gen_spec(b1.string()), SchemaError);
        const fs::path b2 = write_file(
            dir, "flipped.json",
            "{\"kind\":\"iid\",\"slots\":5,\"p_e\":[3.2,3.0]}");
        const std::string msg = thrown_message<SchemaError>(
            [&] { load_gen_spec(b2.string()); });
        CHECK(msg.find("p_e") != std::string::npos);
        CHECK_THROWS_AS(load_gen_spec(notspec.string()), SchemaError);
    }
}

TEST_CASE("iteration cdf is monotone and ends at one") {
    CHECK(iteration_cdf({}).empty());

    const auto single = iteration_cdf({4});
    REQUIRE(single.size() == 1);
    CHECK(single[0].first == 4);
    CHECK(single[0].second == 1.0);

    const auto cdf = iteration_cdf({5, 3, 5, 7, 3, 3});
    REQUIRE(cdf.size() == 3);
    CHECK(cdf[0] == std::pair<int, double>(3, 0.5));
    CHECK(cdf[1] == std::pair<int, double>(5, 5.0 / 6.0));
    CHECK(cdf[2] == std::pair<int, double>(7, 1.0));
    for (std::size_t i = 1; i < cdf.size(); ++i) {
        CHECK(cdf[i].first > cdf[i - 1].first);
        CHECK(cdf[i].second > cdf[i - 1].second);
    }
}

TEST_CASE("mode and ablation names round-trip") {
    for (const std::string m : {"fast", "plain"})
        CHECK(mode_name(parse_mode(m)) == m);
    for (const std::string a : {"full", "ta", "oa", "ca"})
        CHECK(ablation_name(parse_ablation(a)) == a);
    CHECK_THROWS_AS(parse_mode("warp"), InvalidConfig);
    CHECK_THROWS_AS(parse_ablation("none"), InvalidConfig);
}

TEST_CASE("sweep expansion names each variant") {
    Experiment base;
    base.name = "run";
    CHECK(expand_sweep(base).size() == 1);
    CHECK(expand_sweep(base)[0].name == "run");

    base.sweep = SweepSpec{"spread", {2.8, 1.4, 0.7}};
    const auto variants = expand_sweep(base);
    REQUIRE(variants.size() == 3);
    CHECK(variants[0].name == "run_spread_2.8");
    CHECK(variants[1].name == "run_spread_1.4");
    CHECK(variants[2].name == "run_spread_0.7");
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(variants[i].spread.has_value());
        CHECK(*variants[i].spread == base.sweep->values[i]);
        CHECK_FALSE(variants[i].sweep.has_value());
    }

    base.sweep = SweepSpec{"sigma", {0.1}};
    CHECK(expand_sweep(base)[0].sigma == 0.1);
    base.sweep = SweepSpec{"rho", {1.0}};
    CHECK_THROWS_AS(expand_sweep(base), InvalidConfig);
}

TEST_CASE("an experiment runs end to end from files") {
    const fs::path dir = scratch_dir("experiment");
    const fs::path cfg_path =
        write_file(dir, "park.json", clearing_config_json().dump(2) + "\n");
    const fs::path sc_path = dir / "scenario.csv";
    save_scenario_csv(sc_path.string(), six_slot_series());

    Experiment e;
    e.name = "demo";
    e.scenario_path = sc_path.string();
    e.config_path = cfg_path.string();

    const Report r = run_experiment(e);
    CHECK(r.slot_cost.size() == 6);
    // Each slot clears at the unit purchase share: cost p_e - 6, total -18,
    // up to the fast-loop tolerance.
    CHECK(std::abs(r.total_cost - (-18.0)) <= 0.3);
    CHECK(r.lemma2_violations == 0);
    CHECK(r.soc_violations == 0);
    CHECK(r.feasibility_failures == 0);
    CHECK_FALSE(r.violations());
    CHECK(r.bound.checked);
    CHECK(r.bound.gap_bound == doctest::Approx(0.0)); // no storage headroom
    CHECK(r.bound.pass);

    // Ablated runs skip the bound: it is a claim about the full method.
    Experiment ta = e;
    ta.name = "demo_ta";
    ta.ablation = Ablation::NoStorage;
    CHECK_FALSE(run_experiment(ta).bound.checked);

    // Oversized spread requests are rejected before any work happens.
    Experiment wide = e;
    wide.spread = 4.0; // cap is 3.6
    CHECK_THROWS_AS(run_experiment(wide), InvalidConfig);

    // Batch order and results are independent of scheduling.
    const std::vector<Report> batch = run_experiments({e, ta, e});
    REQUIRE(batch.size() == 3);
    CHECK(batch[0].name == "demo");
    CHECK(batch[1].name == "demo_ta");
    CHECK(batch[0].total_cost == batch[2].total_cost);
    CHECK(batch[0].total_cost == r.total_cost);
}

TEST_CASE("reports are emitted byte-stable with a manifest") {
    const fs::path dir = scratch_dir("emit");
    const fs::path cfg_path =
        write_file(dir, "park.json", clearing_config_json().dump(2) + "\n");
    const fs::path sc_path = dir / "scenario.csv";
    save_scenario_csv(sc_path.string(), six_slot_series());

    Experiment e;
    e.name = "demo run"; // exercises filename sanitising
    e.scenario_path = sc_path.string();
    e.config_path = cfg_path.string();
    const std::vector<Report> reports = {run_experiment(e)};

    const fs::path out_a = dir / "a";
    const fs::path out_b = dir / "b";
    emit_report(reports, out_a.string(), ReportFormat::Csv);
    emit_report(reports, out_b.string(), ReportFormat::Csv);

    const std::vector<std::string> csv_files = {
        "demo_run_trajectory.csv", "demo_run_cdf.csv",
        "demo_run_summary.json", "costs.csv", "manifest.json"};
    for (const auto& f : csv_files) {
        CAPTURE(f);
        REQUIRE(fs::exists(out_a / f));
        CHECK(read_file(out_a / f) == read_file(out_b / f));
    }

    const std::string traj = read_file(out_a / "demo_run_trajectory.csv");
    CHECK(traj.rfind("t,cost,iterations,lambda_ke_1,lambda_kh_1,"
                     "B_1,W_1,E,G,E_o,p\n", 0) == 0);
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 7); // header + 6 slots

    const std::string cdf = read_file(out_a / "demo_run_cdf.csv");
    CHECK(cdf.rfind("iterations,fraction\n", 0) == 0);
    CHECK(cdf.find(",1\n") != std::string::npos); // last fraction reaches 1

    const auto summary = nlohmann::json::parse(
        read_file(out_a / "demo_run_summary.json"));
    CHECK(summary.at("name") == "demo run");
    CHECK(summary.at("slots") == 6);
    CHECK(summary.at("lemma2_violations") == 0);
    CHECK(summary.at("bound_check").at("pass") == true);

    const auto manifest =
        nlohmann::json::parse(read_file(out_a / "manifest.json"));
    REQUIRE(manifest.is_array());
    REQUIRE(manifest.size() == 1);
    CHECK(manifest[0].at("scenario") == sc_path.string());
    CHECK(manifest[0].at("config") == cfg_path.string());
    CHECK(manifest[0].at("mode") == "fast");
    CHECK(manifest[0].at("ablation") == "full");
    CHECK(manifest[0].at("rho") == "auto");
    CHECK(manifest[0].at("sigma") == 0.2);
    CHECK(manifest[0].at("tolerance") == 0.01);
    CHECK(manifest[0].at("seed") == 1);

    const fs::path out_j = dir / "j";
    emit_report(reports, out_j.string(), ReportFormat::Json);
    CHECK(fs::exists(out_j / "demo_run_trajectory.json"));
    CHECK(fs::exists(out_j / "demo_run_cdf.json"));
    CHECK(fs::exists(out_j / "costs.json"));
    const auto jt = nlohmann::json::parse(
        read_file(out_j / "demo_run_trajectory.json"));
    CHECK(jt.at("columns").size() == 11);
    CHECK(jt.at("rows").size() == 6);

    const fs::path out_e = dir / "empty";
    emit_report({}, out_e.string(), ReportFormat::Csv);
    CHECK(read_file(out_e / "manifest.json") == "[]\n");
    CHECK_FALSE(fs::exists(out_e / "costs.csv"));
}
