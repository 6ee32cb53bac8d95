#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "parkopt/errors.hpp"
#include "parkopt/experiment.hpp"
#include "parkopt/incentive.hpp"
#include "parkopt/oracle.hpp"
#include "parkopt/scenario_io.hpp"

namespace {

using parkopt::Experiment;
using parkopt::Report;
using ojson = nlohmann::ordered_json;

struct CommonArgs {
    std::string scenario, config;
    std::string mode = "fast", ablation = "full", rho = "auto";
    double sigma = 0.2, tol = 0.01;
    std::uint64_t seed = 1;
    std::string out_dir = "out", format = "csv", name = "run";
};

void add_common(CLI::App* cmd, CommonArgs* a, bool needs_config) {
    cmd->add_option("--scenario", a->scenario,
                    "Scenario CSV or generator spec JSON")
        ->required();
    auto* cfg = cmd->add_option("--config", a->config, "Park config JSON");
    if (needs_config) cfg->required();
    cmd->add_option("--mode", a->mode, "fast|plain")
        ->check(CLI::IsMember({"fast", "plain"}));
    cmd->add_option("--ablation", a->ablation, "full|ta|oa|ca")
        ->check(CLI::IsMember({"full", "ta", "oa", "ca"}));
    cmd->add_option("--rho", a->rho, "auto or a positive stepsize");
    cmd->add_option("--sigma", a->sigma, "fast-timescale stepsize");
    cmd->add_option("--tol", a->tol, "mini-slot stopping tolerance");
    cmd->add_option("--seed", a->seed, "generator seed");
    cmd->add_option("--out-dir", a->out_dir, "report directory");
    cmd->add_option("--format", a->format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--name", a->name, "experiment name");
}

Experiment to_experiment(const CommonArgs& a) {
    Experiment e;
    e.name = a.name;
    e.scenario_path = a.scenario;
    e.config_path = a.config;
    e.mode = parkopt::parse_mode(a.mode);
    e.ablation = parkopt::parse_ablation(a.ablation);
    if (a.rho != "auto") {
        try {
            e.rho = std::stod(a.rho);
        } catch (const std::exception&) {
            throw parkopt::InvalidConfig("--rho must be 'auto' or a number");
        }
        if (*e.rho <= 0.0)
            throw parkopt::InvalidConfig("--rho must be positive");
    }
    e.sigma = a.sigma;
    e.tol = a.tol;
    e.seed = a.seed;
    return e;
}

parkopt::ReportFormat to_format(const std::string& s) {
    return s == "json" ? parkopt::ReportFormat::Json
                       : parkopt::ReportFormat::Csv;
}

int finish(const std::vector<Report>& reports, const CommonArgs& a) {
    parkopt::emit_report(reports, a.out_dir, to_format(a.format));
    int bad = 0;
    for (const Report& r : reports) {
        std::printf("%-28s total %-14.6f mean-iter %-8.2f %s\n",
                    r.name.c_str(), r.total_cost, r.mean_iterations,
                    r.violations() ? "INVARIANT-VIOLATION" : "ok");
        if (r.violations()) bad = 1;
    }
    return bad;
}

ojson dispatch_json(const parkopt::Dispatch& d) {
    ojson hubs = ojson::array();
    for (const auto& h : d.hub) {
        ojson j;
        j["c_e"] = h.c_e;
        j["d_e"] = h.d_e;
        j["c_h"] = h.c_h;
        j["d_h"] = h.d_h;
        j["g_chp"] = h.g_chp;
        j["g_b"] = h.g_b;
        j["e_buy"] = h.e_buy;
        j["e_sell"] = h.e_sell;
        j["spill_e"] = h.spill_e;
        j["spill_h"] = h.spill_h;
        hubs.push_back(std::move(j));
    }
    ojson out;
    out["hubs"] = std::move(hubs);
    out["x_el"] = d.x_el;
    return out;
}

int cmd_verify(const CommonArgs& a, std::size_t slot) {
    const parkopt::ParkConfig cfg = parkopt::load_park_config(a.config);
    const parkopt::LoadedScenario sc = parkopt::load_scenario_csv(a.scenario);
    if (slot >= sc.series.size())
        throw parkopt::InvalidConfig("slot index beyond scenario horizon");
    const parkopt::SlotData s = sc.series.slot(slot);
    const std::vector<double> zeros(cfg.hub_count(), 0.0);

    const parkopt::OracleResult res =
        parkopt::centralized_subproblem(cfg, s, zeros, zeros);

    ojson out;
    out["slot"] = slot;
    out["method"] = "projected-descent";
    out["objective"] = res.objective;
    out["iterations"] = res.iterations;
    out["projected_gradient"] = res.projected_gradient;
    out["balance_residual"] = res.balance_residual;
    out["tolerance"] = parkopt::OracleOptions{}.pgd_tol;
    out["dispatch"] = dispatch_json(res.dispatch);

    std::filesystem::create_directories(a.out_dir);
    const auto path = std::filesystem::path(a.out_dir) / "oracle.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw parkopt::IoError("cannot write " + path.string());
    f << out.dump(2) << "\n";
    std::printf("oracle objective %.12g (%d iterations) -> %s\n",
                res.objective, res.iterations, path.string().c_str());
    return 0;
}

int cmd_estimate(const CommonArgs& a) {
    const parkopt::EstimationData data =
        parkopt::load_estimation_csv(a.scenario);
    const parkopt::ShiftMatrixFit fit = parkopt::solve_shift_matrix(
        data.deltas, data.prices, data.x_il, data.window);
    const parkopt::ShiftModel model =
        parkopt::fit_shift_models(fit.matrix, data.prices, data.x_il,
                                  data.beta, data.eta, data.window);

    ojson out;
    out["structure"] = fit.structure;
    out["residual"] = fit.residual;
    out["alpha"] = model.alpha;
    out["gamma"] = model.gamma;
    out["beta"] = data.beta;
    out["eta"] = model.eta;
    out["window"] = model.window;

    std::filesystem::create_directories(a.out_dir);
    const auto path = std::filesystem::path(a.out_dir) / "estimate.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw parkopt::IoError("cannot write " + path.string());
    f << out.dump(2) << "\n";
    std::printf("fitted %zu users, residual %.3g -> %s\n",
                model.users(), fit.residual, path.string().c_str());
    return 0;
}

int cmd_report(const std::string& manifest_path, const CommonArgs& a) {
    std::ifstream in(manifest_path);
    if (!in) throw parkopt::IoError("cannot open manifest " + manifest_path);
    ojson manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw parkopt::SchemaError(std::string("manifest: invalid JSON: ") +
                                   e.what());
    }
    if (!manifest.is_array())
        throw parkopt::SchemaError("manifest: expected a JSON array");

    std::vector<Experiment> list;
    for (const auto& m : manifest) {
        Experiment e;
        e.name = m.at("name").get<std::string>();
        e.scenario_path = m.at("scenario").get<std::string>();
        e.config_path = m.at("config").get<std::string>();
        e.mode = parkopt::parse_mode(m.at("mode").get<std::string>());
        e.ablation =
            parkopt::parse_ablation(m.at("ablation").get<std::string>());
        if (!m.at("rho").is_string()) e.rho = m.at("rho").get<double>();
        e.sigma = m.at("sigma").get<double>();
        e.tol = m.at("tolerance").get<double>();
        e.seed = m.at("seed").get<std::uint64_t>();
        list.push_back(std::move(e));
    }
    const std::vector<Report> reports = parkopt::run_experiments(list);
    return finish(reports, a);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Industrial-park energy scheduling testbed"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, verify_args, estimate_args, report_args;
    std::string sweep_parameter;
    std::vector<double> sweep_values;
    std::size_t verify_slot = 0;
    std::string manifest_path;

    CLI::App* run = app.add_subcommand("run", "Run one experiment");
    add_common(run, &run_args, true);

    CLI::App* sweep =
        app.add_subcommand("sweep", "Run one experiment per sweep value");
    add_common(sweep, &sweep_args, true);
    sweep->add_option("--parameter", sweep_parameter, "spread|sigma|tol")
        ->required()
        ->check(CLI::IsMember({"spread", "sigma", "tol"}));
    sweep->add_option("--values", sweep_values, "sweep values")
        ->required()
        ->delimiter(',');

    CLI::App* verify =
        app.add_subcommand("verify", "Certify one slot with the oracle");
    add_common(verify, &verify_args, true);
    verify->add_option("--slot", verify_slot, "slot index to certify");

    CLI::App* estimate = app.add_subcommand(
        "estimate", "Fit willingness parameters from shift observations");
    add_common(estimate, &estimate_args, false);

    CLI::App* report = app.add_subcommand(
        "report", "Re-run the experiments in a manifest and re-emit reports");
    report->add_option("manifest", manifest_path, "manifest.json path")
        ->required();
    report->add_option("--out-dir", report_args.out_dir, "report directory");
    report->add_option("--format", report_args.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const std::vector<Report> reports =
                parkopt::run_experiments({to_experiment(run_args)});
            return finish(reports, run_args);
        }
        if (sweep->parsed()) {
            Experiment base = to_experiment(sweep_args);
            base.sweep = parkopt::SweepSpec{sweep_parameter, sweep_values};
            const std::vector<Report> reports =
                parkopt::run_experiments(parkopt::expand_sweep(base));
            return finish(reports, sweep_args);
        }
        if (verify->parsed()) return cmd_verify(verify_args, verify_slot);
        if (estimate->parsed()) return cmd_estimate(estimate_args);
        if (report->parsed()) return cmd_report(manifest_path, report_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
