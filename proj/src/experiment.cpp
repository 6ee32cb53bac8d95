#include "parkopt/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "parkopt/errors.hpp"
#include "parkopt/generator.hpp"
#include "parkopt/oracle.hpp"
#include "parkopt/scenario_io.hpp"
#include "parkopt/parallel.hpp"

namespace parkopt {

using ojson = nlohmann::ordered_json;

const char* mode_name(Mode m) {
    return m == Mode::Fast ? "fast" : "plain";
}

const char* ablation_name(Ablation a) {
    switch (a) {
        case Ablation::Full: return "full";
        case Ablation::NoStorage: return "ta";
        case Ablation::NoRenewable: return "oa";
        case Ablation::NoIncentive: return "ca";
    }
    return "full";
}

Mode parse_mode(const std::string& s) {
    if (s == "fast") return Mode::Fast;
    if (s == "plain") return Mode::Plain;
    throw InvalidConfig("unknown mode '" + s + "' (expected fast|plain)");
}

Ablation parse_ablation(const std::string& s) {
    if (s == "full") return Ablation::Full;
    if (s == "ta") return Ablation::NoStorage;
    if (s == "oa") return Ablation::NoRenewable;
    if (s == "ca") return Ablation::NoIncentive;
    throw InvalidConfig("unknown ablation '" + s +
                        "' (expected full|ta|oa|ca)");
}

std::vector<std::pair<int, double>> iteration_cdf(
    const std::vector<int>& iterations) {
    std::vector<std::pair<int, double>> out;
    if (iterations.empty()) return out;
    std::vector<int> sorted = iterations;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

namespace {

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace

std::vector<Experiment> expand_sweep(const Experiment& base) {
    if (!base.sweep) return {base};
    const SweepSpec& sw = *base.sweep;
    std::vector<Experiment> out;
    for (double v : sw.values) {
        Experiment e = base;
        e.sweep.reset();
        e.name = base.name + "_" + sw.parameter + "_" + short_number(v);
        if (sw.parameter == "spread") {
            e.spread = v;
        } else if (sw.parameter == "sigma") {
            e.sigma = v;
        } else if (sw.parameter == "tol") {
            e.tol = v;
        } else {
            throw InvalidConfig("unknown sweep parameter '" + sw.parameter +
                                "' (expected spread|sigma|tol)");
        }
        out.push_back(std::move(e));
    }
    return out;
}

Report run_experiment(const Experiment& e) {
    ParkConfig cfg = load_park_config(e.config_path);

    ScenarioSeries series;
    if (is_gen_spec(e.scenario_path)) {
        ScenarioGenSpec spec = load_gen_spec(e.scenario_path);
        if (e.spread) {
            // Keep the sale band's offset above the floor and its width;
            // only the floor moves. Column draws elsewhere are unchanged
            // because the draw layout is range-independent.
            const double new_floor = cfg.p_e_cap - *e.spread;
            if (new_floor < 0.0)
                throw InvalidConfig("spread exceeds the purchase price cap");
            const double margin = spec.p_o.lo - cfg.p_o_floor;
            const double width = spec.p_o.hi - spec.p_o.lo;
            spec.p_o = {new_floor + margin, new_floor + margin + width};
            cfg.p_o_floor = new_floor;
        }
        series = generate_scenario(spec, cfg, e.seed);
    } else {
        series = load_scenario_csv(e.scenario_path).series;
        if (e.spread) {
            const double new_floor = cfg.p_e_cap - *e.spread;
            if (new_floor < 0.0)
                throw InvalidConfig("spread exceeds the purchase price cap");
            const double shift = new_floor - cfg.p_o_floor;
            for (double& p : series.p_o) p += shift;
            cfg.p_o_floor = new_floor;
            series.validate();
        }
    }

    SolverConfig sc;
    sc.sigma = e.sigma;
    sc.tol = e.tol;
    sc.minislot_cap = e.minislot_cap;
    sc.rho = e.rho;
    sc.mode = e.mode;
    sc.ablation = e.ablation;

    HorizonResult hr = run_horizon(series, cfg, sc);

    Report r;
    r.name = e.name;
    r.total_cost = hr.total_cost;
    r.mean_iterations = hr.mean_iterations;
    r.slot_cost.reserve(hr.rows.size());
    r.iterations.reserve(hr.rows.size());
    for (const auto& row : hr.rows) {
        r.slot_cost.push_back(row.cost);
        r.iterations.push_back(row.iterations);
    }
    r.cdf = iteration_cdf(r.iterations);
    r.lemma2_violations = hr.lemma2_violations;
    r.soc_violations = hr.soc_violations;
    r.threshold_violations = hr.threshold_violations;
    r.feasibility_failures = hr.feasibility_failures;
    r.flagged_slots = hr.flagged_slots;
    r.rows = std::move(hr.rows);
    r.scenario_path = e.scenario_path;
    r.config_path = e.config_path;
    r.mode = e.mode;
    r.ablation = e.ablation;
    r.rho = e.rho;
    r.sigma = e.sigma;
    r.tol = e.tol;
    r.seed = e.seed;

    if (e.with_bound && e.ablation == Ablation::Full &&
        !r.slot_cost.empty()) {
        const double rho =
            e.rho ? *e.rho : rho_min(cfg, cfg.p_e_cap, cfg.p_o_floor);
        const LowerBoundResult lb = relaxed_lower_bound(series, cfg);
        const double n = static_cast<double>(r.slot_cost.size());
        const double mean = r.total_cost / n;
        double var = 0.0;
        for (double c : r.slot_cost) var += (c - mean) * (c - mean);
        const double se = n > 1.5 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
        r.bound.checked = true;
        r.bound.online_average = mean;
        r.bound.lower_bound = lb.average;
        r.bound.gap_bound = gap_bound(rho, cfg);
        r.bound.standard_error = se;
        r.bound.margin =
            lb.average + r.bound.gap_bound + 3.0 * se - mean;
        r.bound.pass = r.bound.margin >= 0.0;
    }
    return r;
}

std::vector<Report> run_experiments(const std::vector<Experiment>& list) {
    std::vector<Report> out(list.size());
    parallel_for(list.size(),
                 [&](std::size_t i) { out[i] = run_experiment(list[i]); });
    return out;
}

namespace {

std::string safe_name(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                c == '_')
                   ? c
                   : '_';
    return out.empty() ? std::string("experiment") : out;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> trajectory_columns(std::size_t k) {
    std::vector<std::string> cols{"t", "cost", "iterations"};
    for (std::size_t i = 1; i <= k; ++i)
        cols.push_back("lambda_ke_" + std::to_string(i));
    for (std::size_t i = 1; i <= k; ++i)
        cols.push_back("lambda_kh_" + std::to_string(i));
    for (std::size_t i = 1; i <= k; ++i) cols.push_back("B_" + std::to_string(i));
    for (std::size_t i = 1; i <= k; ++i) cols.push_back("W_" + std::to_string(i));
    cols.insert(cols.end(), {"E", "G", "E_o", "p"});
    return cols;
}

std::vector<double> trajectory_values(const TrajectoryRow& row) {
    std::vector<double> v;
    v.push_back(row.cost);
    v.push_back(row.iterations);
    v.insert(v.end(), row.lambda_e.begin(), row.lambda_e.end());
    v.insert(v.end(), row.lambda_h.begin(), row.lambda_h.end());
    v.insert(v.end(), row.b.begin(), row.b.end());
    v.insert(v.end(), row.w.begin(), row.w.end());
    v.push_back(row.e);
    v.push_back(row.g);
    v.push_back(row.e_o);
    v.push_back(row.price);
    return v;
}

ojson bound_json(const BoundCheck& b) {
    if (!b.checked) return nullptr;
    ojson j;
    j["online_average"] = b.online_average;
    j["lower_bound"] = b.lower_bound;
    j["gap_bound"] = b.gap_bound;
    j["standard_error"] = b.standard_error;
    j["margin"] = b.margin;
    j["pass"] = b.pass;
    return j;
}

} // namespace

void emit_report(const std::vector<Report>& reports,
                 const std::string& out_dir, ReportFormat format) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    ojson manifest = ojson::array();
    std::string costs_csv = "name,total_cost\n";
    ojson costs_json = ojson::array();

    for (const Report& r : reports) {
        const std::string stem = safe_name(r.name);
        const std::size_t k = r.rows.empty() ? 0 : r.rows[0].lambda_e.size();
        const auto cols = trajectory_columns(k);

        if (format == ReportFormat::Csv) {
            std::string body;
            for (std::size_t c = 0; c < cols.size(); ++c)
                body += (c ? "," : "") + cols[c];
            body += "\n";
            for (const auto& row : r.rows) {
                body += std::to_string(row.t);
                for (double v : trajectory_values(row))
                    body += "," + format_double(v);
                body += "\n";
            }
            write_text(dir / (stem + "_trajectory.csv"), body);

            std::string cdf = "iterations,fraction\n";
            for (const auto& [it, frac] : r.cdf)
                cdf += std::to_string(it) + "," + format_double(frac) + "\n";
            write_text(dir / (stem + "_cdf.csv"), cdf);
        } else {
            ojson traj;
            traj["columns"] = cols;
            ojson rows = ojson::array();
            for (const auto& row : r.rows) {
                ojson jr = ojson::array();
                jr.push_back(row.t);
                for (double v : trajectory_values(row)) jr.push_back(v);
                rows.push_back(std::move(jr));
            }
            traj["rows"] = std::move(rows);
            write_text(dir / (stem + "_trajectory.json"),
                       traj.dump(2) + "\n");

            ojson cdf = ojson::array();
            for (const auto& [it, frac] : r.cdf)
                cdf.push_back(ojson{{"iterations", it}, {"fraction", frac}});
            write_text(dir / (stem + "_cdf.json"), cdf.dump(2) + "\n");
        }

        ojson summary;
        summary["name"] = r.name;
        summary["slots"] = r.slot_cost.size();
        summary["total_cost"] = r.total_cost;
        summary["mean_iterations"] = r.mean_iterations;
        summary["lemma2_violations"] = r.lemma2_violations;
        summary["soc_violations"] = r.soc_violations;
        summary["threshold_violations"] = r.threshold_violations;
        summary["feasibility_failures"] = r.feasibility_failures;
        summary["flagged_slots"] = r.flagged_slots;
        summary["bound_check"] = bound_json(r.bound);
        write_text(dir / (stem + "_summary.json"), summary.dump(2) + "\n");

        costs_csv += r.name + "," + format_double(r.total_cost) + "\n";
        costs_json.push_back(
            ojson{{"name", r.name}, {"total_cost", r.total_cost}});

        ojson m;
        m["name"] = r.name;
        m["scenario"] = r.scenario_path;
        m["config"] = r.config_path;
        m["mode"] = mode_name(r.mode);
        m["ablation"] = ablation_name(r.ablation);
        m["rho"] = r.rho ? ojson(*r.rho) : ojson("auto");
        m["sigma"] = r.sigma;
        m["tolerance"] = r.tol;
        m["seed"] = r.seed;
        manifest.push_back(std::move(m));
    }

    if (!reports.empty()) {
        if (format == ReportFormat::Csv)
            write_text(dir / "costs.csv", costs_csv);
        else
            write_text(dir / "costs.json", costs_json.dump(2) + "\n");
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace parkopt
