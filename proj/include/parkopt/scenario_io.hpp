#pragma once

// Flat-file formats. Scenario CSV:
//
//   # units: MWh
//   # any-other-key: value
//   t,p_e,p_g,p_o,r_1..r_K,x_il_1..x_il_I,h_load,g_load
//   0,3.05,0.15,0.6,...
//
// The leading comment block is sidecar metadata; `units` is mandatory and
// names the energy unit of every quantity column (prices are per that
// unit). kWh inputs are converted to MWh on load. Park configuration is a
// JSON document mirroring ParkConfig field for field.

#include <map>
#include <string>

#include "parkopt/park.hpp"

namespace parkopt {

// %.17g: shortest text that round-trips a double bit-for-bit.
std::string format_double(double v);

struct LoadedScenario {
    ScenarioSeries series;
    std::map<std::string, std::string> metadata;
};

// Throws SchemaError (layout, missing column), UnitError (missing/unknown
// units), NegativeValue / SchemaError with slot index (via validation).
LoadedScenario load_scenario_csv(const std::string& path);

void save_scenario_csv(const std::string& path, const ScenarioSeries& s,
                       std::map<std::string, std::string> metadata = {});

ParkConfig load_park_config(const std::string& path);

// Willingness-estimation input: per-slot aggregate shiftable demand, the
// announced price, and the observed net demand change, plus the users'
// consumption shares in the metadata block:
//
//   # beta: 0.6;0.4
//   # eta: 0.15
//   # window: 4
//   t,price,x_il,delta
struct EstimationData {
    std::vector<double> x_il, prices, deltas;
    std::vector<double> beta;
    double eta = 0.15;
    int window = 4;
};

EstimationData load_estimation_csv(const std::string& path);

} // namespace parkopt
