#pragma once

// Synthetic i.i.d. scenario generation. A generator spec is a JSON file
//
//   { "kind": "iid", "slots": 10000,
//     "p_e": [3.0, 3.2], "p_o": [0.5, 0.65], "p_g": 0.15,
//     "r_quiet": [0.0, 0.25], "r_active": [2.35, 2.65],
//     "r_active_prob": 0.5,
//     "x_il": [0.08, 0.25], "h_load": [0.15, 0.35], "g_load": [0.2, 0.6] }
//
// Ranges are uniform supports. Renewable infeed per hub is a two-state
// mixture: with probability r_active_prob the slot draws from r_active,
// otherwise from r_quiet. The per-slot draw order is fixed (prices, then
// per-hub infeed, then per-user shiftable demand, then loads) and every
// slot consumes the same number of RNG words, so scenarios generated from
// specs that differ only in a range are column-identical elsewhere.

#include <cstdint>
#include <string>

#include "parkopt/park.hpp"
#include "parkopt/rng.hpp"

namespace parkopt {

struct ScenarioGenSpec {
    std::size_t slots = 0;
    Uniform p_e;
    Uniform p_o;
    double p_g = 0.0;
    Uniform r_quiet;
    Uniform r_active;
    double r_active_prob = 0.0; // 0 disables the active state entirely
    Uniform x_il;
    Uniform h_load;
    Uniform g_load;
};

// True when the file parses as JSON with "kind": "iid". Used to decide
// whether a --scenario argument is a spec or a CSV table.
bool is_gen_spec(const std::string& path);

ScenarioGenSpec load_gen_spec(const std::string& path);

ScenarioSeries generate_scenario(const ScenarioGenSpec& spec,
                                 const ParkConfig& cfg, std::uint64_t seed);

} // namespace parkopt
