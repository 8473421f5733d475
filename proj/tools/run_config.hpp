#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emfg/cce_scan.hpp"
#include "emfg/equilibria.hpp"
#include "emfg/model.hpp"
#include "emfg/simulate.hpp"

namespace emfg::cli {

using json = nlohmann::json;

enum class Command { Mfc, Nash, CceCheck, CceScan, BestCce, Sweep, UStar, Simulate, Epsilon };

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 20240501;
inline constexpr const char* kSeedEnv = "EMFG_SEED";

std::string_view command_name(Command c);
std::optional<Command> command_from_name(std::string_view name);
const std::vector<Command>& all_commands();

// Malformed config, unknown keys, wrong types or missing required fields.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckLaw {
    enum class Kind { Gamma, PointMass, Nash } kind = Kind::Nash;
    GammaLaw gamma;
    double theta = 1.0;
};

struct RunConfig {
    Command command = Command::Mfc;
    ModelParams params;
    GridSpec grid;
    std::vector<CceClass> classes;
    bool outperform = true;
    CheckLaw check_law;
    SweepVariable sweep_variable = SweepVariable::Sigma;
    double sweep_lo = 0.0;
    double sweep_hi = 0.0;
    int sweep_n = 0;
    double alpha_min = 0.0;
    double alpha_max = 0.0;
    int alpha_n = 0;
    SimConfig sim;
    Policy policy;
    double price = 1.0;
    EquilibriumSpec equilibrium;
    std::vector<int> n_list;
    std::uint64_t seed = kDefaultSeed;
    std::string output;          // empty: standard output
    std::string summary_output;  // simulate/epsilon JSON summary; empty: derived from output
};

// Defaults for the command's blocks; params are deliberately absent.
json default_config(Command c);

// Top-level keys a config may carry for the command.
const std::vector<std::string>& allowed_keys(Command c);

// Merge order: defaults, then file, then flag overrides; the seed environment
// variable sits between flags and file.
json merge_layers(Command c, const json& file, const json& flags, const char* env_seed);

RunConfig parse_config(Command c, const json& merged);

}  // namespace emfg::cli
