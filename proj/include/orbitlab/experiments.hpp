#pragma once

#include <json.hpp>

#include <string>

namespace orbitlab {

using Json = nlohmann::ordered_json;

/**
 * Experiment front end. Configs are strict JSON objects (schema 1, unknown
 * keys rejected); reports echo the resolved config, carry one record per
 * trial, and recompute all aggregates from those records. Trial i draws its
 * randomness from an independent stream derived from (seed, i), so reports
 * are identical under any job count.
 */

/// Thrown for malformed configs (maps to exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Validates the config and dispatches on config["experiment"].
Json run_experiment(const Json& config, int jobs = 1);

Json run_bounds(const Json& config);
Json run_transversality(const Json& config, int jobs = 1);
Json run_sharpness(const Json& config);
Json run_recover_sweep(const Json& config, int jobs = 1);
Json run_separator(const Json& config, int jobs = 1);
Json run_mra_noise(const Json& config, int jobs = 1);

/// Flat per-trial table with a header row. JSON stays the canonical format.
std::string report_to_csv(const Json& report);

/// Exit codes: 0 success, 2 config error, 3 budget or infeasibility, 1 internal.
int cli_main(int argc, char** argv);

} // namespace orbitlab
