#pragma once

#include "ccovar/copula.hpp"
#include "ccovar/marginal.hpp"
#include "ccovar/risk.hpp"
#include "ccovar/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ccovar {

struct LegInput {
    std::filesystem::path path;
    CsvColumns columns;
    std::string id;
};

struct SimulatedLeg {
    ArmaGarchOrders orders;
    MarginalParams params;
};

struct SimulationConfig {
    /// Total number of returns; the pre period gets round(T * boundary_fraction) of them.
    std::size_t T = 2000;
    double boundary_fraction = 0.5;
    Date start_date = parse_date("2018-01-01");
    SimulatedLeg futures;
    SimulatedLeg spot;
    CopulaModel copula;

    SimulationConfig();
};

struct PipelineConfig {
    LegInput futures{{}, {}, "futures"};
    LegInput spot{{}, {}, "spot"};
    Date boundary = parse_date("2022-02-24");
    RiskConfig risk;
    int max_lag = 3;
    MarginalFitOptions marginal;
    std::vector<CopulaCandidate> candidates = default_candidates();
    int n_bootstrap = 1000;
    std::uint64_t seed = 0;
    std::filesystem::path out = "out";
    bool use_cache = true;
    SimulationConfig simulation;
};

/**
 * Reads a flat "key = value" file ('#' starts a comment). Relative input
 * paths are resolved against the file's directory. Unknown keys and
 * malformed values raise Error(config_error).
 */
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies one key; `base_dir` resolves relative input paths.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value,
                      const std::filesystem::path& base_dir = {});

/// CCOVAR_SEED and CCOVAR_OUT, when set, override the seed and output directory.
void apply_env_overrides(PipelineConfig& config);

/// Checks everything that can be checked before touching the data.
void validate(const PipelineConfig& config);

/// Canonical "key = value" rendering, loadable by load_config.
std::string render_config(const PipelineConfig& config);

/// Pipeline stages in execution order; also the CLI subcommand names.
inline constexpr std::string_view kStages[] = {"ingest", "diagnose", "fit-marginal", "fit-copula",
                                               "risk",   "test-spillover"};

/// Enables progress messages on stderr.
void set_verbose(bool verbose);

/**
 * Runs the named stage (and, through the on-disk cache, whatever it depends
 * on), writing its outputs under config.out. Returns the paths written.
 */
std::vector<std::filesystem::path> run_stage(const PipelineConfig& config, std::string_view stage);

/// Every stage followed by manifest.json (plus timings.txt, kept out of the
/// JSON so that repeated runs produce identical bytes). Returns the manifest path.
std::filesystem::path run_pipeline(const PipelineConfig& config);

/// Writes futures.csv, spot.csv, truth.json and pipeline.conf under config.out.
std::vector<std::filesystem::path> simulate(const PipelineConfig& config);

/// Human-readable tables from a completed run directory; Error(manifest_incomplete)
/// names the first missing stage or file.
std::string report(const std::filesystem::path& out_dir);

}  // namespace ccovar
