// Command-line front end for the ccovar pipeline. Links only the C API.

#include "ccovar/ccovar.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

struct ConfigDeleter {
    void operator()(ccovar_config* c) const { ccovar_config_free(c); }
};
using ConfigPtr = std::unique_ptr<ccovar_config, ConfigDeleter>;

struct OwnedString {
    char* text = nullptr;
    ~OwnedString() { ccovar_string_free(text); }
};

// Thrown once the diagnostic has been printed; carries the exit status.
struct Failure {
    int status;
};

void check(ccovar_status status) {
    if (status == CCOVAR_OK) return;
    std::fprintf(stderr, "ccovar: error [%s]: %s\n", ccovar_status_name(status), ccovar_last_error());
    throw Failure{static_cast<int>(status)};
}

struct GlobalOptions {
    std::string config_path;
    std::optional<std::string> seed;
    std::optional<std::string> out;
    std::vector<std::string> overrides;
    bool verbose = false;
};

// Defaults < config file < environment < command line.
ConfigPtr build_config(const GlobalOptions& g) {
    ccovar_config* raw = nullptr;
    if (g.config_path.empty()) {
        check(ccovar_config_default(&raw));
    } else {
        check(ccovar_config_load(g.config_path.c_str(), &raw));
    }
    ConfigPtr config(raw);
    check(ccovar_config_apply_env(config.get()));
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "ccovar: error [config_error]: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
            throw Failure{CCOVAR_CONFIG_ERROR};
        }
        check(ccovar_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    if (g.seed) check(ccovar_config_set(config.get(), "seed", g.seed->c_str()));
    if (g.out) check(ccovar_config_set(config.get(), "out", g.out->c_str()));
    return config;
}

void print(const OwnedString& s) {
    if (s.text) std::fputs(s.text, stdout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ccovar: copula-based CoVaR risk-spillover pipeline for futures/spot pairs"};
    app.set_version_flag("--version", std::string("ccovar ") + ccovar_version());
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "Pipeline configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Random seed (unsigned 64-bit); overrides config and CCOVAR_SEED");
    app.add_option("--out", g.out, "Output directory; overrides config and CCOVAR_OUT");
    app.add_option("--set", g.overrides, "Override any config key, e.g. --set n_bootstrap=500")
        ->type_name("KEY=VALUE");
    app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");

    const std::pair<const char*, const char*> stages[] = {
        {"ingest", "Load prices, compute log returns, write the aligned return series"},
        {"diagnose", "Correlation and descriptive/diagnostic tables"},
        {"fit-marginal", "ARMA-GARCH-skewed-t order search and fits per period and leg"},
        {"fit-copula", "Fit and select single and mixed copulas per period"},
        {"risk", "VaR, CoVaR and delta-CoVaR series per period"},
        {"test-spillover", "Bootstrap K-S spillover tests"},
    };
    std::vector<std::pair<CLI::App*, std::string>> stage_commands;
    for (const auto& [name, help] : stages) stage_commands.emplace_back(app.add_subcommand(name, help), name);

    auto* run = app.add_subcommand("run", "Run every stage and write manifest.json");
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic futures/spot data set with known parameters");
    auto* report = app.add_subcommand("report", "Render the tables of a completed run");
    std::string report_dir;
    report->add_option("dir", report_dir, "Run directory (default: the configured output directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        ccovar_set_verbose(g.verbose ? 1 : 0);
        for (const auto& [command, name] : stage_commands) {
            if (!command->parsed()) continue;
            auto config = build_config(g);
            OwnedString paths;
            check(ccovar_run_stage(config.get(), name.c_str(), &paths.text));
            print(paths);
            return 0;
        }
        if (run->parsed()) {
            auto config = build_config(g);
            OwnedString manifest;
            check(ccovar_run_pipeline(config.get(), &manifest.text));
            std::printf("%s\n", manifest.text);
        } else if (simulate->parsed()) {
            auto config = build_config(g);
            OwnedString paths;
            check(ccovar_simulate(config.get(), &paths.text));
            print(paths);
        } else if (report->parsed()) {
            if (report_dir.empty()) {
                auto config = build_config(g);
                OwnedString out;
                check(ccovar_config_get(config.get(), "out", &out.text));
                report_dir = out.text;
            }
            OwnedString text;
            check(ccovar_report(report_dir.c_str(), &text.text));
            print(text);
        }
    } catch (const Failure& f) {
        return f.status;
    }
    return 0;
}
