// scenario.hpp - JSON scenario files: schema validation, model dispatch onto
// the closed-form decay laws, and first-principles oracle cross-checks.
#pragma once

#include "spinwave/physical_core.hpp"
#include "spinwave/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace spinwave {

inline constexpr int kSchemaVersion = 1;

struct TimeGrid {
    double start_us = 0.0;
    double stop_us = 0.0;
    std::size_t count = 0;

    std::vector<double> seconds() const; // uniform grid, inclusive endpoints
};

enum class ModelKind {
    Recoil,
    HarmonicSag,
    LinearForce,
    Exponential,
    GaussianOffset,
    ReleaseBec,
    ReleaseThermal,
    Kuhr,
    Composite,
};

std::string to_string(ModelKind k);

struct ScenarioModel {
    ModelKind kind = ModelKind::Recoil;
    nlohmann::json params;                 // validated, kind-specific
    std::vector<ScenarioModel> submodels;  // Composite only
    std::string compose_mode = "product";  // "product" | "mixture"
    std::vector<double> weights;           // mixture only
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::optional<ExperimentConfig> experiment;
    ScenarioModel model;
    TimeGrid grid;
    bool emit_coherence = false;
};

// Parses and validates a scenario document. Unknown keys anywhere are
// rejected; diagnostics name the offending JSON path. Throws ConfigError.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path); // reads + parses a file

struct ScenarioRun {
    DecayCurve curve;
    // Optional complex coherence C(t)/C(0) when the model provides a phase.
    std::vector<std::complex<double>> coherence;
};

ScenarioRun run_scenario(const Scenario& s);

struct OracleReport {
    bool available = false;
    bool pass = false;
    double max_rel_dev = 0.0;
    double mean_rel_dev = 0.0;
    double tolerance = 0.0;
    std::string note;
    DecayCurve model_curve;  // closed form sampled on the scenario grid
    DecayCurve oracle_curve; // first-principles result on the same grid
};

// Runs the matching first-principles oracle (split-operator grid propagation
// or Hermite thermal sum) against the scenario's closed form. Exponential
// scenarios report "no oracle available".
OracleReport run_oracle(const Scenario& s, double tolerance);

// Number of worker threads: explicit argument > SPINWAVE_THREADS env > 1.
unsigned resolve_threads(int cli_threads);

} // namespace spinwave
