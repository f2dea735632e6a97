// spinwave_cli.cpp - batch front-end: scenario curves, decay fits, built-in
// figure datasets, and oracle cross-checks.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 fit failure.
#include "spinwave/coherence_models.hpp"
#include "spinwave/constants.hpp"
#include "spinwave/fit.hpp"
#include "spinwave/physical_core.hpp"
#include "spinwave/scenario.hpp"
#include "spinwave/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace spinwave;

namespace fs = std::filesystem;

std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Atomic write: temp file in the target directory, then rename.
void write_atomic(const fs::path& target, const std::string& content) {
    fs::create_directories(target.parent_path().empty() ? "." : target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write to " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

std::string curve_csv(const DecayCurve& curve,
                      const std::vector<std::complex<double>>& coherence) {
    std::ostringstream os;
    const bool with_c = !coherence.empty();
    os << "t_us,eta_over_eta0" << (with_c ? ",ReC,ImC" : "") << "\n";
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        os << format_num(units::s_to_us(curve.times[i])) << ","
           << format_num(curve.eta[i]);
        if (with_c)
            os << "," << format_num(coherence[i].real()) << ","
               << format_num(coherence[i].imag());
        os << "\n";
    }
    return os.str();
}

json curve_json(const DecayCurve& curve,
                const std::vector<std::complex<double>>& coherence) {
    json j;
    j["t_us"] = json::array();
    j["eta_over_eta0"] = json::array();
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        j["t_us"].push_back(units::s_to_us(curve.times[i]));
        j["eta_over_eta0"].push_back(curve.eta[i]);
    }
    if (!coherence.empty()) {
        j["ReC"] = json::array();
        j["ImC"] = json::array();
        for (const auto& c : coherence) {
            j["ReC"].push_back(c.real());
            j["ImC"].push_back(c.imag());
        }
    }
    j["warnings"] = curve.warnings;
    return j;
}

json fit_json(const FitResult& fr) {
    json j;
    j["model"] = to_string(fr.model);
    j["params"] = json::object();
    for (const auto& [name, p] : fr.params)
        j["params"][name] = {{"value", p.value}, {"sigma", p.sigma}};
    j["residual_norm"] = fr.residual_norm;
    j["n_points"] = fr.n_points;
    j["n_excluded"] = fr.n_excluded;
    return j;
}

DecayModel parse_model_name(const std::string& name) {
    if (name == "gaussian") return DecayModel::Gaussian;
    if (name == "exponential") return DecayModel::Exponential;
    if (name == "algebraic") return DecayModel::Algebraic;
    if (name == "stretched") return DecayModel::StretchedExponential;
    throw ConfigError("unknown fit model \"" + name +
                      "\" (expected gaussian|exponential|algebraic|stretched)");
}

// CSV with header t_us,eta[,sigma]; '.' decimal, comma separator.
DecayCurve read_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file: " + path);
    std::string line;
    std::size_t row = 0;
    DecayCurve curve;
    bool has_sigma = false;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (row == 1 && line.rfind("t_us", 0) == 0)) {
            if (row == 1) has_sigma = line.find("sigma") != std::string::npos;
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(ls, field, ',')) {
            try {
                std::size_t pos = 0;
                vals.push_back(std::stod(field, &pos));
                if (pos != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw ConfigError(path + ": row " + std::to_string(row) +
                                  ": malformed number \"" + field + "\"");
            }
        }
        if (vals.size() < 2 || vals.size() > 3)
            throw ConfigError(path + ": row " + std::to_string(row) +
                              ": expected 2 or 3 fields, got " +
                              std::to_string(vals.size()));
        curve.times.push_back(units::us_to_s(vals[0]));
        curve.eta.push_back(vals[1]);
        if (vals.size() == 3) {
            has_sigma = true;
            curve.sigma_eta.push_back(vals[2]);
        } else if (has_sigma && !curve.sigma_eta.empty()) {
            throw ConfigError(path + ": row " + std::to_string(row) +
                              ": missing sigma field");
        }
    }
    if (curve.times.empty())
        throw ConfigError(path + ": insufficient points (file has no data rows)");
    return curve;
}

json oracle_json(const OracleReport& r) {
    json j;
    j["available"] = r.available;
    j["pass"] = r.pass;
    j["max_rel_dev"] = r.max_rel_dev;
    j["mean_rel_dev"] = r.mean_rel_dev;
    j["tolerance"] = r.tolerance;
    j["note"] = r.note;
    return j;
}

// --- built-in figure parameter sets ----------------------------------------------
// Literal experimental values: signal waist w = 8 um, radial trap frequency
// 96 Hz, temperatures 0.2 uK and 2.0 uK, signal/coupling wavelengths
// 780.24 nm / 480 nm, polarizability ratio 1.8, spin-wave wavelength
// 1.23-1.25 um, zero-temperature offset 38 us.

Scenario scenario_from_json(const char* text) {
    return parse_scenario(json::parse(text));
}

void figure_fig2(const fs::path& dir, const std::string& /*format*/) {
    // Gaussian decay at 2.0 uK with lambda_R = 1.23 um; eta(0) = 0.15.
    Scenario s = scenario_from_json(R"({
        "schema_version": 1,
        "model": {"kind": "recoil",
                  "params": {"lambda_R_um": 1.23, "temperature_uK": 2.0}},
        "time_grid": {"start_us": 0.7, "stop_us": 31.5, "count": 45}
    })");
    ScenarioRun run = run_scenario(s);
    DecayCurve curve = run.curve;
    for (double& e : curve.eta) e *= 0.15;

    const FitResult fg = fit_decay(curve, DecayModel::Gaussian);
    const FitResult fstretch = fit_decay(curve, DecayModel::StretchedExponential);

    std::ostringstream os;
    os << "t_us,eta\n";
    for (std::size_t i = 0; i < curve.times.size(); ++i)
        os << format_num(units::s_to_us(curve.times[i])) << ","
           << format_num(curve.eta[i]) << "\n";
    write_atomic(dir / "fig2_curve.csv", os.str());

    json summary;
    summary["gaussian_fit"] = fit_json(fg);
    summary["stretched_fit"] = fit_json(fstretch);
    summary["tau_us"] = units::s_to_us(fg.params.at("tau").value);
    summary["p"] = fstretch.params.at("p").value;
    write_atomic(dir / "fig2_summary.json", summary.dump(2) + "\n");
    std::cout << "fig2: tau = " << format_num(units::s_to_us(fg.params.at("tau").value))
              << " us, p = " << format_num(fstretch.params.at("p").value) << "\n";
}

void figure_fig3(const fs::path& dir, const std::string& /*format*/) {
    // 1/tau^2 vs T with lambda_R = 1.23 um and 38 us offset.
    const double mass = Species::rubidium87().mass;
    const double k_R = 2.0 * constants::pi / units::um_to_m(1.23);
    const double tau_off = units::us_to_s(38.0);
    std::vector<std::pair<double, double>> pts;
    std::ostringstream os;
    os << "T_uK,tau_us\n";
    for (int i = 0; i < 10; ++i) {
        const double T = units::uK_to_K(0.2 + 0.2 * i);
        const double inv_tau2 =
            k_R * k_R * constants::k_B * T / mass + 1.0 / (tau_off * tau_off);
        const double tau = 1.0 / std::sqrt(inv_tau2);
        pts.emplace_back(T, tau);
        os << format_num(units::K_to_uK(T)) << "," << format_num(units::s_to_us(tau))
           << "\n";
    }
    write_atomic(dir / "fig3_points.csv", os.str());

    const TemperatureFitResult fit = fit_tau_vs_temperature(pts, mass);
    json summary;
    summary["lambda_R_um"] = units::m_to_um(fit.lambda_R.value);
    summary["lambda_R_sigma_um"] = units::m_to_um(fit.lambda_R.sigma);
    summary["offset_resolved"] = fit.offset_resolved;
    summary["tau_offset_us"] =
        fit.offset_resolved ? units::s_to_us(fit.tau_offset.value) : 0.0;
    summary["tau_offset_sigma_us"] =
        fit.offset_resolved ? units::s_to_us(fit.tau_offset.sigma) : 0.0;
    write_atomic(dir / "fig3_summary.json", summary.dump(2) + "\n");
    std::cout << "fig3: lambda_R = " << format_num(units::m_to_um(fit.lambda_R.value))
              << " um, tau_off = "
              << format_num(fit.offset_resolved ? units::s_to_us(fit.tau_offset.value) : 0.0)
              << " us\n";
}

void figure_fig4(const fs::path& dir, const std::string& /*format*/) {
    // Free expansion: recoil at 0.2 uK (lambda_R = 1.25 um) combined in
    // quadrature with the 38 us zero-temperature offset.
    Scenario free_exp = scenario_from_json(R"({
        "schema_version": 1,
        "model": {"kind": "composite", "mode": "product", "models": [
            {"kind": "recoil",
             "params": {"lambda_R_um": 1.25, "temperature_uK": 0.2}},
            {"kind": "gaussian_offset", "params": {"tau_us": 38.0}}
        ]},
        "time_grid": {"start_us": 0.0, "stop_us": 45.0, "count": 46}
    })");
    // In trap: harmonic differential potential with gravitational sag.
    Scenario in_trap = scenario_from_json(R"({
        "schema_version": 1,
        "experiment": {
            "beams": {"signal_wavelength_nm": 780.24, "coupling_wavelength_nm": 480.0,
                      "geometry": "counterpropagating", "signal_waist_um": 8.0},
            "trap": {"frequency_hz": 96.0, "polarizability_ratio": -0.8},
            "ensemble": {"temperature_uK": 0.2}
        },
        "model": {"kind": "harmonic_sag", "params": {}},
        "time_grid": {"start_us": 0.0, "stop_us": 20.0, "count": 41}
    })");

    const ScenarioRun run_free = run_scenario(free_exp);
    const ScenarioRun run_trap = run_scenario(in_trap);
    write_atomic(dir / "fig4_free_expansion.csv", curve_csv(run_free.curve, {}));
    write_atomic(dir / "fig4_in_trap.csv", curve_csv(run_trap.curve, {}));

    const FitResult f_free = fit_decay(run_free.curve, DecayModel::Gaussian);
    const FitResult f_trap = fit_decay(run_trap.curve, DecayModel::Gaussian);
    json summary;
    summary["free_expansion"] = fit_json(f_free);
    summary["in_trap"] = fit_json(f_trap);
    summary["free_expansion_tau_us"] = units::s_to_us(f_free.params.at("tau").value);
    summary["in_trap_tau_us"] = units::s_to_us(f_trap.params.at("tau").value);
    write_atomic(dir / "fig4_summary.json", summary.dump(2) + "\n");
    std::cout << "fig4: free-expansion tau = "
              << format_num(units::s_to_us(f_free.params.at("tau").value))
              << " us, in-trap tau = "
              << format_num(units::s_to_us(f_trap.params.at("tau").value)) << " us\n";
}

void figure_figS2(const fs::path& dir, const std::string& /*format*/) {
    // Released thermal cloud: Hermite-state oracle vs spatial-overlap
    // approximation at k_B T/(hbar omega) in {10, 20} and w/a0 in {5, 7.3}.
    const double mass = Species::rubidium87().mass;
    const double omega = units::Hz_to_rad_s(96.0);
    const double a0 = std::sqrt(constants::hbar / (mass * omega));

    json summary;
    summary["panels"] = json::array();
    for (double x : {10.0, 20.0}) {
        for (double wr : {5.0, 7.3}) {
            const double T = x * constants::hbar * omega / constants::k_B;
            const double w = wr * a0;
            const double sigma_v = std::sqrt(constants::k_B * T / mass);
            const double sigma_vr =
                std::sqrt(sigma_v * sigma_v +
                          constants::hbar * constants::hbar / (mass * mass * w * w));
            const double tau_rel = w / sigma_vr;

            json doc = {
                {"schema_version", 1},
                {"model",
                 {{"kind", "release_thermal"},
                  {"params",
                   {{"temperature_uK", units::K_to_uK(T)},
                    {"frequency_hz", 96.0},
                    {"w_um", units::m_to_um(w)},
                    {"dims", 1},
                    // Truncation level of the reference dataset this figure
                    // reproduces (the sums there were cut at n <= 40).
                    {"oracle_n_max", 40}}}}},
                {"time_grid",
                 {{"start_us", 0.0},
                  {"stop_us", units::s_to_us(2.0 * tau_rel)},
                  {"count", 33}}}};
            const Scenario s = parse_scenario(doc);
            const OracleReport rep = run_oracle(s, 0.1);

            std::ostringstream os;
            os << "t_us,eta_model,eta_oracle\n";
            for (std::size_t i = 0; i < rep.model_curve.times.size(); ++i)
                os << format_num(units::s_to_us(rep.model_curve.times[i])) << ","
                   << format_num(rep.model_curve.eta[i]) << ","
                   << format_num(rep.oracle_curve.eta[i]) << "\n";
            std::ostringstream name;
            name << "figS2_kT" << static_cast<int>(x) << "_w" << wr << ".csv";
            write_atomic(dir / name.str(), os.str());

            summary["panels"].push_back({{"kT_over_hbar_omega", x},
                                         {"w_over_a0", wr},
                                         {"max_rel_dev", rep.max_rel_dev},
                                         {"mean_rel_dev", rep.mean_rel_dev},
                                         {"pass", rep.pass}});
            std::cout << "figS2 (kT/hbar omega = " << x << ", w/a0 = " << wr
                      << "): max rel dev = " << format_num(rep.max_rel_dev)
                      << (rep.pass ? " PASS" : " FAIL") << "\n";
        }
    }
    write_atomic(dir / "figS2_summary.json", summary.dump(2) + "\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-wave retrieval-efficiency decay toolkit"};
    app.require_subcommand(1);

    std::string config_path, data_path, out_dir = ".", format = "csv";
    std::string model_name = "gaussian", figure_id;
    double tolerance = 0.0;
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (fallback: SPINWAVE_THREADS)");

    CLI::App* curve = app.add_subcommand("curve", "sample a scenario decay curve");
    curve->add_option("--config", config_path, "scenario JSON file")->required();
    curve->add_option("--out", out_dir, "output directory");
    curve->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* fit = app.add_subcommand("fit", "fit a decay model to CSV data");
    fit->add_option("--data", data_path, "CSV file: t_us,eta[,sigma]")->required();
    fit->add_option("--model", model_name, "gaussian|exponential|algebraic|stretched");
    fit->add_option("--out", out_dir, "output directory");

    CLI::App* figure = app.add_subcommand("figure", "emit built-in figure datasets");
    figure->add_option("id", figure_id, "fig2|fig3|fig4|figS2")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "figS2"}));
    figure->add_option("--out", out_dir, "output directory");

    CLI::App* oracle = app.add_subcommand("oracle", "first-principles cross-check");
    oracle->add_option("--config", config_path, "scenario JSON file")->required();
    oracle->add_option("--tolerance", tolerance, "relative tolerance (0 = per-model default)");
    oracle->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (threads > 0) {
            // Propagated through the environment so library-level workers see it.
            setenv("SPINWAVE_THREADS", std::to_string(threads).c_str(), 1);
        }
        const fs::path dir(out_dir);

        if (curve->parsed()) {
            const Scenario s = load_scenario(config_path);
            const ScenarioRun run = run_scenario(s);
            for (const auto& w : run.curve.warnings)
                std::cerr << "warning: " << w << "\n";
            if (format == "csv")
                write_atomic(dir / "curve.csv", curve_csv(run.curve, run.coherence));
            else
                write_atomic(dir / "curve.json",
                             curve_json(run.curve, run.coherence).dump(2) + "\n");
        } else if (fit->parsed()) {
            const DecayCurve curve_data = read_curve_csv(data_path);
            const FitResult fr = fit_decay(curve_data, parse_model_name(model_name));
            const json j = fit_json(fr);
            write_atomic(dir / "fit.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            if (fr.n_excluded > 0)
                std::cerr << "note: excluded " << fr.n_excluded
                          << " points below the eta floor\n";
        } else if (figure->parsed()) {
            if (figure_id == "fig2") figure_fig2(dir, format);
            else if (figure_id == "fig3") figure_fig3(dir, format);
            else if (figure_id == "fig4") figure_fig4(dir, format);
            else figure_figS2(dir, format);
        } else if (oracle->parsed()) {
            const Scenario s = load_scenario(config_path);
            const OracleReport rep = run_oracle(s, tolerance);
            write_atomic(dir / "oracle.json", oracle_json(rep).dump(2) + "\n");
            if (!rep.available) {
                std::cout << "no oracle available: " << rep.note << "\n";
            } else {
                std::cout << (rep.pass ? "PASS" : "FAIL") << ": max rel dev "
                          << format_num(rep.max_rel_dev) << " (tolerance "
                          << format_num(rep.tolerance) << "), " << rep.note << "\n";
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const FitError& e) {
        std::cerr << "fit failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
