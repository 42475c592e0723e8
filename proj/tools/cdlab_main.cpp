// cdlab: experiment driver for the exponentially fitted Petrov-Galerkin
// convection-diffusion solver and its stability measurements.
//
//   cdlab <experiment> [--config file.json] [flags] --out-dir DIR
//
// Exit codes: 0 all checks pass, 1 check failure, 2 usage/config error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "cdlab/experiments.hpp"

namespace {

void apply_config_file(const std::string& path, cdlab::ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw CLI::ValidationError("--config", std::string("parse error: ") + e.what());
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("experiment", cfg.experiment);
    get("alpha", cfg.alpha);
    get("beta", cfg.beta);
    get("gamma", cfg.gamma);
    get("f", cfg.f);
    get("T", cfg.T);
    get("V", cfg.V);
    get("nx", cfg.nx);
    get("ny", cfg.ny);
    get("method", cfg.method);
    get("out_dir", cfg.out_dir);
    get("seed", cfg.seed);
    get("props", cfg.props);
    get("dump_grams", cfg.dump_grams);
    get("subgrid_level", cfg.subgrid_level);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"convection-diffusion lab: solver and stability measurements"};
    app.require_subcommand(1);

    cdlab::ExperimentConfig cfg;
    std::string config_path;

    const std::vector<std::pair<std::string, std::string>> experiments = {
        {"solve", "solve one problem and write the solution CSV"},
        {"figure1", "upwinded vs standard Galerkin midline contrast"},
        {"figure2", "exact vs approximate upwinding distance sweep"},
        {"infsup", "generalized-SVD inf-sup constants over the viscosity sweep"},
        {"props", "run the stability-estimate verifier battery"},
        {"parabolic", "Crank-Nicolson stability ratio sweep"},
        {"boundary-layer", "outflow-layer weighted-integral growth"},
    };
    for (const auto& [name, desc] : experiments) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON config file (flags override)");
        sub->add_option("--alpha", cfg.alpha, "viscosity");
        sub->add_option("--beta", cfg.beta, "convection speed along the first axis");
        sub->add_option("--gamma", cfg.gamma, "reaction coefficient");
        sub->add_option("--f", cfg.f, "constant source value");
        sub->add_option("--T", cfg.T, "flow-direction extent");
        sub->add_option("--V", cfg.V, "transverse extent");
        sub->add_option("--nx", cfg.nx, "cells in the flow direction");
        sub->add_option("--ny", cfg.ny, "cells in the transverse direction (0 = 1D)");
        sub->add_option("--method", cfg.method, "galerkin | pg-exact | pg-approx");
        sub->add_option("--out-dir", cfg.out_dir, "output directory");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--props", cfg.props, "verifier ids (props experiment)");
        sub->add_flag("--dump-grams", cfg.dump_grams, "export norm gram CSVs");
        sub->add_option("--level", cfg.subgrid_level, "subgrid refinement level");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        // config file first, then re-apply the flags that were given
        if (!config_path.empty()) {
            cdlab::ExperimentConfig flag_values = cfg;
            apply_config_file(config_path, cfg);
            for (const CLI::Option* opt : sub->parse_order()) {
                const std::string n = opt->get_name();
                if (n == "--alpha") cfg.alpha = flag_values.alpha;
                if (n == "--beta") cfg.beta = flag_values.beta;
                if (n == "--gamma") cfg.gamma = flag_values.gamma;
                if (n == "--f") cfg.f = flag_values.f;
                if (n == "--T") cfg.T = flag_values.T;
                if (n == "--V") cfg.V = flag_values.V;
                if (n == "--nx") cfg.nx = flag_values.nx;
                if (n == "--ny") cfg.ny = flag_values.ny;
                if (n == "--method") cfg.method = flag_values.method;
                if (n == "--out-dir") cfg.out_dir = flag_values.out_dir;
                if (n == "--seed") cfg.seed = flag_values.seed;
                if (n == "--props") cfg.props = flag_values.props;
                if (n == "--level") cfg.subgrid_level = flag_values.subgrid_level;
            }
        }
        cfg.experiment = sub->get_name();
        return cdlab::run_experiment(cfg);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
