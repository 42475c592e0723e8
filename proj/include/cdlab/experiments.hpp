#ifndef CDLAB_EXPERIMENTS_HPP
#define CDLAB_EXPERIMENTS_HPP

#include <string>
#include <vector>

namespace cdlab {

/// One experiment run: parameters mirror the CLI flags; config-file
/// values are overridden by flags.
struct ExperimentConfig {
    std::string experiment;  // solve | figure1 | figure2 | infsup | props | parabolic | boundary-layer
    double alpha = 3e-4;
    double beta = 1.0;
    double gamma = 0.0;
    double f = 1.0;
    double T = 1.0;
    double V = 1.0;
    int nx = 80;
    int ny = 80;
    std::string method = "pg-exact";
    std::string out_dir = ".";
    unsigned seed = 0;
    std::vector<std::string> props;  // empty = all
    bool dump_grams = false;
    int subgrid_level = 1;
};

/// Runs the experiment, writing all artifacts under out_dir.
/// Returns 0 when every asserted check passes, 1 otherwise.
int run_experiment(const ExperimentConfig& config);

/// integral over (0,T) of |1 - exp(beta (t-T)/alpha)|^2 / (T-t) dt,
/// the outflow-layer weight that grows like |log alpha|.
double boundary_layer_weighted_integral(double alpha, double beta, double T);

/// least-squares fit y ~ a + b x; returns (a, b, R^2)
struct LineFit {
    double a, b, r2;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cdlab

#endif
