#pragma once
#include <string>
#include <vector>

#include "hnnflow/activation.hpp"
#include "hnnflow/objectives.hpp"

namespace hnnflow {

// flat INI-style text: [section] headers matching the subcommands, key = value
// lines, '#' or ';' comments; unknown sections or keys are rejected with the
// offending line number

struct DescendConfig {
    std::string method = "natural"; // natural | mirror | prox
    std::string activation = "soft";
    std::string objective = "himmelblau";
    int n = 2;
    double beta = 0.25;
    double h = 1e-3;
    int steps = 1000;
    std::vector<double> x0;     // empty: 0.55,0.45 in 2-D, else all 0.5
    std::vector<double> ref;    // empty: nearest Himmelblau minimum or final iterate
    std::vector<double> center; // quadratic objective center, default all 0.5
    std::vector<double> slope;  // linear objective slope, default all 1
    bool timing = false;
};

struct GeodesicConfig {
    std::string activation = "soft";
    int n = 1;
    double beta = 0.25;
    std::vector<double> x; // default 0.25
    std::vector<double> y; // default 0.75
    int samples = 101;
    bool shoot = false; // add shooting-solver columns next to the closed form
};

struct DispatchConfig {
    int n_g = 40;
    unsigned long long seed = 1;
    int restarts = 100;
    double r = 1.0;
    double h_hopfield = 1e-2;
    double h_dual = 1e-1;
    double tol = 1e-7;
    int max_subiters = 10000;
    double outer_tol = 1e-3;
    int max_outers = 500;
    // optional overrides of the drawn data; empty means keep the draw
    std::vector<double> p, x0, y0;
    double c1 = 0.0, c2 = 0.0, pi_d = 0.0; // 0 means keep the draw
    bool parallel = true;
};

struct DiffuseConfig {
    std::string activation = "soft";
    std::string objective = "himmelblau";
    int n = 2;
    double beta = 0.25;
    double T = 25.0;
    int N = 500;
    double h = 1e-4;
    double eps = 0.1;
    int steps = 3000;
    unsigned long long seed = 0;
    double fp_tol = 1e-9;
    int max_fp_iters = 5000;
    int record_every = 500;
    std::vector<double> center, slope;
    bool timing = false;
    bool parallel = true;
};

struct RunConfig {
    DescendConfig descend;
    GeodesicConfig geodesic;
    DispatchConfig dispatch;
    DiffuseConfig diffuse;
};

// empty path keeps every default; otherwise parse + validate all sections
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

Activation make_activation(const std::string& name, int n, double beta);
Objective make_objective(const std::string& name, int n, const std::vector<double>& center,
                         const std::vector<double>& slope);

// resolution order: HNNFLOW_OUTPUT_DIR env var, then the flag, then "."
std::string resolve_output_dir(const std::string& flag_value);

} // namespace hnnflow
