#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hnnflow/config.hpp"
#include "hnnflow/dispatch.hpp"
#include "hnnflow/diffusion.hpp"
#include "hnnflow/errors.hpp"
#include "hnnflow/flows.hpp"
#include "hnnflow/geometry.hpp"
#include "hnnflow/mirror.hpp"
#include "hnnflow/objectives.hpp"
#include "hnnflow/sinkhorn.hpp"
#include "hnnflow/trace.hpp"

namespace fs = std::filesystem;
using namespace hnnflow;

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw config_error("flag --" + field + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw config_error("flag --" + field + ": empty list");
    return out;
}

std::vector<double> broadcast(std::vector<double> v, int n, const std::string& field) {
    if (static_cast<int>(v.size()) == 1 && n > 1) v.assign(n, v[0]);
    if (static_cast<int>(v.size()) != n)
        throw config_error("flag --" + field + " needs " + std::to_string(n) + " components");
    return v;
}

fs::path prepare_dir(const std::string& flag_value) {
    const fs::path dir = resolve_output_dir(flag_value);
    fs::create_directories(dir);
    return dir;
}

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
};

void add_common(CLI::App* sub, CommonFlags& c) {
    sub->add_option("--config", c.config_path, "configuration file");
    sub->add_option("--output-dir", c.output_dir, "directory for CSV output");
}

// ---- descend ----

struct DescendFlags {
    CommonFlags common;
    std::string method, activation, objective, x0, ref;
    double h = 0, beta = 0;
    int steps = 0, n = 0;
    bool timing = false;
};

int run_descend(CLI::App* sub, const DescendFlags& fl) {
    RunConfig cfg = load_config(fl.common.config_path);
    DescendConfig d = cfg.descend;
    if (sub->count("--method"))
        d.method = fl.method;
    if (sub->count("--activation")) d.activation = fl.activation;
    if (sub->count("--objective")) d.objective = fl.objective;
    if (sub->count("--n")) d.n = fl.n;
    if (sub->count("--beta")) d.beta = fl.beta;
    if (sub->count("--h")) d.h = fl.h;
    if (sub->count("--steps")) d.steps = fl.steps;
    if (sub->count("--timing")) d.timing = true;
    for (const std::string m : {d.method}) {
        if (m != "natural" && m != "mirror" && m != "prox")
            throw config_error("method must be natural, mirror, or prox");
    }
    if (!(d.h > 0.0)) throw config_error("h must be positive");
    if (d.steps < 0) throw config_error("steps must be nonnegative");
    if (!(d.beta > 0.0)) throw config_error("beta must be positive");
    if (d.objective == "himmelblau" && d.n != 2)
        throw config_error("the himmelblau objective is two-dimensional");
    if (d.method == "mirror" && d.activation == "identity")
        throw config_error("the mirror method needs a soft or logistic activation");
    if (sub->count("--x0")) d.x0 = broadcast(parse_list(fl.x0, "x0"), d.n, "x0");
    else if (static_cast<int>(d.x0.size()) != d.n)
        d.x0 = d.n == 2 ? std::vector<double>{0.55, 0.45} : std::vector<double>(d.n, 0.5);
    if (sub->count("--ref")) d.ref = broadcast(parse_list(fl.ref, "ref"), d.n, "ref");
    for (double c : d.x0)
        if (!(c > 0.0 && c < 1.0)) throw config_error("x0 must lie strictly inside (0,1)");

    const Activation act = make_activation(d.activation, d.n, d.beta);
    const Objective obj = make_objective(d.objective, d.n, d.center, d.slope);
    const DescentMethod method = d.method == "natural"  ? DescentMethod::natural
                                 : d.method == "mirror" ? DescentMethod::mirror
                                                        : DescentMethod::prox;
    FlowTrace tr = run_descent(act, obj, method, d.x0, d.h, d.steps, nullptr, d.timing);

    // reference for the distance columns: explicit, else the nearest minimum,
    // else the final iterate
    std::vector<double> ref = d.ref;
    if (ref.empty()) {
        const std::vector<double>& last = tr.iterates.back();
        if (d.objective == "himmelblau") {
            double best = -1.0;
            for (const auto& m : himmelblau_minima()) {
                const double dist = hnnflow::distance(act, last, m);
                if (best < 0.0 || dist < best) {
                    best = dist;
                    ref = m;
                }
            }
        } else {
            ref = last;
        }
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(tr.iterates.size());
    for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
        double dl2 = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double dd = tr.iterates[k][i] - ref[i];
            dl2 += dd * dd;
        }
        rows.push_back({static_cast<double>(k), tr.f_values[k],
                        hnnflow::distance(act, tr.iterates[k], ref), std::sqrt(dl2),
                        tr.step_ms[k]});
    }
    const fs::path dir = prepare_dir(fl.common.output_dir);
    const std::string path = (dir / "descend_trace.csv").string();
    write_csv(path, {"iter", "f", "dG_to_ref", "l2_to_ref", "step_ms"}, rows);
    std::printf("descend: method=%s steps=%d final f=%.6g wrote %s\n", d.method.c_str(),
                d.steps, tr.f_values.back(), path.c_str());
    return 0;
}

// ---- geodesic ----

struct GeodesicFlags {
    CommonFlags common;
    std::string activation, x, y;
    double beta = 0;
    int n = 0, samples = 0;
    bool shoot = false;
};

int run_geodesic(CLI::App* sub, const GeodesicFlags& fl) {
    RunConfig cfg = load_config(fl.common.config_path);
    GeodesicConfig g = cfg.geodesic;
    if (sub->count("--activation")) g.activation = fl.activation;
    if (sub->count("--n")) g.n = fl.n;
    if (sub->count("--beta")) g.beta = fl.beta;
    if (sub->count("--samples")) g.samples = fl.samples;
    if (sub->count("--shoot")) g.shoot = true;
    if (!(g.beta > 0.0)) throw config_error("beta must be positive");
    if (g.samples < 2) throw config_error("samples must be at least 2");
    if (sub->count("--x")) g.x = broadcast(parse_list(fl.x, "x"), g.n, "x");
    else if (static_cast<int>(g.x.size()) != g.n)
        g.x.assign(g.n, 0.25);
    if (sub->count("--y")) g.y = broadcast(parse_list(fl.y, "y"), g.n, "y");
    else if (static_cast<int>(g.y.size()) != g.n)
        g.y.assign(g.n, 0.75);
    for (double c : g.x)
        if (!(c > 0.0 && c < 1.0)) throw config_error("x must lie strictly inside (0,1)");
    for (double c : g.y)
        if (!(c > 0.0 && c < 1.0)) throw config_error("y must lie strictly inside (0,1)");

    const Activation act = make_activation(g.activation, g.n, g.beta);
    const GeodesicCurve curve = geodesic_solve(act, g.x, g.y, g.samples);
    std::vector<std::string> header = {"t"};
    for (int i = 0; i < g.n; ++i) header.push_back("x_" + std::to_string(i + 1));
    GeodesicCurve shot;
    if (g.shoot) {
        shot = geodesic_shoot(act, g.x, g.y, g.samples);
        for (int i = 0; i < g.n; ++i) header.push_back("shoot_" + std::to_string(i + 1));
    }
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < g.samples; ++k) {
        std::vector<double> row = {curve.ts[k]};
        row.insert(row.end(), curve.samples[k].begin(), curve.samples[k].end());
        if (g.shoot) row.insert(row.end(), shot.samples[k].begin(), shot.samples[k].end());
        rows.push_back(std::move(row));
    }
    const fs::path dir = prepare_dir(fl.common.output_dir);
    const std::string path = (dir / "geodesic_curve.csv").string();
    write_csv(path, header, rows);
    std::printf("geodesic: distance=%.12g quadrature=%.12g wrote %s\n",
                hnnflow::distance(act, g.x, g.y), distance_quadrature(act, g.x, g.y),
                path.c_str());
    return 0;
}

// ---- dispatch ----

struct DispatchFlags {
    CommonFlags common;
    unsigned long long seed = 0;
    int n_g = 0, restarts = 0;
    bool serial = false;
};

int run_dispatch(CLI::App* sub, const DispatchFlags& fl) {
    RunConfig cfg = load_config(fl.common.config_path);
    DispatchConfig d = cfg.dispatch;
    if (sub->count("--seed")) d.seed = fl.seed;
    if (sub->count("--n-g")) d.n_g = fl.n_g;
    if (sub->count("--restarts")) d.restarts = fl.restarts;
    if (sub->count("--serial")) d.parallel = false;
    if (d.n_g < 1) throw config_error("n_g must be positive");
    if (d.restarts < 1) throw config_error("restarts must be positive");

    DispatchProblem prob = draw_dispatch_data(d.seed, d.n_g);
    if (!d.p.empty()) prob.p = d.p;
    if (!d.x0.empty()) prob.x0 = d.x0;
    if (!d.y0.empty()) prob.y0 = d.y0;
    if (d.c1 > 0.0) prob.c1 = d.c1;
    if (d.c2 > 0.0) prob.c2 = d.c2;
    if (d.pi_d > 0.0) prob.pi_d = d.pi_d;
    prob.r = d.r;
    prob.h_hopfield = d.h_hopfield;
    prob.h_dual = d.h_dual;
    prob.tol = d.tol;
    prob.max_subiters = d.max_subiters;
    prob.outer_tol = d.outer_tol;
    prob.max_outers = d.max_outers;
    try {
        prob.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }

    const ProtocolResult res = run_dispatch_protocol(prob, d.seed, d.restarts, d.parallel);
    const fs::path dir = prepare_dir(fl.common.output_dir);
    std::vector<std::vector<double>> summary;
    double monotone_sum = 0.0;
    for (std::size_t k = 0; k < res.restarts.size(); ++k) {
        const DispatchResult& r = res.restarts[k];
        std::vector<std::vector<double>> rows;
        int monotone = 0;
        for (std::size_t j = 0; j < r.trace.size(); ++j) {
            const auto& row = r.trace[j];
            rows.push_back({static_cast<double>(j), row.dist_geo, row.dist_l2, row.r1, row.r2,
                            row.l_value});
            if (j > 0 && row.dist_geo <= r.trace[j - 1].dist_geo + 1e-12) ++monotone;
        }
        const double monotone_frac =
            r.trace.size() > 1 ? static_cast<double>(monotone) / (r.trace.size() - 1) : 1.0;
        monotone_sum += monotone_frac;
        char name[64];
        std::snprintf(name, sizeof(name), "dispatch_restart_%03d.csv", static_cast<int>(k));
        write_csv((dir / name).string(),
                  {"outer_iter", "dG", "l2", "r1", "r2", "L_value"}, rows);
        summary.push_back({static_cast<double>(k), r.converged ? 1.0 : 0.0,
                           static_cast<double>(r.outers), static_cast<double>(r.inner_total),
                           r.r1, r.r2, r.cost, r.round_frac, monotone_frac, r.lambda1,
                           r.lambda2});
    }
    const std::string spath = (dir / "dispatch_summary.csv").string();
    write_csv(spath,
              {"restart", "converged", "outers", "inners", "r1", "r2", "cost", "round_frac",
               "monotone_frac", "lambda1", "lambda2"},
              summary);
    std::printf("dispatch: %d/%zu restarts converged, min round_frac=%.3f, mean monotone "
                "dG frac=%.3f, wrote %s\n",
                res.n_converged, res.restarts.size(), res.min_round_frac,
                monotone_sum / res.restarts.size(), spath.c_str());
    return 0;
}

// ---- diffuse ----

struct DiffuseFlags {
    CommonFlags common;
    unsigned long long seed = 0;
    int steps = 0, N = 0, n = 0, record_every = 0;
    double T = 0, h = 0, eps = 0, beta = 0;
    std::string activation, objective;
    bool timing = false, serial = false;
};

int run_diffuse(CLI::App* sub, const DiffuseFlags& fl) {
    RunConfig cfg = load_config(fl.common.config_path);
    DiffuseConfig d = cfg.diffuse;
    if (sub->count("--seed")) d.seed = fl.seed;
    if (sub->count("--steps")) d.steps = fl.steps;
    if (sub->count("--particles")) d.N = fl.N;
    if (sub->count("--n")) d.n = fl.n;
    if (sub->count("--record-every")) d.record_every = fl.record_every;
    if (sub->count("--temperature")) d.T = fl.T;
    if (sub->count("--h")) d.h = fl.h;
    if (sub->count("--eps")) d.eps = fl.eps;
    if (sub->count("--beta")) d.beta = fl.beta;
    if (sub->count("--activation")) d.activation = fl.activation;
    if (sub->count("--objective")) d.objective = fl.objective;
    if (sub->count("--timing")) d.timing = true;
    if (sub->count("--serial")) d.parallel = false;
    if (!(d.T > 0.0)) throw config_error("T must be positive");
    if (!(d.h > 0.0)) throw config_error("h must be positive");
    if (!(d.eps > 0.0)) throw config_error("eps must be positive");
    if (!(d.beta > 0.0)) throw config_error("beta must be positive");
    if (d.N < 1) throw config_error("N must be positive");
    if (d.steps < 0) throw config_error("steps must be nonnegative");
    if (d.objective == "himmelblau" && d.n != 2)
        throw config_error("the himmelblau objective is two-dimensional");

    DiffusionParams params(make_activation(d.activation, d.n, d.beta),
                           make_objective(d.objective, d.n, d.center, d.slope));
    params.T = d.T;
    params.h = d.h;
    params.N = d.N;
    params.seed = d.seed;
    ProxParams prox;
    prox.eps = d.eps;
    prox.h = d.h;
    prox.T = d.T;
    prox.max_fixed_point_iters = d.max_fp_iters;
    prox.fp_tol = d.fp_tol;

    const DiffuseResult res = diffuse_run(params, prox, d.steps, d.record_every, d.timing,
                                          d.parallel);

    const fs::path dir = prepare_dir(fl.common.output_dir);
    std::vector<std::string> header = {"k", "particle_id"};
    for (int i = 0; i < d.n; ++i) header.push_back("x_" + std::to_string(i + 1));
    header.push_back("mass");
    std::vector<std::vector<double>> rows;
    for (const WeightedCloud& cloud : res.snapshots) {
        for (std::size_t p = 0; p < cloud.locations.size(); ++p) {
            std::vector<double> row = {static_cast<double>(cloud.step_index),
                                       static_cast<double>(p)};
            row.insert(row.end(), cloud.locations[p].begin(), cloud.locations[p].end());
            row.push_back(cloud.masses[p]);
            rows.push_back(std::move(row));
        }
    }
    const std::string snap_path = (dir / "diffuse_snapshots.csv").string();
    write_csv(snap_path, header, rows);

    std::vector<std::vector<double>> rt;
    for (const DiffuseStepRow& r : res.runtime)
        rt.push_back({static_cast<double>(r.k), static_cast<double>(r.fp_iters),
                      r.fp_residual, r.free_energy, r.step_ms});
    const std::string rt_path = (dir / "diffuse_runtime.csv").string();
    write_csv(rt_path, {"k", "fp_iters", "fp_residual", "free_energy", "step_ms"}, rt);
    std::printf("diffuse: steps=%d N=%d final free energy=%.6g wrote %s and %s\n", d.steps,
                d.N, res.runtime.back().free_energy, snap_path.c_str(), rt_path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient flows on the activation geometry: descent, geodesics, dispatch, "
                 "and measure-valued diffusion"};
    app.require_subcommand(1);

    DescendFlags de;
    CLI::App* descend = app.add_subcommand("descend", "deterministic descent trace");
    add_common(descend, de.common);
    descend->add_option("--method", de.method, "natural | mirror | prox");
    descend->add_option("--activation", de.activation, "soft | logistic | identity");
    descend->add_option("--objective", de.objective, "himmelblau | quadratic | linear");
    descend->add_option("--n", de.n, "dimension");
    descend->add_option("--beta", de.beta, "activation steepness");
    descend->add_option("--h", de.h, "step size");
    descend->add_option("--steps", de.steps, "iteration count");
    descend->add_option("--x0", de.x0, "start point, comma separated");
    descend->add_option("--ref", de.ref, "reference point for distance columns");
    descend->add_flag("--timing", de.timing, "record wall-clock per step");

    GeodesicFlags ge;
    CLI::App* geodesic = app.add_subcommand("geodesic", "sample a geodesic curve");
    add_common(geodesic, ge.common);
    geodesic->add_option("--activation", ge.activation, "soft | logistic | identity");
    geodesic->add_option("--n", ge.n, "dimension");
    geodesic->add_option("--beta", ge.beta, "activation steepness");
    geodesic->add_option("--x", ge.x, "start point");
    geodesic->add_option("--y", ge.y, "end point");
    geodesic->add_option("--samples", ge.samples, "sample count");
    geodesic->add_flag("--shoot", ge.shoot, "add shooting-solver columns");

    DispatchFlags di;
    CLI::App* dispatch = app.add_subcommand("dispatch", "economic dispatch protocol");
    add_common(dispatch, di.common);
    dispatch->add_option("--seed", di.seed, "data + restart seed");
    dispatch->add_option("--n-g", di.n_g, "generator count");
    dispatch->add_option("--restarts", di.restarts, "Monte Carlo restarts");
    dispatch->add_flag("--serial", di.serial, "disable the parallel restart loop");

    DiffuseFlags df;
    CLI::App* diffuse = app.add_subcommand("diffuse", "stochastic cloud evolution");
    add_common(diffuse, df.common);
    diffuse->add_option("--seed", df.seed, "RNG seed");
    diffuse->add_option("--steps", df.steps, "step count");
    diffuse->add_option("--particles", df.N, "particle count");
    diffuse->add_option("--n", df.n, "dimension");
    diffuse->add_option("--record-every", df.record_every, "snapshot stride (0: ends only)");
    diffuse->add_option("--temperature", df.T, "annealing temperature");
    diffuse->add_option("--h", df.h, "time step");
    diffuse->add_option("--eps", df.eps, "entropic regularization");
    diffuse->add_option("--beta", df.beta, "activation steepness");
    diffuse->add_option("--activation", df.activation, "soft | logistic | identity");
    diffuse->add_option("--objective", df.objective, "himmelblau | quadratic | linear");
    diffuse->add_flag("--timing", df.timing, "record wall-clock per step");
    diffuse->add_flag("--serial", df.serial, "disable parallel kernels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (descend->parsed()) return run_descend(descend, de);
        if (geodesic->parsed()) return run_geodesic(geodesic, ge);
        if (dispatch->parsed()) return run_dispatch(dispatch, di);
        if (diffuse->parsed()) return run_diffuse(diffuse, df);
    } catch (const config_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
