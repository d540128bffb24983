// wavekin: experiment orchestration for the wave-kinetics laboratory.
//
// Subcommands: simulate | iterates | diagrams | amplitudes | kwe | compare |
// selftest. Every run reads a plain-text key/value config, copies it verbatim
// into the output directory, writes CSV/JSON artifacts whose first line names
// the config hash, and finishes with a manifest.json (config hash, code
// version, wall time). CSV bodies are deterministic for a fixed config and
// seed, independent of --workers (per-amplitude runtimes, which are wall-clock
// measurements, live in their own column and are exempt).
//
// Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 resource cap.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lab/config.hpp"
#include "lab/diagrams.hpp"
#include "lab/duhamel.hpp"
#include "lab/errors.hpp"
#include "lab/grid.hpp"
#include "lab/kwe.hpp"
#include "lab/nls.hpp"
#include "lab/params.hpp"
#include "lab/profile.hpp"
#include "lab/random_data.hpp"
#include "lab/rng.hpp"
#include "lab/simplex.hpp"
#include "lab/spanning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lab;

namespace {

constexpr const char* kVersion = "0.1.0";

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string join_ints(const std::vector<int>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

void require_keys(const Config& cfg, const std::vector<std::string>& keys,
                  const std::string& cmd) {
    std::vector<std::string> missing;
    for (const auto& k : keys) {
        // "gamma|lambda" means exactly one of the two
        const auto bar = k.find('|');
        if (bar != std::string::npos) {
            const std::string a = k.substr(0, bar), b = k.substr(bar + 1);
            if (cfg.has(a) && cfg.has(b))
                throw usage_error("config sets both '" + a + "' and '" + b +
                                  "'; specify exactly one");
            if (!cfg.has(a) && !cfg.has(b)) missing.push_back(k);
        } else if (!cfg.has(k)) {
            missing.push_back(k);
        }
    }
    if (!missing.empty()) {
        std::string m = "missing config key(s) for '" + cmd + "':";
        for (const auto& k : missing) m += " " + k;
        m += " (required:";
        for (const auto& k : keys) m += " " + k;
        m += ")";
        throw usage_error(m);
    }
}

PhysicalParams params_from(const Config& cfg) {
    const int d = cfg.get_int("d");
    const double eps = cfg.get_double("eps");
    if (cfg.has("gamma")) return make_params(d, eps, cfg.get_double("gamma"));
    return make_params_lambda(d, eps, cfg.get_double("lambda"));
}

DataProfile profile_from(const Config& cfg) {
    const std::string name = cfg.get_string("profile", "bump");
    if (name == "bump") return default_bump();
    throw usage_error("unknown profile '" + name + "' (supported: bump)");
}

TorusGrid grid_from(const Config& cfg, const PhysicalParams& p, const DataProfile& prof) {
    const int M = cfg.has("modes_per_dim") ? cfg.get_int("modes_per_dim")
                                           : auto_modes(p.eps, prof.support_radius);
    return make_grid(p.d, M, p.eps, prof.support_radius);
}

std::vector<double> times_from(const Config& cfg) {
    if (cfg.has("times")) {
        std::vector<double> out;
        std::stringstream ss(cfg.get_string("times"));
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        if (out.empty()) throw usage_error("config key 'times' is empty");
        return out;
    }
    return {0.0, cfg.get_double("t_final")};
}

CollisionQuadrature quad_from(const Config& cfg, double support_radius) {
    CollisionQuadrature q;
    q.support_radius = cfg.get_double("quad_support", support_radius);
    q.n_angle = cfg.get_int("quad_angle", q.n_angle);
    q.n_radial = cfg.get_int("quad_radial", q.n_radial);
    q.n_plane = cfg.get_int("quad_plane", q.n_plane);
    q.r_min = cfg.get_double("quad_r_min", 0.0);
    return q;
}

struct Run {
    Config cfg;
    fs::path out;
    int workers = 1;
    std::uint64_t seed = 0;
    bool seed_overridden = false;
    std::vector<std::string> artifacts;

    std::uint64_t master_seed() const {
        if (seed_overridden) return seed;
        return cfg.get_u64("seed");
    }
    std::ofstream open_csv(const std::string& name, const std::string& header) {
        fs::path p = out / name;
        std::ofstream f(p);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << "# config " << config_hash(cfg) << "\n" << header << "\n";
        artifacts.push_back(name);
        return f;
    }
    void write_json(const std::string& name, json j) {
        j["config_hash"] = config_hash(cfg);
        std::ofstream f(out / name);
        if (!f) throw std::runtime_error("cannot write " + (out / name).string());
        f << j.dump(2) << "\n";
        artifacts.push_back(name);
    }
};

// ---- subcommands -------------------------------------------------------------

void cmd_simulate(Run& run) {
    require_keys(run.cfg, {"d", "eps", "gamma|lambda", "ensemble_size", "t_final", "dt", "seed"},
                 "simulate");
    const PhysicalParams p = params_from(run.cfg);
    const DataProfile prof = profile_from(run.cfg);
    const TorusGrid grid = grid_from(run.cfg, p, prof);
    const std::vector<double> times = times_from(run.cfg);
    const SpectralTable table =
        run_ensemble(p, grid, prof, run.cfg.get_u64("ensemble_size"), times,
                     run.cfg.get_double("dt"), run.master_seed(), run.workers,
                     run.cfg.get_double("control_dt", 0.0));

    auto f = run.open_csv("spectrum.csv", "t,k,mean_density,stderr,mean_delta,stderr_delta");
    for (std::size_t ti = 0; ti < table.times.size(); ++ti)
        for (std::size_t j = 0; j < table.ks.size(); ++j)
            f << fmt(table.times[ti]) << ',' << join_ints(table.ks[j], ' ') << ','
              << fmt(table.mean_density[ti][j]) << ',' << fmt(table.se_density[ti][j]) << ','
              << fmt(table.mean_delta[ti][j]) << ',' << fmt(table.se_delta[ti][j]) << "\n";
}

void cmd_iterates(Run& run) {
    require_keys(run.cfg,
                 {"d", "eps", "gamma|lambda", "iterate_order", "ensemble_size", "t_final", "dt",
                  "seed"},
                 "iterates");
    const PhysicalParams p = params_from(run.cfg);
    const DataProfile prof = profile_from(run.cfg);
    const TorusGrid grid = grid_from(run.cfg, p, prof);
    const int N = run.cfg.get_int("iterate_order");
    if (N < 0 || N > 8) throw usage_error("iterate_order must be in 0..8");
    std::vector<double> times = times_from(run.cfg);

    auto f = run.open_csv("iterates.csv", "n,t,mean_l2sq,stderr");
    for (int n = 0; n <= N; ++n) {
        const MomentCurve c =
            iterate_moment_L2(p, grid, prof, n, times, run.cfg.get_u64("ensemble_size"),
                              run.cfg.get_double("dt"), run.master_seed(), run.workers);
        for (std::size_t ti = 0; ti < c.times.size(); ++ti)
            f << n << ',' << fmt(c.times[ti]) << ',' << fmt(c.mean[ti]) << ','
              << fmt(c.std_error[ti]) << "\n";
    }
}

void cmd_diagrams(Run& run) {
    require_keys(run.cfg, {"diagram_order"}, "diagrams");
    const int order = run.cfg.get_int("diagram_order");
    if (order < 1) throw usage_error("diagram_order must be >= 1");
    if (order > 3)
        throw resource_error("diagram enumeration capped at order 3 (factorial growth)");
    const bool adjacency = run.cfg.get_int("adjacency", 0) != 0;
    if (adjacency && order > 2)
        throw resource_error("adjacency listing capped at order 2 (output size)");

    auto f = run.open_csv("counts.csv", "n,histories,paired_diagrams,degenerate");
    json adj = json::array();
    for (int n = 1; n <= order; ++n) {
        const auto histories = enumerate_histories(n);
        long long paired = 0, degenerate = 0;
        for (const auto& hl : histories)
            for (const auto& hr : histories) {
                const InteractionDiagram left = build_diagram(n, hl, +1);
                const InteractionDiagram right = build_diagram(n, hr, -1);
                auto pairings = enumerate_pairings(left, right);
                paired += static_cast<long long>(pairings.size());
                for (std::size_t pi = 0; pi < pairings.size(); ++pi) {
                    auto degs = detect_degeneracies(pairings[pi]);
                    if (!degs.empty()) ++degenerate;
                    if (adjacency && n == order) {
                        json v = json::array();
                        const auto& sys = pairings[pi].system;
                        for (std::size_t g = 0; g < sys.vertex_out.size(); ++g)
                            v.push_back({{"out", sys.vertex_out[g]},
                                         {"children", sys.vertex_child[g]},
                                         {"parity", sys.vertex_parity[g]}});
                        adj.push_back({{"history_left", hl},
                                       {"history_right", hr},
                                       {"pairing", pi},
                                       {"pairs", pairings[pi].pairs},
                                       {"vertices", v},
                                       {"degeneracies", degs.size()}});
                    }
                }
            }
        f << n << ',' << histories.size() << ',' << paired << ',' << degenerate << "\n";
    }
    if (adjacency) run.write_json("diagrams.json", json{{"order", order}, {"diagrams", adj}});
}

void cmd_amplitudes(Run& run) {
    require_keys(run.cfg, {"d", "eps", "gamma|lambda", "order", "t"}, "amplitudes");
    const PhysicalParams p = params_from(run.cfg);
    const DataProfile prof = profile_from(run.cfg);
    const int n = run.cfg.get_int("order");
    if (n < 1) throw usage_error("order must be >= 1");
    if (n > 2) throw resource_error("amplitude evaluation capped at order 2 (lattice growth)");
    const double t = run.cfg.get_double("t");
    const std::string method = run.cfg.get_string("method", "both");
    if (method != "time" && method != "resolvent" && method != "both")
        throw usage_error("method must be time, resolvent or both");
    const int freq_cap = run.cfg.get_int("freq_cap", -1);

    auto f = run.open_csv("amplitudes.csv",
                          "n,history_left,history_right,pairing,re,im,method,runtime_s");
    const auto histories = enumerate_histories(n);
    for (const auto& hl : histories)
        for (const auto& hr : histories) {
            const InteractionDiagram left = build_diagram(n, hl, +1);
            const InteractionDiagram right = build_diagram(n, hr, -1);
            auto pairings = enumerate_pairings(left, right);
            for (std::size_t pi = 0; pi < pairings.size(); ++pi) {
                detect_degeneracies(pairings[pi]);
                const SpanningTree tree = build_spanning_tree(pairings[pi]);
                auto emit = [&](const char* name, auto&& eval) {
                    const auto tic = std::chrono::steady_clock::now();
                    const std::complex<double> F = eval();
                    const double sec =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
                            .count();
                    f << n << ',' << join_ints(hl, ':') << ',' << join_ints(hr, ':') << ','
                      << pi << ',' << fmt(F.real()) << ',' << fmt(F.imag()) << ',' << name
                      << ',' << fmt(sec) << "\n";
                };
                if (method != "resolvent")
                    emit("time", [&] {
                        return eval_amplitude_time(pairings[pi], tree, t, p, prof, freq_cap);
                    });
                if (method != "time")
                    emit("resolvent", [&] {
                        return eval_amplitude_resolvent(pairings[pi], tree, t, p, prof,
                                                        freq_cap);
                    });
            }
        }
}

void cmd_kwe(Run& run) {
    require_keys(run.cfg, {"d", "h", "t_final", "dt"}, "kwe");
    const int d = run.cfg.get_int("d");
    const DataProfile prof = profile_from(run.cfg);
    const DensityFn rho_fn = [prof](const double* k, int dd) {
        const double a = prof(k, dd);
        return a * a;
    };
    // the resonance confines the collision output to |k| <= sqrt(2) * support
    const double extent =
        run.cfg.get_double("extent", std::sqrt(2.0) * prof.support_radius + 0.1);
    const SpectralDensity rho0 = sample_density(rho_fn, d, run.cfg.get_double("h"), extent);
    const CollisionQuadrature q = quad_from(run.cfg, prof.support_radius);
    const KineticTrajectory traj = kwe_solve(rho0, run.cfg.get_double("t_final"),
                                             run.cfg.get_double("dt"), q, run.workers);

    auto f = run.open_csv("density.csv", "t,k,rho");
    const int s = traj.rho.front().side();
    for (std::size_t ti = 0; ti < traj.times.size(); ++ti) {
        const SpectralDensity& r = traj.rho[ti];
        for (std::size_t idx = 0; idx < r.size(); ++idx) {
            std::size_t rem = idx;
            std::string k;
            for (int j = d - 1; j >= 0; --j) {
                const double kj = r.h * (static_cast<int>(rem % s) - r.half);
                k = fmt(kj) + (j == d - 1 ? "" : " ") + k;
                rem /= s;
            }
            f << fmt(traj.times[ti]) << ',' << k << ',' << fmt(r.rho[idx]) << "\n";
        }
    }
    run.write_json("drift.json", json{{"t", traj.times},
                                      {"mass", traj.mass},
                                      {"energy", traj.energy},
                                      {"h", rho0.h},
                                      {"d", d}});
}

void cmd_compare(Run& run) {
    require_keys(run.cfg,
                 {"d", "eps", "gamma|lambda", "ensemble_size", "t", "dt", "seed"}, "compare");
    const PhysicalParams p = params_from(run.cfg);
    const DataProfile prof = profile_from(run.cfg);
    const TorusGrid grid = grid_from(run.cfg, p, prof);
    const double t = run.cfg.get_double("t");
    const SpectralTable table =
        run_ensemble(p, grid, prof, run.cfg.get_u64("ensemble_size"), {0.0, t},
                     run.cfg.get_double("dt"), run.master_seed(), run.workers,
                     run.cfg.get_double("control_dt", 0.0));
    const CollisionQuadrature q = quad_from(run.cfg, prof.support_radius);
    const ComparisonReport rep = kinetic_comparison(table, 1, p, prof, q, run.workers);

    auto f = run.open_csv("compare.csv", "k,residual,stderr,predicted");
    for (std::size_t j = 0; j < rep.ks.size(); ++j)
        f << join_ints(rep.ks[j], ' ') << ',' << fmt(rep.residual[j]) << ','
          << fmt(rep.std_error[j]) << ',' << fmt(rep.predicted[j]) << "\n";
    run.write_json("compare.json", json{{"t", rep.t},
                                        {"l1", rep.l1},
                                        {"scale", rep.scale},
                                        {"ratio", rep.ratio},
                                        {"ensemble_size", table.n}});
}

// Quick exact/property aggregation; prints one line per check.
int cmd_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    // Wick oracle on exact cases
    {
        std::vector<std::vector<int>> k4(4, {3, -1});
        check("wick E|G|^4 = 2", wick_expectation(k4, {false, false, true, true}) == 2);
        std::vector<std::vector<int>> k2 = {{1, 2}, {1, 2}};
        check("wick E|G|^2 = 1", wick_expectation(k2, {false, true}) == 1);
        check("wick E G^2 = 0", wick_expectation(k2, {false, false}) == 0);
        std::vector<std::vector<int>> mix = {{1, 0}, {2, 0}};
        check("wick cross moment = 0", wick_expectation(mix, {false, true}) == 0);
    }

    // spanning basis + counting identities, exhaustive n <= 2
    {
        bool basis_ok = true, count_ok = true;
        Rng rng(7);
        for (int n = 1; n <= 2 && (basis_ok || count_ok); ++n) {
            const auto histories = enumerate_histories(n);
            for (const auto& hl : histories)
                for (const auto& hr : histories) {
                    const auto left = build_diagram(n, hl, +1);
                    const auto right = build_diagram(n, hr, -1);
                    auto pairings = enumerate_pairings(left, right);
                    for (auto& pd : pairings) {
                        detect_degeneracies(pd);
                        const SpanningTree tree = build_spanning_tree(pd);
                        if (static_cast<int>(tree.free_edges.size()) != 2 * n + 1)
                            basis_ok = false;
                        for (const auto& row : tree.coeffs)
                            for (int c : row)
                                if (c < -1 || c > 1) basis_ok = false;
                        const DegreeProfile deg = classify_degrees(pd, tree);
                        if (deg.n0 + deg.n1 + deg.n2 != 2 * n) count_ok = false;
                        if (deg.n1 + 2 * deg.n2 != 2 * n) count_ok = false;
                    }
                }
        }
        check("spanning basis (exhaustive n <= 2)", basis_ok);
        check("degree counting identities (exhaustive n <= 2)", count_ok);
    }

    // resolvent vs simplex phase integrals
    {
        bool ok = true;
        Rng rng(11);
        for (int trial = 0; trial < 20 && ok; ++trial) {
            const int m = 1 + trial % 3;
            std::vector<double> e(m);
            for (double& x : e) x = 20.0 * rng.next_uniform() - 10.0;
            const double t = 0.3 + rng.next_uniform();
            const auto a = resolvent_layer_integral(t, e, 1.0 / t);
            std::complex<double> im(1.0, 0.0);
            for (int j = 0; j + 1 < m; ++j) im *= std::complex<double>(0.0, 1.0);
            const auto b = im * exp_divided_difference(t, e);
            if (std::abs(a - b) > 1e-6 * (1.0 + std::abs(b))) ok = false;
        }
        check("resolvent contour = divided difference", ok);
    }

    // collision kernel zeros
    {
        CollisionQuadrature q;
        q.n_angle = 16;
        q.n_radial = 8;
        q.n_plane = 10;
        auto flat = [](const double* k, int d) {
            double n2 = 0.0;
            for (int j = 0; j < d; ++j) n2 += k[j] * k[j];
            return n2 < 36.0 ? 1.0 : 0.0;
        };
        const double k0[2] = {0.2, 0.1};
        check("collision C[const] = 0", std::abs(collision_value(flat, 2, k0, q)) < 1e-10);
        auto rj = [](const double* k, int d) {
            double n2 = 0.0;
            for (int j = 0; j < d; ++j) n2 += k[j] * k[j];
            return 1.0 / std::max(n2, 1e-6);
        };
        const double k1[2] = {3.5, 0.0};
        check("collision C[Rayleigh-Jeans] = 0",
              std::abs(collision_value(rj, 2, k1, q)) < 1e-8);
    }

    std::cout << (failures == 0 ? "selftest OK" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for wave-kinetic transfer from random-data NLS"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = "out";
    int workers = 1;
    std::uint64_t seed = 0;
    bool have_seed = false;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker thread count")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { have_seed = true; });

    for (const char* name : {"simulate", "iterates", "diagrams", "amplitudes", "kwe",
                             "compare", "selftest"})
        app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    const auto tic = std::chrono::steady_clock::now();
    try {
        if (cmd == "selftest") return cmd_selftest();

        if (config_path.empty())
            throw usage_error("--config is required for '" + cmd + "'");
        Run run;
        run.cfg = load_config(config_path);
        run.out = out_dir;
        run.workers = workers;
        run.seed = seed;
        run.seed_overridden = have_seed;
        fs::create_directories(run.out);
        { // verbatim copy of the config next to its artifacts
            std::ofstream c(run.out / "config.txt");
            c << run.cfg.raw;
            run.artifacts.push_back("config.txt");
        }

        if (cmd == "simulate") cmd_simulate(run);
        else if (cmd == "iterates") cmd_iterates(run);
        else if (cmd == "diagrams") cmd_diagrams(run);
        else if (cmd == "amplitudes") cmd_amplitudes(run);
        else if (cmd == "kwe") cmd_kwe(run);
        else if (cmd == "compare") cmd_compare(run);

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        json manifest{{"subcommand", cmd},
                      {"config_hash", config_hash(run.cfg)},
                      {"version", kVersion},
                      {"wall_time_s", wall},
                      {"workers", workers},
                      {"artifacts", run.artifacts}};
        if (have_seed || run.cfg.has("seed")) manifest["seed"] = run.master_seed();
        std::ofstream m(run.out / "manifest.json");
        m << manifest.dump(2) << "\n";
        return 0;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const resource_error& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
