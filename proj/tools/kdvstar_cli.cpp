#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kdvstar/coupling.hpp"
#include "kdvstar/format.hpp"
#include "kdvstar/graph.hpp"
#include "kdvstar/pde.hpp"
#include "kdvstar/phaseplane.hpp"
#include "kdvstar/soliton.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kdvstar;

namespace {

enum Exit { kPass = 0, kNegative = 1, kConfig = 2, kBlowUp = 3 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Output directory with a record of everything written into it.
class Outdir {
public:
    explicit Outdir(const std::string& path) : root_(path) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec) throw ConfigError("cannot create output directory " + path + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& text) {
        std::ofstream out(root_ / name, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + (root_ / name).string());
        out << text;
        files_.push_back(name);
    }

    void manifest(const std::string& subcommand, const json& inputs, const json& params, int exit_code) {
        json m = {{"tool", "kdvstar"},
                  {"version", version()},
                  {"subcommand", subcommand},
                  {"inputs", inputs},
                  {"parameters", params},
                  {"exit_code", exit_code}};
        m["artifacts"] = files_;
        write("manifest.json", m.dump(2) + "\n");
    }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

GraphFile load(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("graph file not found: " + path);
    return load_graph_file(read_text_file(path));
}

std::string edge_name(std::size_t k, const StarGraph& g) {
    EdgeRef ref{g.orientation(k),
                g.orientation(k) == Orientation::Incoming ? k : k - g.edges_minus.size()};
    return describe(ref);
}

ConditionReport run_check(const GraphFile& f, double tol) {
    Matrix U = coupling_matrix(f.graph, f.coupling);
    if (f.coupling.kind == CouplingKind::YJunction)
        return check_yjunction(yjunction_from_graph(f.graph, f.coupling.a, U), tol);
    return check_main_theorem(f.graph, U, tol);
}

// --- check --------------------------------------------------------------

struct CheckArgs {
    std::string graph, out = "out";
    std::optional<double> tol;
};

int cmd_check(const CheckArgs& a) {
    auto f = load(a.graph);
    double tol = a.tol.value_or(f.tolerance);
    if (!(tol > 0.0)) throw ConfigError("--tol must be positive");
    auto r = run_check(f, tol);
    Outdir out(a.out);
    auto table = report_to_table(r);
    out.write("report.txt", table);
    out.write("report.json", report_to_json(r));
    int code = r.pass ? kPass : kNegative;
    out.manifest("check", {{"graph", a.graph}}, {{"tolerance", tol}}, code);
    std::cout << table;
    return code;
}

// --- wave ---------------------------------------------------------------

struct WaveArgs {
    std::string graph, out = "out", range = "-20:20:0.1";
};

std::vector<double> parse_range(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--range expects ymin:ymax:step, got " + s);
        }
    }
    if (v.size() != 3 || !(v[2] > 0.0) || !(v[1] >= v[0])) throw ConfigError("--range expects ymin:ymax:step with step > 0");
    return v;
}

int cmd_wave(const WaveArgs& a) {
    auto f = load(a.graph);
    auto range = parse_range(a.range);
    Outdir out(a.out);
    json summary = json::array();
    int code = kPass;
    for (std::size_t k = 0; k < f.graph.size(); ++k) {
        auto name = edge_name(k, f.graph);
        const auto& p = f.graph.edge(k);
        if (!(p.beta + p.c > 0.0)) {
            std::cerr << name << ": beta + c = " << fmt17(p.beta + p.c) << " is not positive, no solitary wave\n";
            summary.push_back({{"edge", name}, {"exists", false}});
            code = kNegative;
            continue;
        }
        auto prof = build_profile(p);
        auto rows = sample_profile(prof, range[0], range[1], range[2]);
        double worst = 0.0;
        for (auto& r : rows) worst = std::max(worst, std::abs(r.residual));
        std::string file = std::string("wave_") +
                           (f.graph.orientation(k) == Orientation::Incoming ? "minus_" : "plus_") +
                           std::to_string(k < f.graph.edges_minus.size() ? k : k - f.graph.edges_minus.size()) +
                           ".tsv";
        out.write(file, format_samples(rows));
        summary.push_back({{"edge", name},
                           {"exists", true},
                           {"file", file},
                           {"rows", rows.size()},
                           {"amplitude", prof.amplitude},
                           {"width_rate", prof.width_rate},
                           {"max_abs_residual", fmt17(worst)}});
    }
    out.write("waves.json", summary.dump(2) + "\n");
    out.manifest("wave", {{"graph", a.graph}}, {{"range", a.range}}, code);
    return code;
}

// --- phase --------------------------------------------------------------

struct PhaseArgs {
    PhaseParams p{1.0, 0.0, 1.0, 1.0, 0.0};
    std::string out = "out";
    int grid = 21;
    double offset = 1e-6;
};

std::string point_line(const char* name, const OrbitState& s, const char* kind) {
    return std::string("# ") + name + " " + fmt17(s.phi) + " " + fmt17(s.psi) + " " + kind + "\n";
}

int cmd_phase(const PhaseArgs& a) {
    const auto& p = a.p;
    if (!(p.alpha > 0.0) || p.gamma == 0.0) throw ConfigError("phase needs alpha > 0 and gamma != 0");
    if (a.grid < 2) throw ConfigError("--grid needs at least 2 samples");
    auto c = classify(p);
    Outdir out(a.out);

    std::ostringstream head;
    head << "# classification " << to_string(c.verdict) << "\n# discriminant " << fmt17(c.discriminant) << "\n";
    double span = 1.0;
    if (c.verdict == StationaryKind::CenterAndSaddle) {
        head << point_line("point", c.p_minus, "center") << point_line("point", c.p_plus, "saddle");
        head << "# lambda2 " << fmt17(c.lambda2_minus) << " " << fmt17(c.lambda2_plus) << "\n";
        span = std::max(span, 1.5 * std::abs(c.p_plus.phi - c.p_minus.phi));
    } else if (c.verdict == StationaryKind::OneDegenerate) {
        head << point_line("point", c.point, "degenerate");
    }
    out.write("stationary.txt", head.str());

    double center = c.verdict == StationaryKind::CenterAndSaddle ? 0.5 * (c.p_minus.phi + c.p_plus.phi)
                    : c.verdict == StationaryKind::OneDegenerate ? c.point.phi
                                                                 : 0.0;
    std::ostringstream field;
    field << head.str() << "phi\tpsi\tdphi\tdpsi\n";
    for (auto& s : sample_vector_field(p, center - span, center + span, -span, span, a.grid, a.grid))
        field << fmt17(s.phi) << '\t' << fmt17(s.psi) << '\t' << fmt17(s.dphi) << '\t' << fmt17(s.dpsi) << '\n';
    out.write("field.tsv", field.str());

    json extra = json::object();
    if (p.A == 0.0 && p.beta + p.c > 0.0) {
        HomoclinicOptions opt;
        opt.offset = a.offset;
        auto r = homoclinic_shoot(p, opt);
        std::ostringstream orbit;
        orbit << head.str() << "# returned " << (r.returned ? "yes" : "no") << "\n# extremum " << fmt17(r.extremum_time)
              << " " << fmt17(r.extremum_value) << "\n# max_H_drift " << fmt17(r.orbit.max_H_drift) << "\n";
        orbit << "t\tphi\tpsi\tH\n";
        for (std::size_t i = 0; i < r.orbit.t.size(); ++i)
            orbit << fmt17(r.orbit.t[i]) << '\t' << fmt17(r.orbit.x[i].phi) << '\t' << fmt17(r.orbit.x[i].psi) << '\t'
                  << fmt17(r.orbit.H[i]) << '\n';
        out.write("orbit.tsv", orbit.str());
        extra = {{"returned", r.returned}, {"max_H_drift", fmt17(r.orbit.max_H_drift)}};
    }
    out.manifest("phase", json::object(),
                 {{"alpha", p.alpha},
                  {"beta", p.beta},
                  {"gamma", p.gamma},
                  {"c", p.c},
                  {"A", p.A},
                  {"grid", a.grid},
                  {"offset", a.offset},
                  {"orbit", extra}},
                 kPass);
    std::cout << head.str();
    return kPass;
}

// --- simulate -----------------------------------------------------------

struct SimArgs {
    std::string graph, out = "out";
    std::optional<double> t_final, h, dt, tol;
    std::optional<int> frames;
    bool override_check = false;
    bool no_probe = false;
};

std::string frame_table(const GraphField& f, const StarGraph& g, const Discretization& d,
                        const std::vector<SolitonProfile>& profiles) {
    std::ostringstream s;
    s << "# t " << fmt17(f.t) << "\nedge\tx\tu\texact\n";
    for (std::size_t k = 0; k < f.u.size(); ++k) {
        double sg = g.orientation(k) == Orientation::Incoming ? -1.0 : 1.0;
        for (std::size_t j = 0; j < f.u[k].size(); ++j) {
            double x = sg * static_cast<double>(j) * d.h;
            double ex = profiles.empty() ? std::nan("") : eval(profiles[k], x - profiles[k].params.c * f.t, 0);
            s << edge_name(k, g) << '\t' << fmt17(x) << '\t' << fmt17(f.u[k][j]) << '\t' << fmt17(ex) << '\n';
        }
    }
    return s.str();
}

int cmd_simulate(const SimArgs& a) {
    auto f = load(a.graph);
    auto& sim = f.simulate;
    if (a.t_final) sim.t_final = *a.t_final;
    if (a.h) sim.h = *a.h;
    if (a.dt) sim.dt = *a.dt;
    if (a.frames) sim.frames = *a.frames;
    double tol = a.tol.value_or(f.tolerance);

    auto report = run_check(f, tol);
    if (!report.pass && !a.override_check) {
        std::cerr << "checklist fails (" << report.failed_ids().size()
                  << " conditions); rerun with --override-check to simulate anyway\n"
                  << report_to_table(report);
        return kNegative;
    }
    std::vector<SolitonProfile> profiles;
    for (auto& e : f.graph.all_edges()) {
        if (!(e.beta + e.c > 0.0)) throw ConfigError("every edge needs beta + c > 0 for soliton initial data");
        profiles.push_back(build_profile(e));
    }

    auto disc = make_discretization(f.graph, sim.length, sim.h, sim.c_stab);
    if (sim.dt) disc.dt = *sim.dt;
    SolverOptions opt;
    opt.stability_probe = !a.no_probe;
    StarGraphSolver solver(f.graph, vertex_coupling(f.graph, f.coupling), disc, opt);
    auto init = sample_travelling_waves(profiles, f.graph, disc, 0.0);
    auto res = solver.evolve(init, sim.t_final, sim.frames, profiles);

    Outdir out(a.out);
    std::ostringstream diag;
    diag << "t\trel_l2_error\ttrace_to_Y\tflux_to_Yperp\tderivative_U\tcandidate_defect\tmax_abs\n";
    double worst_vertex = 0.0;
    for (std::size_t i = 0; i < res.frames.size(); ++i) {
        const auto& fr = res.frames[i];
        diag << fmt17(fr.t) << '\t' << fmt17(fr.rel_l2_error) << '\t' << fmt17(fr.vertex.trace_to_Y) << '\t'
             << fmt17(fr.vertex.flux_to_Yperp) << '\t' << fmt17(fr.vertex.derivative_U) << '\t'
             << fmt17(fr.candidate_defect) << '\t' << fmt17(fr.max_abs) << '\n';
        worst_vertex = std::max(worst_vertex, fr.vertex.max());
    }
    out.write("diagnostics.tsv", diag.str());
    out.write("frame_initial.tsv", frame_table(init, f.graph, disc, profiles));

    int code;
    if (res.blow_up) {
        out.write("frame_last_stable.tsv", frame_table(res.last_stable, f.graph, disc, profiles));
        std::cerr << res.message << "\n";
        code = kBlowUp;
    } else {
        out.write("frame_final.tsv", frame_table(res.final_field, f.graph, disc, profiles));
        double err = res.frames.back().rel_l2_error;
        code = (err <= sim.max_rel_error && worst_vertex <= sim.max_vertex_residual) ? kPass : kNegative;
        std::cout << "final relative L2 error " << fmt17(err) << "\nmax vertex residual " << fmt17(worst_vertex)
                  << "\n";
    }
    out.manifest("simulate", {{"graph", a.graph}},
                 {{"h", disc.h},
                  {"dt", disc.dt},
                  {"length", disc.length},
                  {"t_final", sim.t_final},
                  {"frames", sim.frames},
                  {"checklist_pass", report.pass},
                  {"override_check", a.override_check},
                  {"probe_growth_rate", fmt17(solver.probe_growth_rate())},
                  {"steps", res.steps},
                  {"max_rel_error", sim.max_rel_error},
                  {"max_vertex_residual", sim.max_vertex_residual}},
                 code);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solitary waves of KdV on metric star graphs"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    CheckArgs ca;
    auto* check = app.add_subcommand("check", "Evaluate the compatibility checklist for a graph file");
    check->add_option("--graph", ca.graph, "graph file (JSON)")->required();
    check->add_option("--out", ca.out, "output directory");
    check->add_option("--tol", ca.tol, "tolerance (default: from the graph file)");

    WaveArgs wa;
    auto* wave = app.add_subcommand("wave", "Sample the solitary-wave profile of every edge");
    wave->add_option("--graph", wa.graph, "graph file (JSON)")->required();
    wave->add_option("--out", wa.out, "output directory");
    wave->add_option("--range", wa.range, "ymin:ymax:step (use --range=... for negative ymin)");

    PhaseArgs pa;
    auto* phase = app.add_subcommand("phase", "Phase portrait of the travelling-wave ODE");
    phase->add_option("--alpha", pa.p.alpha);
    phase->add_option("--beta", pa.p.beta);
    phase->add_option("--gamma", pa.p.gamma);
    phase->add_option("--c", pa.p.c);
    phase->add_option("--A", pa.p.A, "integration constant");
    phase->add_option("--grid", pa.grid, "vector-field samples per axis");
    phase->add_option("--offset", pa.offset, "homoclinic start offset from the saddle");
    phase->add_option("--out", pa.out, "output directory");

    SimArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Method-of-lines evolution of the soliton initial data");
    simulate->set_help_flag("--help", "Print this help message and exit");
    simulate->add_option("--graph", sa.graph, "graph file (JSON)")->required();
    simulate->add_option("--out", sa.out, "output directory");
    simulate->add_option("--t-final", sa.t_final, "final time");
    simulate->add_option("--h", sa.h, "grid spacing");
    simulate->add_option("--dt", sa.dt, "time step (default c_stab h^3 / max alpha)");
    simulate->add_option("--frames", sa.frames, "number of output frames");
    simulate->add_option("--tol", sa.tol, "checklist tolerance");
    simulate->add_flag("--override-check", sa.override_check, "simulate even if the checklist fails");
    simulate->add_flag("--no-stability-probe", sa.no_probe, "skip the spurious-mode check of the vertex closure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kConfig;
    }

    try {
        if (*check) return cmd_check(ca);
        if (*wave) return cmd_wave(wa);
        if (*phase) return cmd_phase(pa);
        if (*simulate) return cmd_simulate(sa);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const SetupError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const BlowUpError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBlowUp;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kConfig;
}
