// hdg-interp: convergence studies for the interpolatory HDG (A/B/C) methods.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ihdg/errors.hpp"
#include "ihdg/mesh.hpp"
#include "ihdg/study.hpp"

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// `key = value` lines; '#' starts a comment. Keys are flag names without dashes.
std::map<std::string, std::string> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ihdg::IoError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ihdg::IoError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

// Splices config-file entries into argv for every flag not given explicitly,
// so command-line flags always win.
std::vector<std::string> merge_config(const std::vector<std::string>& args)
{
    std::string config_path;
    std::set<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0)
            continue;
        std::string name = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
        given.insert(name);
        if (name == "config") {
            if (a.find('=') != std::string::npos)
                config_path = a.substr(a.find('=') + 1);
            else if (i + 1 < args.size())
                config_path = args[i + 1];
        }
    }
    if (config_path.empty())
        return args;

    std::vector<std::string> out = args;
    for (const auto& [key, value] : read_config_file(config_path)) {
        if (given.count(key) || key == "config")
            continue;
        if (key == "newton") {
            if (value == "true" || value == "1" || value == "yes")
                out.push_back("--newton");
            continue;
        }
        out.push_back("--" + key);
        out.push_back(value);
    }
    return out;
}

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!trim(tok).empty())
            out.push_back(std::stod(trim(tok)));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Interpolatory HDG (A/B/C) methods for semilinear reaction-diffusion equations"};
    app.require_subcommand(1);

    std::string variant = "A";
    int k = 0;
    std::string levels = "2,4,8,16,32";
    std::string dt_policy = "h";
    std::string problem = "chaffee_infante";
    std::string ic = "l2";
    double final_time = 1.0;
    std::string out_path;
    bool newton = false;
    double tol = 1e-10;
    int max_iter = 50;
    std::string mesh_file;
    std::string config_file;
    std::string plot_path;
    std::string snapshots;
    double omega = 1.0;
    double phase = 0.0;
    int mx = 1;
    int my = 1;
    std::string nonlinearity = "zero";

    auto* sweep = app.add_subcommand("sweep", "Run a convergence study over mesh refinements");
    sweep->add_option("--variant", variant, "Method variant")->check(CLI::IsMember({"A", "B", "C"}));
    sweep->add_option("--k", k, "Flux/trace polynomial degree")->check(CLI::Range(0, 3));
    sweep->add_option("--levels", levels, "Comma-separated subdivisions per side, e.g. 2,4,8");
    sweep->add_option("--dt-policy", dt_policy, "h | h2 | fixed:VAL (h = largest element diameter)");
    sweep->add_option("--problem", problem, "Manufactured problem")
        ->check(CLI::IsMember({"chaffee_infante", "linear_poly", "custom"}));
    sweep->add_option("--ic", ic, "Initial condition")->check(CLI::IsMember({"l2", "elliptic"}));
    sweep->add_option("--T", final_time, "Final time")->check(CLI::NonNegativeNumber);
    sweep->add_option("--out", out_path, "CSV output path")->required();
    sweep->add_flag("--newton", newton, "Full Newton instead of frozen-matrix Picard iteration");
    sweep->add_option("--tol", tol, "Nonlinear increment tolerance (sup norm)")->check(CLI::PositiveNumber);
    sweep->add_option("--max-iter", max_iter, "Maximum nonlinear iterations per step")->check(CLI::PositiveNumber);
    sweep->add_option("--mesh-file", mesh_file, "Base mesh; level n subdivides each triangle n times per edge");
    sweep->add_option("--config", config_file, "File of 'key = value' lines mirroring the flags");
    sweep->add_option("--plot", plot_path, "Also write a gnuplot data file");
    sweep->add_option("--snapshots", snapshots, "Comma-separated intermediate times to report errors at");
    sweep->add_option("--omega", omega, "custom problem: temporal frequency");
    sweep->add_option("--phase", phase, "custom problem: temporal phase");
    sweep->add_option("--mx", mx, "custom problem: x wave number")->check(CLI::PositiveNumber);
    sweep->add_option("--my", my, "custom problem: y wave number")->check(CLI::PositiveNumber);
    sweep->add_option("--nonlinearity", nonlinearity, "custom problem: F")
        ->check(CLI::IsMember({"zero", "chaffee_infante"}));

    int mesh_n = 1;
    std::string mesh_out;
    auto* mesh_cmd = app.add_subcommand("mesh", "Write the uniform unit-square mesh in the plain-text format");
    mesh_cmd->add_option("--n", mesh_n, "Subdivisions per side")->required()->check(CLI::PositiveNumber);
    mesh_cmd->add_option("--out", mesh_out, "Output path")->required();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config(args);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*mesh_cmd) {
            std::ofstream out(mesh_out);
            if (!out)
                throw ihdg::IoError("cannot open '" + mesh_out + "' for writing");
            ihdg::write_mesh(out, ihdg::build_uniform_square(mesh_n));
            return 0;
        }

        ihdg::SweepConfig cfg;
        cfg.degree = ihdg::DegreeConfig(ihdg::parse_variant(variant), k);
        for (double v : parse_list(levels)) {
            if (v < 1 || v != static_cast<int>(v))
                throw ihdg::InvalidArgument("levels must be positive integers");
            cfg.levels.push_back(static_cast<int>(v));
        }
        if (!std::is_sorted(cfg.levels.begin(), cfg.levels.end()))
            throw ihdg::InvalidArgument("levels must be increasing");
        cfg.time.final_time = final_time;
        cfg.time.dt = ihdg::DtPolicy::parse(dt_policy);
        cfg.time.tolerance = tol;
        cfg.time.max_iterations = max_iter;
        cfg.time.initial_condition = ihdg::parse_initial_condition(ic);
        cfg.time.newton = newton;
        if (problem == "custom")
            cfg.problem = ihdg::ManufacturedProblem::custom(omega, phase, mx, my,
                                                            ihdg::Nonlinearity::from_name(nonlinearity));
        else
            cfg.problem = ihdg::ManufacturedProblem::from_name(problem);
        cfg.problem.final_time = final_time;
        if (!mesh_file.empty())
            cfg.base_mesh = ihdg::read_mesh_file(mesh_file);
        cfg.snapshot_times = parse_list(snapshots);

        const ihdg::SweepResult result = ihdg::run_sweep(cfg);
        ihdg::emit_csv(out_path, result);
        if (!plot_path.empty())
            ihdg::emit_plot_data(plot_path, result);
        ihdg::print_table(std::cout, result);
        for (const auto& lv : result.levels)
            for (const auto& [t, err] : lv.snapshots)
                std::cout << "  n=" << lv.n << " t=" << t << " |q-qh|=" << err.q << " |u-uh|=" << err.u
                          << " |u-uh*|=" << err.ustar << '\n';
        return result.all_ok() ? 0 : 1;
    } catch (const ihdg::Error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
}
