// Command-line front end: unperturbed, perturbed, spectrum, residual-check.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <isochron/isochron.hpp>

namespace fs = std::filesystem;
using namespace isochron;

namespace {

enum exit_code { ok = 0, usage = 2, numerical = 3, io = 4 };

struct io_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    double mu = 1.5;
    double epsilon = 0;
    std::string delay = "exp";
    double delay_c = 0.006;
    double delay_gamma = 2.0;
    std::size_t n_theta = 1024;
    std::size_t degree = 16;
    std::size_t k_degree = 16;
    std::size_t w_degree = 12;
    double tol = 1e-10;
    std::size_t max_iter = 100;
    double scale = 1.0;
    bool two_pass = true;
    std::string out = ".";
    unsigned threads = 1;
    std::string k_file, w_file, input;
    double threshold = 1e-8;

    ConfigEcho echo() const
    {
        ConfigEcho e{{"command", command}};
        auto num = [&](const char* k, double v) { e.emplace_back(k, format_double(v)); };
        if (command == "unperturbed" || command == "perturbed" || command == "residual-check") num("mu", mu);
        if (command == "perturbed" || command == "residual-check") {
            num("epsilon", epsilon);
            e.emplace_back("delay", delay);
            num("delay_c", delay_c);
            num("delay_gamma", delay_gamma);
        }
        if (command == "unperturbed" || command == "perturbed") {
            e.emplace_back("ntheta", std::to_string(n_theta));
            if (command == "perturbed") {
                e.emplace_back("degree", std::to_string(w_degree));
                e.emplace_back("k_degree", std::to_string(k_degree));
            } else {
                e.emplace_back("degree", std::to_string(degree));
            }
            num("tol", tol);
            e.emplace_back("max_iter", std::to_string(max_iter));
            num("scale", scale);
            if (command == "perturbed") e.emplace_back("two_pass_scaling", two_pass ? "true" : "false");
        }
        if (!k_file.empty()) e.emplace_back("K", k_file);
        if (!w_file.empty()) e.emplace_back("W", w_file);
        if (!input.empty()) e.emplace_back("input", input);
        if (command == "residual-check") num("threshold", threshold);
        e.emplace_back("threads", std::to_string(threads));
        return e;
    }

    SolverConfig solver(std::size_t deg) const
    {
        SolverConfig c;
        c.n_theta = n_theta;
        c.degree = deg;
        c.tol_residual = tol;
        c.tol_correction = tol;
        c.max_iter = max_iter;
        c.two_pass_scaling = two_pass;
        return c;
    }

    SDDEModel model() const { return vdp_sdde(mu, epsilon, parse_delay_kind(delay), delay_c, delay_gamma); }
};

std::ofstream open_out(const RunConfig& rc, const std::string& name)
{
    std::error_code ec;
    fs::create_directories(rc.out, ec);
    if (ec) throw io_failure("cannot create output directory " + rc.out + ": " + ec.message());
    auto path = fs::path(rc.out) / name;
    std::ofstream os(path);
    if (!os) throw io_failure("cannot open " + path.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw io_failure("cannot open " + path);
    return is;
}

void write_order_table(const RunConfig& rc, const std::string& file, const std::string& content,
                       const std::string& column, const std::vector<double>& v, std::size_t first = 0)
{
    auto os = open_out(rc, file);
    write_header(os, content, rc.echo());
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < v.size(); ++j) rows.push_back({static_cast<double>(j + first), v[j]});
    write_table(os, {"order", column}, rows);
}

void write_param(const RunConfig& rc, const std::string& file, const std::string& content, const Parameterization& P)
{
    auto os = open_out(rc, file);
    write_header(os, content, rc.echo());
    write_parameterization(os, P);
}

void write_summary(const RunConfig& rc, const std::string& content, const SolveReport& rep)
{
    auto os = open_out(rc, "summary.txt");
    write_header(os, content, rc.echo());
    write_report(os, rep);
}

void print_summary(const SolveReport& rep)
{
    std::printf("omega = %.16g\nlambda = %.16g\nb = %.16g\niterations = %zu\n", rep.omega, rep.lambda, rep.b,
                rep.iterations);
}

Parameterization unperturbed_K(const RunConfig& rc, std::size_t degree, SolveReport* rep = nullptr)
{
    auto [K, r] = compute_unperturbed(van_der_pol(rc.mu), {2.0, 0.0}, rc.solver(degree));
    if (rep) *rep = std::move(r);
    return K;
}

int cmd_unperturbed(const RunConfig& rc)
{
    SolveReport rep;
    auto K = unperturbed_K(rc, rc.degree, &rep);
    write_param(rc, "K.txt", "unperturbed parameterization K", K);
    write_summary(rc, "unperturbed solve log", rep);
    write_order_table(rc, "residuals.txt", "invariance residual per order", "residual", rep.order_residuals);
    {
        auto os = open_out(rc, "isochrons.txt");
        write_header(os, "cycle (curve -1) and isochrons theta = const", rc.echo());
        write_table(os, {"curve", "theta", "s", "x", "y"}, isochron_points(K, 32, 101, 1.0));
    }
    {
        auto os = open_out(rc, "spectrum.txt");
        write_header(os, "log10 power spectrum of K^0", rc.echo());
        write_table(os, {"k", "log10_power_x", "log10_power_y"},
                    spectrum_rows({K.map.part(0)[0], K.map.part(1)[0]}));
    }
    std::printf("omega0 = %.16g\nlambda0 = %.16g\n", K.omega, K.lambda);
    print_summary(rep);
    return ok;
}

int cmd_perturbed(const RunConfig& rc)
{
    Parameterization K;
    if (!rc.k_file.empty()) {
        auto is = open_in(rc.k_file);
        K = read_parameterization(is);
        if (K.map.n_theta() != rc.n_theta)
            throw contract_error("K in " + rc.k_file + " has n_theta = " + std::to_string(K.map.n_theta()));
    } else {
        K = unperturbed_K(rc, rc.k_degree);
        write_param(rc, "K.txt", "unperturbed parameterization K", K);
    }
    auto cfg = rc.solver(rc.w_degree);
    cfg.scale_b = rc.scale;
    auto model = rc.model();
    auto sol = solve_perturbed(model, K, cfg);
    const auto& rep = sol.report;
    write_param(rc, "W.txt", "perturbed parameterization W", sol.W);
    write_summary(rc, "perturbed solve log", rep);
    write_order_table(rc, "residuals.txt", "invariance residual per order", "residual", rep.order_residuals);
    write_order_table(rc, "deviation.txt", "norm of K^j - (K o W)^j per order", "deviation",
                      deviation_norms(K, sol.W));
    write_order_table(rc, "scaling.txt", "admissible scaling factor when truncating at each order", "b",
                      rep.scaling_per_order, 1);
    auto KW = compose_K_with_W(K, sol.W.map).value;
    {
        auto os = open_out(rc, "spectrum.txt");
        write_header(os, "log10 power spectrum of (K o W)^0", rc.echo());
        write_table(os, {"k", "log10_power_x", "log10_power_y"}, spectrum_rows({KW[0][0], KW[1][0]}));
    }
    {
        std::vector<std::vector<double>> rows;
        const std::size_t curves = 32, points = 101;
        for (std::size_t c = 0; c < curves; ++c) {
            const double th = static_cast<double>(c) / curves;
            for (std::size_t i = 0; i < points; ++i) {
                const double s = -1.0 + 2.0 * static_cast<double>(i) / (points - 1);
                rows.push_back({static_cast<double>(c), th, s, KW[0](th, s * sol.W.scale_b),
                                KW[1](th, s * sol.W.scale_b)});
            }
        }
        auto os = open_out(rc, "isochrons.txt");
        write_header(os, "isochrons of the perturbed problem, (K o W)(theta, s) with scaled s", rc.echo());
        write_table(os, {"curve", "theta", "s", "x", "y"}, rows);
    }
    print_summary(rep);
    return ok;
}

int cmd_spectrum(const RunConfig& rc)
{
    if (rc.input.empty()) throw CLI::ValidationError("spectrum", "--input is required");
    auto is = open_in(rc.input);
    auto K = read_parameterization(is);
    std::vector<PeriodicFunction> fs{K.map.part(0)[0], K.map.part(1)[0]};
    std::string what = "K^0";
    if (!rc.w_file.empty()) {
        auto ws = open_in(rc.w_file);
        auto W = read_parameterization(ws);
        auto KW = compose_K_with_W(K, W.map).value;
        fs = {KW[0][0], KW[1][0]};
        what = "(K o W)^0";
    }
    auto os = open_out(rc, "spectrum.txt");
    write_header(os, "log10 power spectrum of " + what, rc.echo());
    write_table(os, {"k", "log10_power_x", "log10_power_y"}, spectrum_rows(fs));
    std::printf("even_power_x = %.6e\neven_power_y = %.6e\n", even_mode_power(fs[0]), even_mode_power(fs[1]));
    return ok;
}

int cmd_residual_check(RunConfig rc, const CLI::App& sub)
{
    if (rc.k_file.empty() || rc.w_file.empty())
        throw CLI::ValidationError("residual-check", "--K and --W are required");
    auto ks = open_in(rc.k_file);
    auto K = read_parameterization(ks);
    auto ws = open_in(rc.w_file);
    auto echo = read_config_echo(ws);
    ws.clear();
    ws.seekg(0);
    auto W = read_parameterization(ws);
    // model parameters default to those the W file was computed with
    auto take = [&](const char* flag, const char* key, auto& field) {
        if (sub.count(flag) == 0 && echo.count(key)) {
            if constexpr (std::is_same_v<std::decay_t<decltype(field)>, std::string>)
                field = echo.at(key);
            else
                field = detail::parse_double(echo.at(key));
        }
    };
    take("--mu", "mu", rc.mu);
    take("--epsilon", "epsilon", rc.epsilon);
    take("--delay", "delay", rc.delay);
    take("--delay-c", "delay_c", rc.delay_c);
    take("--delay-gamma", "delay_gamma", rc.delay_gamma);
    auto res = invariance_residuals(rc.model(), K, W);
    bool pass = true;
    std::printf("# order residual verdict (threshold %.3g)\n", rc.threshold);
    for (std::size_t j = 0; j < res.size(); ++j) {
        const bool p = res[j] <= rc.threshold;
        pass = pass && p;
        std::printf("%zu %.6e %s\n", j, res[j], p ? "PASS" : "FAIL");
    }
    std::printf("%s\n", pass ? "PASS: all orders within threshold" : "FAIL: invariance residual above threshold");
    return pass ? ok : numerical;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Limit cycles and isochrons of planar ODEs and of state-dependent delay perturbations"};
    app.require_subcommand(1);
    RunConfig rc;

    auto model_opts = [&](CLI::App* s) {
        s->add_option("--mu", rc.mu, "van der Pol parameter")->capture_default_str();
        s->add_option("--epsilon", rc.epsilon, "perturbation size")->capture_default_str();
        s->add_option("--delay", rc.delay, "delay kind")->check(CLI::IsMember({"constant", "exp"}))->capture_default_str();
        s->add_option("--delay-c", rc.delay_c, "delay constant c")->capture_default_str();
        s->add_option("--delay-gamma", rc.delay_gamma, "exponent gamma of r = c exp(gamma x)")->capture_default_str();
    };
    auto solver_opts = [&](CLI::App* s) {
        s->add_option("--ntheta", rc.n_theta, "Fourier grid size")->capture_default_str();
        s->add_option("--tol", rc.tol, "residual and correction tolerance")->capture_default_str();
        s->add_option("--max-iter", rc.max_iter, "iterations per order")->capture_default_str();
        s->add_option("--scale", rc.scale, "scaling factor b (first pass)")->capture_default_str();
    };
    auto common = [&](CLI::App* s) {
        s->add_option("--out", rc.out, "output directory")->capture_default_str();
        s->add_option("--threads", rc.threads, "worker cap (1 is bit-reproducible)")->capture_default_str();
    };

    auto* un = app.add_subcommand("unperturbed", "limit cycle and isochrons of van der Pol");
    un->add_option("--mu", rc.mu, "van der Pol parameter")->capture_default_str();
    un->add_option("--degree", rc.degree, "Taylor degree of K")->capture_default_str();
    solver_opts(un);
    common(un);

    auto* pe = app.add_subcommand("perturbed", "W, omega and lambda of the delayed van der Pol");
    model_opts(pe);
    solver_opts(pe);
    common(pe);
    pe->add_option("--degree", rc.w_degree, "Taylor degree of W")->capture_default_str();
    pe->add_option("--k-degree", rc.k_degree, "degree of K when computed inline")->capture_default_str();
    pe->add_option("--two-pass-scaling", rc.two_pass, "re-solve with the chosen scaling")->capture_default_str();
    pe->add_option("--K", rc.k_file, "precomputed K file");

    auto* sp = app.add_subcommand("spectrum", "power spectrum of K^0 or (K o W)^0");
    sp->add_option("--input", rc.input, "K file");
    sp->add_option("--W", rc.w_file, "W file; the spectrum is then that of (K o W)^0");
    common(sp);

    auto* rcx = app.add_subcommand("residual-check", "recompute invariance residuals of stored K and W");
    model_opts(rcx);
    rcx->add_option("--K", rc.k_file, "K file");
    rcx->add_option("--W", rc.w_file, "W file");
    rcx->add_option("--threshold", rc.threshold, "largest accepted residual")->capture_default_str();
    rcx->add_option("--threads", rc.threads, "worker cap")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (rc.threads < 1) throw contract_error("--threads must be >= 1");
        set_max_threads(rc.threads);
        if (un->parsed()) {
            rc.command = "unperturbed";
            return cmd_unperturbed(rc);
        }
        if (pe->parsed()) {
            rc.command = "perturbed";
            return cmd_perturbed(rc);
        }
        if (sp->parsed()) {
            rc.command = "spectrum";
            return cmd_spectrum(rc);
        }
        rc.command = "residual-check";
        return cmd_residual_check(rc, *rcx);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const contract_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const io_failure& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return io;
    } catch (const parse_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return io;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical;
    }
}
