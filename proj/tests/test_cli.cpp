#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <isochron/io.hpp>

using namespace isochron;
namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "isochron_cli_test";

int run(const std::string& args)
{
    const std::string cmd = std::string(ISOCHRON_CLI) + " " + args + " > " + (work / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p);
    return {std::istreambuf_iterator<char>(is), {}};
}

std::map<std::string, double> summary(const fs::path& dir)
{
    std::ifstream is(dir / "summary.txt");
    return read_summary(is);
}

Parameterization load(const fs::path& p)
{
    std::ifstream is(p);
    return read_parameterization(is);
}

struct Workdir {
    Workdir() { fs::create_directories(work); }
};
const Workdir workdir;

} // namespace

TEST_CASE("cli unperturbed reproduces lambda0 at mu = 0.5 and writes parseable files")
{
    const auto out = work / "u05";
    REQUIRE(run("unperturbed --mu 0.5 --out " + out.string()) == 0);
    auto s = summary(out);
    CHECK(std::abs(s.at("lambda") + 0.5077310891698608) <= 1e-8);
    CHECK(std::abs(s.at("omega") - 0.1567232109993800) <= 1e-8);
    for (const char* f : {"K.txt", "summary.txt", "residuals.txt", "isochrons.txt", "spectrum.txt"}) {
        const auto text = slurp(out / f);
        CHECK(text.rfind("# isochron ", 0) == 0);
        CHECK(text.find("# config: command=unperturbed mu=0.5 ntheta=1024 degree=16") != std::string::npos);
    }
    auto K = load(out / "K.txt");
    CHECK(K.omega == s.at("omega"));
    std::stringstream a, b;
    write_parameterization(a, K);
    write_parameterization(b, load(out / "K.txt"));
    CHECK(a.str() == b.str());
    const auto text = slurp(out / "K.txt");
    CHECK(text.find(a.str()) != std::string::npos);
}

TEST_CASE("cli perturbed reproduces the tables")
{
    const auto out = work / "pc";
    REQUIRE(run("perturbed --mu 1.5 --delay constant --epsilon 1e-3 --ntheta 512 --degree 1 --out " + out.string()) ==
            0);
    CHECK(std::abs(summary(out).at("lambda") + 1.6839401491442914) <= 1e-8);
    const auto oe = work / "pe";
    REQUIRE(run("perturbed --mu 1.5 --delay exp --epsilon 1e-2 --ntheta 512 --degree 1 --out " + oe.string()) == 0);
    CHECK(std::abs(summary(oe).at("omega") - 0.140077545298062) <= 1e-9);
}

TEST_CASE("cli perturbed at eps = 0 returns the identity")
{
    const auto out = work / "p0";
    REQUIRE(run("perturbed --mu 1.5 --epsilon 0 --ntheta 256 --degree 3 --k-degree 8 --out " + out.string()) == 0);
    auto K = load(out / "K.txt");
    auto W = load(out / "W.txt");
    CHECK(W.omega == K.omega);
    CHECK(W.lambda == K.lambda);
    auto id = TorusMapFT::identity(256, 3);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t j = 0; j <= 3; ++j)
            CHECK((W.map.part(c)[j] - id.part(c)[j]).sup_norm() <= 1e-10);
}

TEST_CASE("cli residual-check accepts a stored run and rejects a corrupted one")
{
    const auto out = work / "rc";
    REQUIRE(run("perturbed --mu 1.5 --delay exp --epsilon 1e-3 --ntheta 256 --degree 4 --k-degree 8 --out " +
                out.string()) == 0);
    const auto K = (out / "K.txt").string(), W = (out / "W.txt").string();
    CHECK(run("residual-check --K " + K + " --W " + W) == 0);
    CHECK(slurp(work / "stdout.txt").find("PASS: all orders") != std::string::npos);

    auto P = load(W);
    auto c = std::vector<double>(P.map.part(1)[2].coeffs().begin(), P.map.part(1)[2].coeffs().end());
    c[3] += 1e-3;
    P.map.part(1)[2] = PeriodicFunction::from_coeffs(c);
    const auto bad = (work / "W_bad.txt").string();
    {
        std::ofstream os(bad);
        std::ifstream is(W);
        std::string line;
        while (std::getline(is, line) && line.rfind("#", 0) == 0) os << line << '\n';
        write_parameterization(os, P);
    }
    CHECK(run("residual-check --K " + K + " --W " + bad) == 3);
    CHECK(slurp(work / "stdout.txt").find("FAIL") != std::string::npos);

    CHECK(run("residual-check") == 2);
    CHECK(run("residual-check --K " + K + " --W " + (work / "missing.txt").string()) == 4);
}

TEST_CASE("cli spectrum of a pure mode")
{
    auto c = PeriodicFunction::sample(16, [](double t) { return std::cos(2 * std::numbers::pi * t); });
    Parameterization P{TorusMapFT({0, 0}, {FourierTaylor({c, c}), FourierTaylor({c * 0.0, c})}), 0.3, -0.5, 1};
    const auto in = work / "pure.txt";
    {
        std::ofstream os(in);
        write_parameterization(os, P);
    }
    const auto out = work / "sp";
    REQUIRE(run("spectrum --input " + in.string() + " --out " + out.string()) == 0);
    std::ifstream is(out / "spectrum.txt");
    auto rows = read_table(is);
    REQUIRE(rows.size() == 9);
    CHECK(rows[1][1] == Catch::Approx(std::log10(0.25)));
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (k != 1) CHECK(rows[k][1] < -25);
    CHECK(run("spectrum") == 2);
}

TEST_CASE("cli usage errors and determinism")
{
    CHECK(run("") == 2);
    CHECK(run("perturbed --delay linear") == 2);
    CHECK(run("unperturbed --ntheta 1") == 2);
    CHECK(run("unperturbed --threads 0") == 2);
    const auto a = work / "d1", b = work / "d2";
    const std::string args = "perturbed --mu 1.5 --delay exp --epsilon 1e-3 --ntheta 128 --degree 3 --k-degree 6 --threads 1";
    REQUIRE(run(args + " --out " + a.string()) == 0);
    REQUIRE(run(args + " --out " + b.string()) == 0);
    for (const char* f : {"K.txt", "W.txt", "summary.txt", "residuals.txt", "deviation.txt", "scaling.txt"})
        CHECK(slurp(a / f) == slurp(b / f));
}
