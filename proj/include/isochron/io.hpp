// Plain-text run output: `#` headers with a config echo, the solver log with
// its summary block, and the tables behind the isochron, residual, deviation,
// scaling and spectrum plots.

#ifndef ISOCHRON_IO_HPP
#define ISOCHRON_IO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "solver.hpp"

namespace isochron {

inline constexpr const char* tool_version = "1.0.0";
inline constexpr int format_version = 1;

/// Ordered key/value pairs echoed into every output header.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Shortest text that reads back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline void write_header(std::ostream& os, const std::string& content, const ConfigEcho& cfg)
{
    os << "# isochron " << tool_version << " format=" << format_version << '\n';
    os << "# content: " << content << '\n';
    os << "# config:";
    for (const auto& [k, v] : cfg) os << ' ' << k << '=' << v;
    os << '\n';
}

/// Parses the `# config:` line of a header back into key/value pairs.
inline std::map<std::string, std::string> read_config_echo(std::istream& is)
{
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("# config:", 0) != 0) continue;
        std::map<std::string, std::string> out;
        std::istringstream ls(line.substr(9));
        std::string kv;
        while (ls >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw parse_error("bad config entry '" + kv + "'");
            out[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        return out;
    }
    throw parse_error("no '# config:' line found");
}

/// Iteration log (one record per iteration and order) and the summary block.
inline void write_report(std::ostream& os, const SolveReport& rep)
{
    os << std::setprecision(17);
    os << "# order iteration residual correction\n";
    for (std::size_t j = 0; j < rep.residual_history.size(); ++j) {
        const auto& r = rep.residual_history[j];
        const auto& c = j < rep.correction_history.size() ? rep.correction_history[j] : std::vector<double>{};
        for (std::size_t i = 0; i < r.size(); ++i) {
            os << j << ' ' << i << ' ' << r[i] << ' ';
            if (i < c.size())
                os << c[i];
            else
                os << "nan";
            os << '\n';
        }
    }
    os << "[summary]\n";
    os << "omega = " << rep.omega << '\n';
    os << "lambda = " << rep.lambda << '\n';
    os << "b = " << rep.b << '\n';
    os << "iterations = " << rep.iterations << '\n';
    os << "converged = " << (rep.converged ? 1 : 0) << '\n';
    os << "min_det = " << rep.min_det << '\n';
    for (std::size_t j = 0; j < rep.order_residuals.size(); ++j)
        os << "residuals[" << j << "] = " << rep.order_residuals[j] << '\n';
    for (std::size_t j = 0; j < rep.contraction_ratio.size(); ++j)
        if (rep.contraction_ratio[j] != 0) os << "contraction[" << j << "] = " << rep.contraction_ratio[j] << '\n';
    os << "[end]\n";
}

/// Key/value pairs of the summary block.
inline std::map<std::string, double> read_summary(std::istream& is)
{
    std::string line;
    bool inside = false;
    std::map<std::string, double> out;
    while (std::getline(is, line)) {
        if (line == "[summary]") {
            inside = true;
            continue;
        }
        if (line == "[end]") return out;
        if (!inside || line.empty() || line[0] == '#') continue;
        auto eq = line.find(" = ");
        if (eq == std::string::npos) throw parse_error("bad summary line: " + line);
        out[line.substr(0, eq)] = detail::parse_double(line.substr(eq + 3));
    }
    if (!inside) throw parse_error("no [summary] block found");
    throw parse_error("unterminated [summary] block");
}

/// Whitespace-separated table with a `#` column line.
inline void write_table(std::ostream& os, const std::vector<std::string>& columns,
                        const std::vector<std::vector<double>>& rows)
{
    os << '#';
    for (const auto& c : columns) os << ' ' << c;
    os << '\n' << std::setprecision(17);
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << r[i];
        os << '\n';
    }
}

inline std::vector<std::vector<double>> read_table(std::istream& is)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> r;
        std::string tok;
        while (ls >> tok) r.push_back(detail::parse_double(tok));
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Curves theta = const of K (s from -s_max to s_max) and the cycle s = 0.
/// Rows: curve index (-1 for the cycle), theta, s, x, y.
inline std::vector<std::vector<double>> isochron_points(const Parameterization& K, std::size_t curves,
                                                        std::size_t points, double s_max)
{
    std::vector<std::vector<double>> rows;
    const std::size_t cyc = std::max<std::size_t>(K.map.n_theta(), 2 * points);
    for (std::size_t i = 0; i <= cyc; ++i) {
        const double th = static_cast<double>(i) / static_cast<double>(cyc);
        auto p = K(th, 0.0);
        rows.push_back({-1, th, 0, p[0], p[1]});
    }
    for (std::size_t c = 0; c < curves; ++c) {
        const double th = static_cast<double>(c) / static_cast<double>(curves);
        for (std::size_t i = 0; i < points; ++i) {
            const double s = -s_max + 2 * s_max * static_cast<double>(i) / static_cast<double>(points - 1);
            auto p = K(th, s);
            rows.push_back({static_cast<double>(c), th, s, p[0], p[1]});
        }
    }
    return rows;
}

/// Rows: k, log10 |S^_k|^2 for each function (-inf written as -400).
inline std::vector<std::vector<double>> spectrum_rows(const std::vector<PeriodicFunction>& fs)
{
    std::vector<std::vector<double>> rows;
    if (fs.empty()) return rows;
    std::vector<std::vector<double>> p;
    for (const auto& f : fs) p.push_back(power_spectrum(f));
    for (std::size_t k = 0; k < p[0].size(); ++k) {
        std::vector<double> r{static_cast<double>(k)};
        for (const auto& q : p) r.push_back(q[k] > 0 ? std::log10(q[k]) : -400.0);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Sum of |S^_k|^2 over even k >= 2.
inline double even_mode_power(const PeriodicFunction& f)
{
    auto p = power_spectrum(f);
    double s = 0;
    for (std::size_t k = 2; k < p.size(); k += 2) s += p[k];
    return s;
}

} // namespace isochron

#endif
