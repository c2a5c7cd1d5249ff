#include "odebound/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "odebound/errors.hpp"

namespace odebound::csv {

namespace {

double interp(const std::vector<double>& grid, const std::vector<double>& values,
              double t) {
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double w = (t - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

void put_number(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

}  // namespace

EmitResult emit_series(const std::vector<Series>& curves, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) throw ConfigError(path, "cannot open for writing");

    EmitResult result;
    std::string line = "t";
    for (const auto& c : curves) line += "," + c.name;
    line += '\n';
    out << line;
    if (curves.empty()) return result;

    // master grid: the coarsest one; everything else is interpolated
    std::size_t master = 0;
    for (std::size_t i = 1; i < curves.size(); ++i)
        if (curves[i].grid.size() < curves[master].grid.size()) master = i;
    const std::vector<double>& grid = curves[master].grid;

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& g = curves[i].grid;
        if (g.size() != grid.size()) {
            result.resampled = true;
            continue;
        }
        for (std::size_t k = 0; k < g.size(); ++k)
            if (std::abs(g[k] - grid[k]) > 1e-9 * std::max(1.0, std::abs(grid[k]))) {
                result.resampled = true;
                break;
            }
    }

    for (std::size_t k = 0; k < grid.size(); ++k) {
        line.clear();
        put_number(line, grid[k]);
        for (const auto& c : curves) {
            line += ',';
            if (!result.resampled || &c == &curves[master])
                put_number(line, c.values[k]);
            else
                put_number(line, interp(c.grid, c.values, grid[k]));
        }
        line += '\n';
        out << line;
    }
    result.rows = grid.size();
    if (!out) throw ConfigError(path, "write failed");
    return result;
}

void write_plot_script(const std::string& script_path, const std::string& csv_relpath,
                       const std::vector<std::string>& column_names,
                       const std::string& title) {
    std::ofstream out(script_path, std::ios::binary);
    if (!out) throw ConfigError(script_path, "cannot open for writing");
    out << "set datafile separator ','\n";
    out << "set xlabel 't'\n";
    out << "set title '" << title << "'\n";
    out << "set key outside\n";
    out << "plot ";
    for (std::size_t i = 0; i < column_names.size(); ++i) {
        if (i > 0) out << ", \\\n     ";
        out << "'" << csv_relpath << "' using 1:" << (i + 2) << " with lines title '"
            << column_names[i] << "'";
    }
    out << '\n';
    if (!out) throw ConfigError(script_path, "write failed");
}

}  // namespace odebound::csv
