#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace odebound::csv {

struct Series {
    std::string name;
    std::vector<double> grid;
    std::vector<double> values;
};

struct EmitResult {
    std::size_t rows = 0;
    bool resampled = false;  // grids disagreed; everything was interpolated
                             // onto the coarsest one
};

/// UTF-8 CSV, LF line endings, 17 significant digits, first column t.
/// Misaligned grids are linearly resampled onto the coarsest grid present.
/// An empty curve list produces a header-only file.  Throws ConfigError
/// when the path cannot be written.
EmitResult emit_series(const std::vector<Series>& curves, const std::string& path);

/// gnuplot commands plotting every column of the CSV against t; the CSV is
/// referenced by the relative path given.
void write_plot_script(const std::string& script_path, const std::string& csv_relpath,
                       const std::vector<std::string>& column_names,
                       const std::string& title);

}  // namespace odebound::csv
