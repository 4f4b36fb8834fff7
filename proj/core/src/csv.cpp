#include "fracsde/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace fracsde {

namespace {

// 17 significant digits: the shortest count that round-trips every double.
void append17(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
}

} // namespace

void write_csv(const std::string& filename, const SampledPath& path) {
    std::string body = "t,value\n";
    body.reserve(40 * path.size() + 8);
    for (std::size_t i = 0; i < path.size(); ++i) {
        append17(body, path.grid().node(i));
        body += ',';
        append17(body, path[i]);
        body += '\n';
    }
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + filename);
    out << body;
    if (!out) throw IoError("write failed: " + filename);
}

SampledPath read_csv(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + filename);

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + filename);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,value")
        throw IoError(filename + ": expected header 't,value', got '" + line + "'");

    std::vector<double> times, values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        const double t = std::strtod(p, &end);
        if (end == p || *end != ',')
            throw IoError(filename + ":" + std::to_string(lineno) + ": malformed row");
        p = end + 1;
        const double v = std::strtod(p, &end);
        if (end == p)
            throw IoError(filename + ":" + std::to_string(lineno) + ": malformed row");
        times.push_back(t);
        values.push_back(v);
    }
    if (times.size() < 2)
        throw IoError(filename + ": need at least two rows (grid nodes)");
    if (times.front() != 0.0)
        throw IoError(filename + ": grid must start at t = 0");

    const std::size_t n = times.size() - 1;
    TimeGrid grid(times.back(), n);
    for (std::size_t i = 0; i <= n; ++i) {
        if (std::abs(times[i] - grid.node(i)) > 1e-9 * std::max(grid.dt(), std::abs(times[i])))
            throw IoError(filename + ": time column is not a uniform grid (row " +
                          std::to_string(i + 2) + ")");
    }
    return SampledPath(grid, std::move(values));
}

} // namespace fracsde
