#include "diffsplines/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace diffsplines {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    return out;
}

}  // namespace

void write_path_csv(const std::filesystem::path& file, const PathField& path,
                    std::size_t t_stride, std::size_t x_stride) {
    if (t_stride == 0 || x_stride == 0) throw DomainError("strides must be positive");
    std::ofstream out = open_out(file);
    out << "t,x,value\n";
    const std::size_t m = path.times.samples();
    const std::size_t n = path.grid.size();
    for (std::size_t k = 0; k < m; k += t_stride) {
        for (std::size_t i = 0; i < n; i += x_stride)
            out << format_double(path.times.time(k)) << ',' << format_double(path.grid.node(i))
                << ',' << format_double(path.at(k, i)) << '\n';
    }
}

PathField read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot read " + file.string());
    std::string line;
    std::getline(in, line);
    std::map<double, std::map<double, double>> table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw DomainError(file.string() + ":" + std::to_string(lineno) + ": expected t,x,value");
        table[std::stod(a)][std::stod(b)] = std::stod(c);
    }
    if (table.size() < 2) throw DomainError(file.string() + ": need at least two time samples");
    const std::size_t n = table.begin()->second.size();
    const double t_final = table.rbegin()->first;
    const TimeGrid times(table.size() - 1, t_final);
    const SpatialGrid grid(n);
    PathField out(times, grid);
    std::size_t k = 0;
    for (const auto& [t, row] : table) {
        if (row.size() != n) throw DomainError(file.string() + ": ragged time slice");
        if (std::abs(t - times.time(k)) > 1e-9 * std::max(1.0, t_final))
            throw DomainError(file.string() + ": time samples are not uniform");
        std::size_t i = 0;
        for (const auto& [x, v] : row) {
            if (std::abs(x - grid.node(i)) > 1e-9)
                throw DomainError(file.string() + ": x samples are not a uniform grid on [0,1]");
            out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = v;
            ++i;
        }
        ++k;
    }
    return out;
}

void write_series_csv(const std::filesystem::path& file, const TimeSeries& series,
                      std::size_t stride) {
    if (stride == 0) throw DomainError("stride must be positive");
    std::ofstream out = open_out(file);
    out << "t,value\n";
    for (std::size_t k = 0; k < series.times.samples(); k += stride)
        out << format_double(series.times.time(k)) << ','
            << format_double(series.values[static_cast<Eigen::Index>(k)]) << '\n';
}

void write_table_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_out(file);
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
        out << '\n';
    }
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw DomainError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace diffsplines
