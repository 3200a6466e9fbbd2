#pragma once

#include "diffsplines/numerics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace diffsplines {

/// Shortest-roundtrip-safe rendering with 17 significant digits.
std::string format_double(double v);

/// Long format with header `t,x,value`; strides thin the output.
void write_path_csv(const std::filesystem::path& file, const PathField& path,
                    std::size_t t_stride = 1, std::size_t x_stride = 1);

/// Reads a `t,x,value` file written on uniform grids starting at t=0 and x=0.
PathField read_path_csv(const std::filesystem::path& file);

/// Header `t,value`.
void write_series_csv(const std::filesystem::path& file, const TimeSeries& series,
                      std::size_t stride = 1);

/// Generic table writer: header row then one row per record.
void write_table_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

std::vector<double> parse_double_list(const std::string& text);

}  // namespace diffsplines
