#pragma once
#include <string>
#include <vector>

namespace hnnflow {

// 17 significant digits: doubles survive a write/parse round trip bit-exactly
std::string format_value(double v);

// header always written, rows in order, '\n' line endings
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

// whole-file read, for byte comparisons; throws on missing file
std::string read_file(const std::string& path);

} // namespace hnnflow
