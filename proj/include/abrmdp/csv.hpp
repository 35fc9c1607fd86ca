#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace abrmdp {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

/// Comma-joined row terminated by '\n'.
std::string csv_row(const std::vector<std::string>& fields);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

} // namespace abrmdp
