#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cml {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace cml
