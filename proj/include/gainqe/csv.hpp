#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gainqe {

struct CsvTable {
    std::vector<std::string> comments;  // written as "# " lines before the header
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// "%.17g", so values read back bit for bit.
std::string format_number(double v);

std::string to_csv(const CsvTable& table);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Skips "#" lines and blank lines; the first remaining line is the header.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gainqe
