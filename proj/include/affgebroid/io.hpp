#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace affgebroid {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Accumulates CSV rows in memory; numbers use format_double.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_; }
    void add_row(const std::vector<double>& values);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::string body_;
    std::size_t rows_ = 0;
};

}  // namespace affgebroid
