#include "affgebroid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "affgebroid/errors.hpp"

namespace affgebroid {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw InputError("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
    if (values.size() != header_.size()) throw InputError("CSV row length does not match the header");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) body_ += ',';
        body_ += format_double(values[k]);
    }
    body_ += '\n';
    ++rows_;
}

std::string CsvTable::str() const {
    std::string s;
    for (std::size_t k = 0; k < header_.size(); ++k) {
        if (k) s += ',';
        s += header_[k];
    }
    s += '\n';
    return s + body_;
}

}  // namespace affgebroid
