#include "gmirate/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gmirate/common.hpp"

namespace gmirate {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
    require(cells.size() == header_.size(), "CsvWriter: row width does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out.push_back(',');
            const std::string& c = cells[i];
            if (c.find_first_of(",\"\n") == std::string::npos) {
                out += c;
            } else {
                out.push_back('"');
                for (char ch : c) {
                    if (ch == '"') out.push_back('"');
                    out.push_back(ch);
                }
                out.push_back('"');
            }
        }
        out.push_back('\n');
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
}

void CsvWriter::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw numeric_error("CsvWriter: cannot open output file " + path);
    f << str();
    if (!f) throw numeric_error("CsvWriter: failed writing " + path);
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_u64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_int(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%d", v);
    return buf;
}

std::string format_bool(bool v) { return v ? "1" : "0"; }

}  // namespace gmirate
