#ifndef GMIRATE_CSV_HPP
#define GMIRATE_CSV_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gmirate {

// Minimal RFC-4180-style CSV assembly: header row mandatory, '.' decimal
// separator, fixed column order, bit-identical output for identical inputs.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::string str() const;
    void write_file(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Shortest round-trip decimal form; infinities print as "inf"/"-inf".
std::string format_double(double v);
std::string format_u64(std::uint64_t v);
std::string format_int(int v);
std::string format_bool(bool v);

}  // namespace gmirate

#endif
