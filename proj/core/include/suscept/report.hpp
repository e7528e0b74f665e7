#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace suscept {

// Shortest exact decimal round trip (%.17g); every numeric cell in every
// artifact goes through this so identical runs are byte-identical.
std::string format_num(double v);

// Header block stamped onto every artifact: which command produced it, the
// scenario digest, and each tolerance or grid value actually in effect
// (the no-silent-defaults rule).
struct ArtifactHeader {
    std::string command;
    std::uint64_t scenario_hash = 0;
    std::vector<std::pair<std::string, std::string>> settings;

    void set(const std::string& key, double value);
    void set(const std::string& key, const std::string& value);
};

std::string hash_hex(std::uint64_t h);

// CSV artifact: '#' comment header (command, scenario, version, settings),
// one column-name row, then data rows.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const ArtifactHeader& header,
              const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t n_columns_;
};

} // namespace suscept
