#include "suscept/report.hpp"

#include "suscept/errors.hpp"
#include "suscept/version.hpp"

#include <cstdio>

namespace suscept {

std::string format_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

void ArtifactHeader::set(const std::string& key, double value) {
    settings.emplace_back(key, format_num(value));
}

void ArtifactHeader::set(const std::string& key, const std::string& value) {
    settings.emplace_back(key, value);
}

CsvWriter::CsvWriter(const std::string& path, const ArtifactHeader& header,
                     const std::vector<std::string>& columns)
    : out_(path), n_columns_(columns.size()) {
    if (!out_) throw ConfigError("cannot open output file '" + path + "'");
    out_ << "# command: " << header.command << "\n";
    out_ << "# scenario: " << hash_hex(header.scenario_hash) << "\n";
    out_ << "# version: " << kVersion << "\n";
    for (const auto& [k, v] : header.settings)
        out_ << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != n_columns_)
        throw ConfigError("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i)
        out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
}

} // namespace suscept
