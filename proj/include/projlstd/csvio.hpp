#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace projlstd {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Locale-independent shortest round-trip formatting (std::to_chars), so CSV
/// bytes are reproducible across runs and worker counts.
std::string format_double(double value);
std::string format_int(std::int64_t value);
std::string format_uint(std::uint64_t value);

/// CSV with a single "# schema_version=N" comment line, then the header.
/// Columns are documented in docs/csv_schema.md.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t n_columns_;
};

/// JSON sidecar with the resolved config, schema version and tool version.
void write_meta_sidecar(const std::filesystem::path& csv_path,
                        const std::string& resolved_config_json,
                        const std::string& config_hash);

}  // namespace projlstd
