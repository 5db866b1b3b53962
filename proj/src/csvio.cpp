#include "projlstd/csvio.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "projlstd/errors.hpp"

namespace projlstd {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_int(std::int64_t value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_uint(std::uint64_t value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string escape_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), n_columns_(columns.size()) {
  if (!out_) {
    throw Error("cannot open output file " + path.string());
  }
  out_ << "# schema_version=" << kCsvSchemaVersion << "\n";
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_) {
    throw Error("csv row width does not match the header");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape_cell(cells[i]);
  }
  out_ << '\n';
}

void write_meta_sidecar(const std::filesystem::path& csv_path,
                        const std::string& resolved_config_json,
                        const std::string& config_hash) {
  nlohmann::ordered_json meta;
  meta["schema_version"] = kCsvSchemaVersion;
  meta["tool_version"] = kToolVersion;
  meta["config_hash"] = config_hash;
  meta["resolved_config"] = nlohmann::ordered_json::parse(resolved_config_json);
  std::filesystem::path side = csv_path;
  side.replace_extension(".meta.json");
  std::ofstream out(side, std::ios::binary);
  if (!out) {
    throw Error("cannot open sidecar file " + side.string());
  }
  out << meta.dump(2) << "\n";
}

}  // namespace projlstd
