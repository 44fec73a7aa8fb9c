#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fact5w::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over the target. Either the
/// old content or the complete new content is visible, never a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

/// Streaming FNV-1a checksum of file bytes, as a 16-digit lowercase hex string.
std::string file_checksum(const std::filesystem::path& path);

std::string checksum_hex(std::uint64_t value);

// --- TSV cell escaping -----------------------------------------------------
//
// Scalar text cells escape backslash, tab, newline and carriage return as
// \\ \t \n \r so arbitrary news text survives one-row-per-line TSV. List
// cells are JSON arrays and need no extra escaping.

std::string escape_cell(std::string_view raw);
std::string unescape_cell(std::string_view cell);

std::vector<std::string> split_tsv_line(std::string_view line);

/// Splits on '\n', dropping one trailing '\r' per line (tolerates CRLF input).
std::vector<std::string> split_lines(std::string_view text);

// --- Number formatting ------------------------------------------------------

/// Shortest round-trip decimal form ("%.17g" trimmed); byte-stable.
std::string format_double(double value);

/// Fixed-point with the given number of decimals ("%.*f").
std::string format_fixed(double value, int decimals);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

} // namespace fact5w::io
