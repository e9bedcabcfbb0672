#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citepred/features.hpp"

namespace citepred {

/// Canonical header of the record CSV.
inline constexpr std::string_view kRecordHeader =
    "pmid,year,citations,sjr,mesh_count,a_score,c_score,h_score,title_len,n_references,"
    "ref_mean_age,page_length,languages,clinical,research,access,pub_types";

/// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses records; throws ValidationError with the line number on malformed rows
/// and on any record that fails validate_record.
std::vector<PaperRecord> read_records(std::istream& in);
std::vector<PaperRecord> read_records(const std::filesystem::path& path);

void write_records(std::ostream& out, std::span<const PaperRecord> records);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace citepred
