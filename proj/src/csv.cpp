#include "citepred/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

namespace citepred {

namespace {

template <typename T>
T parse_number(std::string_view field, const char* column, std::size_t line_no) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw ValidationError("line " + std::to_string(line_no) + ": cannot parse " + column + " from '" +
                          std::string(field) + "'");
  }
  return value;
}

bool parse_flag(std::string_view field, const char* column, std::size_t line_no) {
  if (field == "0") return false;
  if (field == "1") return true;
  throw ValidationError("line " + std::to_string(line_no) + ": " + column + " must be 0 or 1");
}

std::vector<std::string> split_list(std::string_view field) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= field.size()) {
    const auto end = field.find(';', start);
    const auto piece = field.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!piece.empty()) out.emplace_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ';';
    out += items[i];
  }
  return out;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::vector<PaperRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("record CSV is empty (header row required)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kRecordHeader) throw ValidationError("record CSV header mismatch; expected: " + std::string(kRecordHeader));

  std::vector<PaperRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 17) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 17 fields, found " +
                            std::to_string(f.size()));
    }
    PaperRecord r;
    r.pmid = f[0];
    r.year = parse_number<int>(f[1], "year", line_no);
    r.citations = parse_number<std::int64_t>(f[2], "citations", line_no);
    if (!f[3].empty()) r.sjr = parse_number<double>(f[3], "sjr", line_no);
    r.mesh_count = parse_number<int>(f[4], "mesh_count", line_no);
    r.a_score = parse_number<double>(f[5], "a_score", line_no);
    r.c_score = parse_number<double>(f[6], "c_score", line_no);
    r.h_score = parse_number<double>(f[7], "h_score", line_no);
    r.title_len = parse_number<int>(f[8], "title_len", line_no);
    r.n_references = parse_number<int>(f[9], "n_references", line_no);
    r.ref_mean_age = parse_number<double>(f[10], "ref_mean_age", line_no);
    r.page_length = parse_number<double>(f[11], "page_length", line_no);
    r.languages = split_list(f[12]);
    r.clinical = parse_flag(f[13], "clinical", line_no);
    r.research = parse_flag(f[14], "research", line_no);
    r.access = parse_flag(f[15], "access", line_no);
    r.pub_types = split_list(f[16]);
    try {
      validate_record(r);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PaperRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file " + path.string());
  return read_records(in);
}

std::string format_double(double v) {
  char buf[64];
  // %.17g always round-trips; try shorter forms first for readability.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_records(std::ostream& out, std::span<const PaperRecord> records) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << quote_if_needed(r.pmid) << ',' << r.year << ',' << r.citations << ','
        << (r.sjr ? format_double(*r.sjr) : std::string()) << ',' << r.mesh_count << ',' << format_double(r.a_score)
        << ',' << format_double(r.c_score) << ',' << format_double(r.h_score) << ',' << r.title_len << ','
        << r.n_references << ',' << format_double(r.ref_mean_age) << ',' << format_double(r.page_length) << ','
        << quote_if_needed(join_list(r.languages)) << ',' << int(r.clinical) << ',' << int(r.research) << ','
        << int(r.access) << ',' << quote_if_needed(join_list(r.pub_types)) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace citepred
