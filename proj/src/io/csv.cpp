#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cevoi/error.hpp"
#include "cevoi/io.hpp"

namespace cevoi::io {

namespace {

struct Record {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> cells;
};

std::vector<Record> split_records(std::string_view text, std::string_view source) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<Record> records;
  Record current;
  std::string cell;
  bool in_quotes = false;
  bool quoted_cell = false;
  std::size_t line = 1;
  current.line = 1;

  auto finish_record = [&] {
    current.cells.push_back(std::move(cell));
    cell.clear();
    const bool blank = current.cells.size() == 1 && current.cells[0].empty() && !quoted_cell;
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    quoted_cell = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        cell += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        quoted_cell = true;
        break;
      case ',':
        current.cells.push_back(std::move(cell));
        cell.clear();
        break;
      case '\r':
        break;
      case '\n':
        finish_record();
        ++line;
        current.line = line;
        break;
      default:
        cell += ch;
    }
  }
  if (in_quotes) {
    throw ValidationError(fmt::format("{}: row {}: unterminated quoted field", source, current.line));
  }
  if (!cell.empty() || !current.cells.empty() || quoted_cell) finish_record();
  return records;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

enum class CellStatus { ok, missing, non_numeric, non_finite };

CellStatus parse_number(std::string_view raw, double& out) {
  std::string_view s = trim(raw);
  if (s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan") return CellStatus::missing;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) return CellStatus::non_numeric;
  if (!std::isfinite(out)) return CellStatus::non_finite;
  return CellStatus::ok;
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string_view source) {
  const std::vector<Record> records = split_records(text, source);
  CsvTable table;
  if (records.empty()) return table;

  std::size_t first = 0;
  {
    double dummy = 0.0;
    for (const auto& cell : records[0].cells) {
      if (parse_number(cell, dummy) == CellStatus::non_numeric) {
        for (const auto& h : records[0].cells) table.header.emplace_back(trim(h));
        first = 1;
        break;
      }
    }
  }

  const std::size_t n_cols = records[0].cells.size();
  table.values = Matrix(records.size() - first, n_cols);
  for (std::size_t r = first; r < records.size(); ++r) {
    const Record& rec = records[r];
    if (rec.cells.size() != n_cols) {
      throw ValidationError(fmt::format("{}: row {} has {} columns, expected {}", source, rec.line,
                                        rec.cells.size(), n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v = 0.0;
      switch (parse_number(rec.cells[c], v)) {
        case CellStatus::ok:
          break;
        case CellStatus::missing:
          throw ValidationError(
              fmt::format("{}: row {}, column {}: missing value", source, rec.line, c + 1));
        case CellStatus::non_numeric:
          throw ValidationError(fmt::format("{}: row {}, column {}: non-numeric cell '{}'", source,
                                            rec.line, c + 1, trim(rec.cells[c])));
        case CellStatus::non_finite:
          throw ValidationError(
              fmt::format("{}: row {}, column {}: non-finite value", source, rec.line, c + 1));
      }
      table.values(r - first, c) = v;
    }
  }
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
  return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path), path.string());
}

std::string write_csv(const Matrix& values, const std::vector<std::string>& header) {
  std::string out;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c > 0) out += ',';
      const std::string& h = header[c];
      if (h.find_first_of(",\"\n\r") != std::string::npos) {
        out += '"';
        for (char ch : h) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      } else {
        out += h;
      }
    }
    out += '\n';
  }
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) {
      if (c > 0) out += ',';
      out += fmt::format("{}", values(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace cevoi::io
