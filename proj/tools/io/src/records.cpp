#include "valori/io/records.hpp"

#include <algorithm>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "valori/error.hpp"
#include "valori/io/base64.hpp"

namespace valori::io {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(Errc::kParseError, "line " + std::to_string(line) + ": " + what, line);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Calls fn(line_number, line) for every non-blank, non-comment line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    fn(line_no, line);
  }
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range && p == s.data() + s.size()) {
    // Finite literals beyond double range still saturate in from_float;
    // literals below it round to zero or a subnormal.
    const double v2 = std::strtod(std::string(s).c_str(), nullptr);
    if (std::isinf(v2)) return std::copysign(DBL_MAX, v2);
    return v2;
  }
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    parse_error(line, "'" + std::string(s) + "' is not a number");
  }
  return v;
}

}  // namespace

InputFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return InputFormat::kCsv;
  if (ext == ".jsonl" || ext == ".ndjson") return InputFormat::kJsonl;
  if (ext == ".npy") return InputFormat::kNpy;
  throw Error(Errc::kInvalidArgument,
              "cannot infer input format from '" + ext + "'; use --format");
}

std::vector<double> parse_float_list(std::string_view text, std::size_t line) {
  std::vector<double> out;
  for (std::string_view field : split(trim(text), ',')) out.push_back(parse_double(field, line));
  return out;
}

std::vector<InputRecord> parse_csv(std::string_view text) {
  std::vector<InputRecord> out;
  bool first = true;
  bool has_metadata = false;
  for_each_line(text, [&](std::size_t line, std::string_view row) {
    const auto fields = split(row, ',');
    std::uint64_t id = 0;
    if (first) {
      first = false;
      if (!parse_u64(fields[0], id)) {
        has_metadata = fields.size() > 1 && fields.back() == "metadata";
        return;
      }
    }
    if (!parse_u64(fields[0], id)) parse_error(line, "id '" + std::string(fields[0]) + "'");
    InputRecord rec;
    rec.id = id;
    rec.line = line;
    const std::size_t coord_end = fields.size() - (has_metadata ? 1 : 0);
    if (coord_end < 2) parse_error(line, "row has no coordinates");
    for (std::size_t i = 1; i < coord_end; ++i) rec.coords.push_back(parse_double(fields[i], line));
    if (has_metadata) {
      try {
        rec.metadata = base64_decode(fields.back());
      } catch (const Error& e) {
        parse_error(line, e.what());
      }
    }
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<InputRecord> parse_jsonl(std::string_view text) {
  std::vector<InputRecord> out;
  for_each_line(text, [&](std::size_t line, std::string_view row) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(row);
    } catch (const nlohmann::json::exception& e) {
      parse_error(line, e.what());
    }
    if (!j.is_object()) parse_error(line, "expected a JSON object");
    InputRecord rec;
    rec.line = line;
    if (!j.contains("id") || !j["id"].is_number_unsigned()) {
      parse_error(line, "missing or non-integer \"id\"");
    }
    rec.id = j["id"].get<std::uint64_t>();
    if (!j.contains("vector") || !j["vector"].is_array() || j["vector"].empty()) {
      parse_error(line, "missing \"vector\" array");
    }
    for (const auto& x : j["vector"]) {
      if (!x.is_number()) parse_error(line, "non-numeric vector element");
      rec.coords.push_back(x.get<double>());
    }
    if (j.contains("metadata") && !j["metadata"].is_null()) {
      if (!j["metadata"].is_string()) parse_error(line, "\"metadata\" must be a base64 string");
      try {
        rec.metadata = base64_decode(j["metadata"].get<std::string>());
      } catch (const Error& e) {
        parse_error(line, e.what());
      }
    }
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<InputRecord> from_npy(const NpyArray& array) {
  std::vector<InputRecord> out(array.rows);
  for (std::size_t r = 0; r < array.rows; ++r) {
    out[r].id = r;
    out[r].coords.resize(array.cols);
    for (std::size_t c = 0; c < array.cols; ++c) out[r].coords[c] = array.value(r, c);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<InputRecord> load_records(const std::filesystem::path& path, InputFormat format) {
  switch (format) {
    case InputFormat::kNpy: return from_npy(load_npy(path));
    case InputFormat::kCsv: return parse_csv(read_text_file(path));
    case InputFormat::kJsonl: return parse_jsonl(read_text_file(path));
  }
  return {};
}

FixedVector quantize(std::span<const double> coords) {
  std::vector<Fixed32> out;
  out.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    try {
      out.push_back(from_float(coords[i]));
    } catch (const Error&) {
      throw Error(Errc::kNonFiniteInput, "coordinate " + std::to_string(i) + " is not finite",
                  i);
    }
  }
  return FixedVector(std::move(out));
}

std::vector<InsertCmd> to_insert_commands(std::vector<InputRecord> records, std::uint32_t dim) {
  std::stable_sort(records.begin(), records.end(),
                   [](const InputRecord& a, const InputRecord& b) { return a.id < b.id; });
  std::vector<InsertCmd> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const InputRecord& r = records[i];
    const std::string where =
        "id " + std::to_string(r.id) + (r.line ? " (line " + std::to_string(r.line) + ")" : "");
    if (i > 0 && records[i - 1].id == r.id) {
      throw Error(Errc::kDuplicateId, where + " appears more than once in the input");
    }
    if (r.coords.size() != dim) {
      throw Error(Errc::kDimensionMismatch, where + " has " + std::to_string(r.coords.size()) +
                                                " coordinates, expected " + std::to_string(dim));
    }
    InsertCmd cmd;
    cmd.id = r.id;
    try {
      cmd.coords = quantize(r.coords);
    } catch (const Error& e) {
      throw Error(Errc::kNonFiniteInput,
                  where + ", dim-index " + std::to_string(*e.position()) + ": value is not finite",
                  r.id);
    }
    cmd.metadata = r.metadata;
    out.push_back(std::move(cmd));
  }
  return out;
}

}  // namespace valori::io
