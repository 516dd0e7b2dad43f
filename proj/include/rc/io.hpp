#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rc/core.hpp"

namespace rc {

enum class PointFormat { csv, binary };

struct CsvOptions {
  bool header = false;
  char delimiter = ',';
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

template <class T>
bool parse_number(std::string_view cell, T& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && !cell.empty();
}

inline std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, std::ios::in | mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path,
                              std::ios::openmode mode = {}) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline std::string format_float(float v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

}  // namespace detail

/// Parses a numeric CSV; optional header row is skipped.
inline PointSet load_points_csv(const std::filesystem::path& path, CsvOptions opts = {}) {
  auto in = detail::open_in(path);
  std::vector<float> data;
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  bool header_pending = opts.header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = detail::split(view, opts.delimiter);
    if (dim == 0) {
      dim = cells.size();
    } else if (cells.size() != dim) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": ragged row (" +
                    std::to_string(cells.size()) + " columns, expected " +
                    std::to_string(dim) + ")");
    }
    for (auto cell : cells) {
      float v = 0.0f;
      if (!detail::parse_number(cell, v)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": non-numeric cell '" + std::string(cell) + "'");
      }
      if (!std::isfinite(v)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-finite value");
      }
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IoError(path.string() + ": no data rows");
  return PointSet(rows, dim, std::move(data));
}

/// Reads the "RCPT" binary format: magic, u32 n, u32 dim, n*dim float32 LE.
inline PointSet load_points_binary(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::binary);
  std::array<char, 4> magic{};
  std::array<unsigned char, 8> header{};
  if (!in.read(magic.data(), 4) || std::string_view(magic.data(), 4) != "RCPT") {
    throw IoError(path.string() + ": missing RCPT magic");
  }
  if (!in.read(reinterpret_cast<char*>(header.data()), 8)) {
    throw IoError(path.string() + ": truncated header");
  }
  auto read_u32 = [&](std::size_t off) {
    return static_cast<std::uint32_t>(header[off]) |
           (static_cast<std::uint32_t>(header[off + 1]) << 8) |
           (static_cast<std::uint32_t>(header[off + 2]) << 16) |
           (static_cast<std::uint32_t>(header[off + 3]) << 24);
  };
  const std::size_t n = read_u32(0);
  const std::size_t dim = read_u32(4);
  if (n == 0 || dim == 0) throw IoError(path.string() + ": empty point set");
  std::vector<float> data(n * dim);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(float)))) {
    throw IoError(path.string() + ": truncated payload");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : data) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      bits = (bits >> 24) | ((bits >> 8) & 0xFF00u) | ((bits << 8) & 0xFF0000u) | (bits << 24);
      v = std::bit_cast<float>(bits);
    }
  }
  for (float v : data) {
    if (!std::isfinite(v)) throw IoError(path.string() + ": non-finite value");
  }
  return PointSet(n, dim, std::move(data));
}

inline PointSet load_points(const std::filesystem::path& path, PointFormat format,
                            CsvOptions opts = {}) {
  return format == PointFormat::csv ? load_points_csv(path, opts) : load_points_binary(path);
}

/// Picks binary for ".bin"/".rcpt" extensions, CSV otherwise.
inline PointFormat guess_point_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".rcpt") ? PointFormat::binary : PointFormat::csv;
}

inline void write_points_csv(const std::filesystem::path& path, const PointSet& points,
                             const std::vector<std::string>& header = {}) {
  auto out = detail::open_out(path);
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.dim(); ++j) {
      if (j) out << ',';
      out << detail::format_float(points.at(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_points_binary(const std::filesystem::path& path, const PointSet& points) {
  auto out = detail::open_out(path, std::ios::binary);
  out.write("RCPT", 4);
  auto put_u32 = [&](std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                static_cast<char>((v >> 16) & 0xFF),
                                static_cast<char>((v >> 24) & 0xFF)};
    out.write(b.data(), 4);
  };
  put_u32(static_cast<std::uint32_t>(points.size()));
  put_u32(static_cast<std::uint32_t>(points.dim()));
  for (float v : points.data()) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    put_u32(bits);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_points(const std::filesystem::path& path, const PointSet& points,
                         PointFormat format) {
  if (format == PointFormat::csv) {
    write_points_csv(path, points);
  } else {
    write_points_binary(path, points);
  }
}

// ---------------------------------------------------------------------------
// Transactions (newline-delimited JSON)

inline nlohmann::ordered_json to_json(const TransactionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["timestamp"] = r.timestamp;
  j["amount"] = r.amount;
  j["risk_seed"] = std::string(to_string(r.risk_seed));
  j["features"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : r.features) j["features"][name] = value;
  if (r.session) {
    auto events = nlohmann::ordered_json::array();
    for (const auto& e : r.session->events) {
      events.push_back({{"page_type", e.page_type}, {"dwell_ms", e.dwell_ms}});
    }
    j["session"] = {{"events", std::move(events)}};
  }
  return j;
}

inline TransactionRecord transaction_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ContractError("record is not a JSON object");
  TransactionRecord r;
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw ContractError(std::string("missing field '") + key + "'");
    return j.at(key);
  };
  const auto& id = require("id");
  if (!id.is_string()) throw ContractError("field 'id' must be a string");
  r.id = id.get<std::string>();
  const auto& ts = require("timestamp");
  if (!ts.is_number_integer()) throw ContractError("field 'timestamp' must be an integer");
  r.timestamp = ts.get<std::int64_t>();
  const auto& amount = require("amount");
  if (!amount.is_number()) throw ContractError("field 'amount' must be a number");
  r.amount = amount.get<double>();
  if (j.contains("risk_seed") && !j.at("risk_seed").is_null()) {
    const auto& s = j.at("risk_seed");
    if (!s.is_string()) throw ContractError("field 'risk_seed' must be a string");
    auto seed = parse_risk_seed(s.get<std::string>());
    if (!seed) throw ContractError("unknown risk_seed '" + s.get<std::string>() + "'");
    r.risk_seed = *seed;
  }
  if (j.contains("features")) {
    const auto& f = j.at("features");
    if (!f.is_object()) throw ContractError("field 'features' must be an object");
    for (const auto& [name, value] : f.items()) {
      if (!value.is_number()) {
        throw ContractError("feature '" + name + "' is missing or non-numeric");
      }
      r.features[name] = value.get<double>();
    }
  }
  if (j.contains("session") && !j.at("session").is_null()) {
    const auto& s = j.at("session");
    if (!s.is_object() || !s.contains("events") || !s.at("events").is_array()) {
      throw ContractError("field 'session' must be an object with an 'events' array");
    }
    ClickSession session;
    for (const auto& e : s.at("events")) {
      if (!e.is_object() || !e.contains("page_type") || !e.at("page_type").is_string() ||
          !e.contains("dwell_ms") || !e.at("dwell_ms").is_number_integer()) {
        throw ContractError("session event needs string page_type and integer dwell_ms");
      }
      session.events.push_back({e.at("page_type").get<std::string>(),
                                e.at("dwell_ms").get<std::int64_t>()});
    }
    r.session = std::move(session);
  }
  r.validate();
  return r;
}

inline std::vector<TransactionRecord> load_transactions(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::vector<TransactionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      records.push_back(transaction_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

inline void write_transactions(const std::filesystem::path& path,
                               const std::vector<TransactionRecord>& records) {
  auto out = detail::open_out(path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Label files

/// Reads integer labels, one per line. A non-numeric first line is treated as
/// a header. A ".json" file is read through its "labels" array.
inline std::vector<Label> load_labels(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::vector<Label> labels;
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    if (!j.contains("labels") || !j.at("labels").is_array()) {
      throw IoError(path.string() + ": no 'labels' array");
    }
    for (const auto& v : j.at("labels")) labels.push_back(v.get<Label>());
    return labels;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = detail::trim(line);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (comma != std::string_view::npos) view = detail::trim(view.substr(0, comma));
    Label v = 0;
    if (!detail::parse_number(view, v)) {
      if (line_no == 1) continue;
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    labels.push_back(v);
  }
  return labels;
}

inline void write_labels_csv(const std::filesystem::path& path, std::span<const Label> labels) {
  auto out = detail::open_out(path);
  out << "label\n";
  for (auto l : labels) out << l << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rc
