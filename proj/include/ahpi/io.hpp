// Copyright 2026 The AHPI Ranking Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// File formats: interaction TSV, `ahpi-model v1` model files, external
// ranking files, name-count and name-mapping files, and atomic writes.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ahpi/errors.hpp"
#include "ahpi/eval.hpp"
#include "ahpi/model.hpp"
#include "ahpi/name_cluster.hpp"

namespace ahpi {

// Exit status used by the command-line tool for each failure class.
enum class IoErrc : int {
  MissingFile = 3,
  MalformedHeader = 4,
  EmptyOutput = 5,
  InvalidRow = 6,
  ManifestMismatch = 9,
};

class IoError : public Error {
 public:
  IoError(IoErrc code, const std::string& what) : Error(what), code_(code) {}
  IoErrc code() const { return code_; }

 private:
  IoErrc code_;
};

inline constexpr std::string_view kInteractionHeader =
    "case_id\tdate\tplaintiff_firm\tdefendant_firm\tcase_type\toutcome";
inline constexpr std::string_view kModelHeader = "ahpi-model v1";

// Strict YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::string_view part, auto& out) {
    const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && p == part.data() + part.size();
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

inline std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// %.12g, the precision used by every text artifact.
inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct RowDiagnostic {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  Dataset data;
  std::vector<RowDiagnostic> skipped;
};

struct IngestOptions {
  const ClusterAssignment* mapping = nullptr;  // canonicalizes firm names when set
  bool strict = false;                         // abort on the first bad row
};

namespace detail {

inline std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& ids,
                            std::vector<std::string>& labels, const std::string& name) {
  auto [it, fresh] = ids.emplace(name, static_cast<std::uint32_t>(labels.size()));
  if (fresh) labels.push_back(name);
  return it->second;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrc::MissingFile, "cannot open " + path.string());
  return in;
}

}  // namespace detail

// Reads an interaction TSV. A field may list several firms separated by ';';
// such rows expand into every plaintiff x defendant pair, all sharing the
// row's case id and date. Entities and types are numbered by first
// appearance.
inline IngestResult ingest(std::istream& in, const IngestOptions& opt = {}) {
  IngestResult out;
  std::string line;
  if (!std::getline(in, line)) throw IoError(IoErrc::MalformedHeader, "empty interaction file");
  detail::strip_cr(line);
  if (line != kInteractionHeader)
    throw IoError(IoErrc::MalformedHeader, "unexpected interaction header: " + line);

  std::unordered_map<std::string, std::uint32_t> ent, typ;
  std::size_t lineno = 1;
  auto reject = [&](const std::string& msg) {
    if (opt.strict)
      throw IoError(IoErrc::InvalidRow, "line " + std::to_string(lineno) + ": " + msg);
    out.skipped.push_back({lineno, msg});
  };
  auto firms_of = [&](std::string_view field) {
    std::vector<std::string> firms;
    for (auto part : detail::split_view(field, ';')) {
      std::string name(detail::trim(part));
      if (name.empty()) continue;
      if (opt.mapping) name = opt.mapping->canonicalize(name);
      if (std::find(firms.begin(), firms.end(), name) == firms.end()) firms.push_back(name);
    }
    return firms;
  };

  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_view(line, '\t');
    if (f.size() != 6) {
      reject("expected 6 tab-separated fields, got " + std::to_string(f.size()));
      continue;
    }
    if (std::any_of(f.begin(), f.end(), [](std::string_view x) { return detail::trim(x).empty(); })) {
      reject("empty field");
      continue;
    }
    const auto date = parse_date(f[1]);
    if (!date) {
      reject("unparseable date '" + std::string(f[1]) + "'");
      continue;
    }
    if (f[5] != "P" && f[5] != "D") {
      reject("outcome must be P or D, got '" + std::string(f[5]) + "'");
      continue;
    }
    const auto plaintiffs = firms_of(f[2]);
    const auto defendants = firms_of(f[3]);
    if (plaintiffs.empty() || defendants.empty()) {
      reject("no firm names");
      continue;
    }
    const std::uint32_t type = detail::intern(typ, out.data.type_names, std::string(f[4]));
    for (const auto& p : plaintiffs)
      for (const auto& d : defendants) {
        if (p == d) {
          reject("firm '" + p + "' appears on both sides");
          continue;
        }
        InteractionRecord r;
        r.case_id = std::string(f[0]);
        r.timestamp = *date;
        r.plaintiff = EntityId(detail::intern(ent, out.data.entity_labels, p));
        r.defendant = EntityId(detail::intern(ent, out.data.entity_labels, d));
        r.itype = TypeId(type);
        r.winner = f[5] == "P" ? Side::Plaintiff : Side::Defendant;
        out.data.records.push_back(std::move(r));
      }
  }
  if (out.data.records.empty())
    throw IoError(IoErrc::EmptyOutput, "no valid interactions in input");
  return out;
}

inline IngestResult ingest_file(const std::filesystem::path& path, const IngestOptions& opt = {}) {
  auto in = detail::open_input(path);
  return ingest(in, opt);
}

// One row per record.
inline void write_interactions(std::ostream& os, const Dataset& data) {
  os << kInteractionHeader << '\n';
  for (const auto& r : data.records)
    os << r.case_id << '\t' << format_date(r.timestamp) << '\t'
       << data.entity_labels.at(r.plaintiff.index()) << '\t'
       << data.entity_labels.at(r.defendant.index()) << '\t' << data.type_names.at(r.itype.index())
       << '\t' << (r.defendant_won() ? 'D' : 'P') << '\n';
}

struct Model {
  std::vector<std::string> entity_labels;
  std::vector<std::string> type_names;
  ModelParams params;
};

inline void write_model(std::ostream& os, const Model& model) {
  const auto& p = model.params;
  if (model.entity_labels.size() != p.entity_count() || model.type_names.size() != p.type_count())
    throw InvalidArgument("write_model: label tables do not match parameters");
  os << kModelHeader << '\n';
  for (std::size_t k = 0; k < p.entity_count(); ++k)
    os << "entity\t" << model.entity_labels[k] << '\t' << format_real(p.scores[k]) << '\n';
  for (std::size_t m = 0; m < p.type_count(); ++m)
    os << "type\t" << model.type_names[m] << '\t' << format_real(p.privileges[m]) << '\t'
       << format_real(p.valences[m]) << '\n';
}

inline Model read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(IoErrc::MalformedHeader, "empty model file");
  detail::strip_cr(line);
  if (line != kModelHeader) throw IoError(IoErrc::MalformedHeader, "not an ahpi-model v1 file");
  Model model;
  std::size_t lineno = 1;
  auto real = [&](std::string_view s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw IoError(IoErrc::InvalidRow, "model line " + std::to_string(lineno) + ": bad number");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_view(line, '\t');
    if (f[0] == "entity" && f.size() == 3) {
      model.entity_labels.emplace_back(f[1]);
      model.params.scores.push_back(real(f[2]));
    } else if (f[0] == "type" && f.size() == 4) {
      model.type_names.emplace_back(f[1]);
      model.params.privileges.push_back(real(f[2]));
      model.params.valences.push_back(real(f[3]));
    } else {
      throw IoError(IoErrc::InvalidRow, "model line " + std::to_string(lineno) + ": unrecognised");
    }
  }
  model.params.validate();
  return model;
}

inline Model read_model_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_model(in);
}

// `rank<TAB>firm name` lines; a first line whose rank is not numeric is a header.
inline ExternalRanking read_ranking(std::istream& in, std::string name,
                                    const ClusterAssignment* mapping = nullptr) {
  ExternalRanking r;
  r.name = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_view(line, '\t');
    double rank = 0.0;
    const auto rank_field = detail::trim(f[0]);
    const auto [p, ec] = std::from_chars(rank_field.data(), rank_field.data() + rank_field.size(), rank);
    const bool numeric = ec == std::errc{} && p == rank_field.data() + rank_field.size();
    if (!numeric && lineno == 1) continue;
    if (!numeric || f.size() != 2)
      throw IoError(IoErrc::InvalidRow, r.name + " line " + std::to_string(lineno) + ": expected rank<TAB>firm");
    std::string firm(detail::trim(f[1]));
    if (mapping) firm = mapping->canonicalize(firm);
    r.entries.emplace_back(std::move(firm), rank);
  }
  r.validate();
  return r;
}

// `count<TAB>string` lines.
inline std::vector<NameCount> read_name_counts(std::istream& in) {
  std::vector<NameCount> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::uint64_t count = 0;
    const char* end = line.data() + (tab == std::string::npos ? 0 : tab);
    const auto [p, ec] = std::from_chars(line.data(), end, count);
    if (tab == std::string::npos || ec != std::errc{} || p != end)
      throw IoError(IoErrc::InvalidRow, "counts line " + std::to_string(lineno) + ": expected count<TAB>string");
    out.push_back({line.substr(tab + 1), count});
  }
  return out;
}

// `raw<TAB>canonical` lines, sorted by raw string.
inline void write_mapping(std::ostream& os, const ClusterAssignment& a) {
  for (const auto& [raw, canon] : a.canonical) os << raw << '\t' << canon << '\n';
}

inline ClusterAssignment read_mapping(std::istream& in) {
  ClusterAssignment a;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw IoError(IoErrc::InvalidRow, "mapping line " + std::to_string(lineno) + ": expected raw<TAB>canonical");
    a.canonical[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return a;
}

// Writes via a sibling temporary file and rename, so readers never see a
// partial artifact.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code dir_ec;
    fs::create_directories(path.parent_path(), dir_ec);
    if (dir_ec)
      throw IoError(IoErrc::MissingFile, "cannot create " + path.parent_path().string() + ": " + dir_ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError(IoErrc::MissingFile, "cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      os.close();
      fs::remove(tmp);
      throw IoError(IoErrc::MissingFile, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError(IoErrc::MissingFile, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CaseFirms {
  std::vector<std::string> plaintiff_firms;
  std::vector<std::string> defendant_firms;
};

// Firms per side for one case from its attorney substrings. Cases with fewer
// than two substrings, with a substring naming more than one role, or without
// a firm on both sides are discarded (nullopt).
inline std::optional<CaseFirms> extract_case_firms(std::span<const std::string> substrings,
                                                   const ParserConfig& config = {}) {
  if (substrings.size() < 2) return std::nullopt;
  CaseFirms out;
  for (const auto& s : substrings) {
    if (count_roles(s) > 1) return std::nullopt;
    const auto tuple = parse_attorney_substring(s, config);
    if (!tuple) continue;
    const auto* role = std::get_if<PartyRole>(&tuple->role);
    if (!role) continue;
    auto& side = *role == PartyRole::Plaintiff ? out.plaintiff_firms : out.defendant_firms;
    for (const auto& f : tuple->firms)
      if (std::find(side.begin(), side.end(), f) == side.end()) side.push_back(f);
  }
  if (out.plaintiff_firms.empty() || out.defendant_firms.empty()) return std::nullopt;
  return out;
}

// `case_id<TAB>attorney substring` lines grouped by case id, in first-seen order.
inline std::vector<std::pair<std::string, std::vector<std::string>>> read_attorney_listings(
    std::istream& in) {
  std::vector<std::pair<std::string, std::vector<std::string>>> cases;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw IoError(IoErrc::InvalidRow, "attorney line " + std::to_string(lineno) + ": expected case_id<TAB>substring");
    const std::string id = line.substr(0, tab);
    auto [it, fresh] = index.emplace(id, cases.size());
    if (fresh) cases.emplace_back(id, std::vector<std::string>{});
    cases[it->second].second.push_back(line.substr(tab + 1));
  }
  return cases;
}

}  // namespace ahpi
