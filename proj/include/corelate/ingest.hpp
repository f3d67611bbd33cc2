#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "corelate/csv.hpp"
#include "corelate/error.hpp"

namespace corelate {

// A business page record.
struct Business {
  std::string id;
  std::string name;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::string raw_category;  // slash-delimited taxonomy path
  std::optional<std::uint64_t> checkins;
  std::optional<std::uint64_t> fans;
  std::optional<double> avg_rating;

  bool operator==(const Business&) const = default;
};

enum class ReactionType { Like, Angry, Wow, Sad, Thankful };

inline constexpr ReactionType kAllReactionTypes[] = {ReactionType::Like, ReactionType::Angry, ReactionType::Wow,
                                                     ReactionType::Sad, ReactionType::Thankful};

inline std::string_view to_string(ReactionType t) {
  switch (t) {
    case ReactionType::Like: return "Like";
    case ReactionType::Angry: return "Angry";
    case ReactionType::Wow: return "Wow";
    case ReactionType::Sad: return "Sad";
    case ReactionType::Thankful: return "Thankful";
  }
  return "?";
}

// Case-insensitive match against the five reaction names.
inline std::optional<ReactionType> parse_reaction_type(std::string_view s) {
  s = text::trim(s);
  for (auto t : kAllReactionTypes) {
    const auto name = to_string(t);
    if (name.size() != s.size()) continue;
    bool eq = true;
    for (std::size_t i = 0; i < s.size() && eq; ++i) {
      eq = std::tolower(static_cast<unsigned char>(s[i])) == std::tolower(static_cast<unsigned char>(name[i]));
    }
    if (eq) return t;
  }
  return std::nullopt;
}

struct Reaction {
  std::string user_id;
  std::string business_id;
  ReactionType type = ReactionType::Like;

  bool operator==(const Reaction&) const = default;
};

using IdSet = std::set<std::string>;
using Index = std::map<std::string, IdSet>;

// Reaction multiset plus its two set-valued indexes. The indexes are always
// rebuilt from the reaction list, so they cannot drift apart.
class ReactionDataset {
 public:
  ReactionDataset() = default;
  explicit ReactionDataset(std::vector<Reaction> reactions) : reactions_(std::move(reactions)) { reindex(); }

  const std::vector<Reaction>& reactions() const { return reactions_; }
  // user -> businesses reacted to
  const Index& user_index() const { return user_index_; }
  // business -> users (the U_i sets)
  const Index& business_index() const { return business_index_; }

  std::size_t size() const { return reactions_.size(); }
  bool empty() const { return reactions_.empty(); }

  template <typename Pred>
  ReactionDataset filtered(Pred keep) const {
    std::vector<Reaction> out;
    out.reserve(reactions_.size());
    for (const auto& r : reactions_) {
      if (keep(r)) out.push_back(r);
    }
    return ReactionDataset(std::move(out));
  }

  bool operator==(const ReactionDataset& o) const { return reactions_ == o.reactions_; }

 private:
  void reindex() {
    user_index_.clear();
    business_index_.clear();
    for (const auto& r : reactions_) {
      user_index_[r.user_id].insert(r.business_id);
      business_index_[r.business_id].insert(r.user_id);
    }
  }

  std::vector<Reaction> reactions_;
  Index user_index_;
  Index business_index_;
};

enum class Format { Csv, Jsonl };

inline Format parse_format(std::string_view tag) {
  if (tag == "csv") return Format::Csv;
  if (tag == "jsonl") return Format::Jsonl;
  throw UsageError("unknown format '" + std::string(tag) + "' (expected csv or jsonl)");
}

// Guesses the format from a file extension; defaults to csv.
inline Format format_from_path(std::string_view path) {
  return (path.ends_with(".jsonl") || path.ends_with(".ndjson")) ? Format::Jsonl : Format::Csv;
}

template <typename T>
struct ParseResult {
  T records;
  std::vector<std::string> diagnostics;  // one line per rejected record
  std::size_t rejected = 0;
};

namespace detail {

inline const std::vector<std::string> kBusinessColumns = {"id",       "name", "lat",  "lon",
                                                          "category", "checkins", "fans", "rating"};
inline const std::vector<std::string> kReactionColumns = {"user_id", "business_id", "reaction_type"};

// Column positions of `wanted` inside `header`.
inline std::vector<std::size_t> map_header(const std::vector<std::string>& header,
                                           const std::vector<std::string>& wanted, std::string_view what) {
  std::vector<std::size_t> pos;
  for (const auto& col : wanted) {
    std::size_t found = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::trim(header[i]) == col) found = i;
    }
    if (found == header.size()) {
      throw InputError(std::string(what) + ": header is missing column '" + col + "'");
    }
    pos.push_back(found);
  }
  return pos;
}

inline void check_stream(std::istream& in, std::string_view what) {
  if (!in.good() && !in.eof()) throw InputError(std::string(what) + ": unreadable source");
}

// JSON scalar as text; numbers are printed without decoration.
inline std::optional<std::string> json_text(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number_float()) return text::format_double(it->get<double>());
  return std::nullopt;
}

inline std::optional<Business> make_business(std::string_view id, std::string_view name, std::string_view lat,
                                             std::string_view lon, std::string_view category,
                                             std::string_view checkins, std::string_view fans,
                                             std::string_view rating, std::string& why) {
  Business b;
  b.id = std::string(text::trim(id));
  if (b.id.empty()) {
    why = "empty id";
    return std::nullopt;
  }
  b.name = std::string(text::trim(name));
  b.raw_category = std::string(text::trim(category));
  if (auto v = text::parse_double(lat); v && *v >= -90.0 && *v <= 90.0) b.latitude = v;
  if (auto v = text::parse_double(lon); v && *v >= -180.0 && *v <= 180.0) b.longitude = v;
  b.checkins = text::parse_count(checkins);
  b.fans = text::parse_count(fans);
  if (auto v = text::parse_double(rating); v && *v >= 0.0 && *v <= 5.0) b.avg_rating = v;
  return b;
}

inline std::optional<Reaction> make_reaction(std::string_view user, std::string_view business,
                                             std::string_view type, std::string& why) {
  Reaction r;
  r.user_id = std::string(text::trim(user));
  r.business_id = std::string(text::trim(business));
  if (r.user_id.empty()) {
    why = "empty user_id";
    return std::nullopt;
  }
  if (r.business_id.empty()) {
    why = "empty business_id";
    return std::nullopt;
  }
  const auto t = parse_reaction_type(type);
  if (!t) {
    why = "unknown reaction_type '" + std::string(type) + "'";
    return std::nullopt;
  }
  r.type = *t;
  return r;
}

// Drives CSV or JSONL records through `make`, which receives one text field
// per wanted column.
template <typename T, typename Make>
ParseResult<std::vector<T>> parse_records(std::istream& in, Format format,
                                          const std::vector<std::string>& columns, std::string_view what,
                                          Make make) {
  check_stream(in, what);
  ParseResult<std::vector<T>> result;
  std::vector<std::string> fields(columns.size());
  auto reject = [&](std::size_t line, const std::string& why) {
    ++result.rejected;
    result.diagnostics.push_back(std::string(what) + " line " + std::to_string(line) + ": " + why);
  };
  if (format == Format::Csv) {
    text::CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) {
      // zero-byte source: nothing to parse
      check_stream(in, what);
      return result;
    }
    const auto pos = map_header(row, columns, what);
    const std::size_t max_pos = *std::max_element(pos.begin(), pos.end());
    while (true) {
      const auto line = reader.line();
      if (!reader.next(row)) break;
      if (row.size() == 1 && text::trim(row[0]).empty()) continue;
      if (row.size() <= max_pos) {
        reject(line, "expected at least " + std::to_string(max_pos + 1) + " fields, got " +
                         std::to_string(row.size()));
        continue;
      }
      for (std::size_t i = 0; i < pos.size(); ++i) fields[i] = row[pos[i]];
      std::string why;
      if (auto rec = make(fields, why)) {
        result.records.push_back(std::move(*rec));
      } else {
        reject(line, why);
      }
    }
  } else {
    std::string line_text;
    std::size_t line = 0;
    while (std::getline(in, line_text)) {
      ++line;
      if (text::trim(line_text).empty()) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line_text);
      } catch (const nlohmann::json::parse_error& e) {
        reject(line, std::string("invalid json: ") + e.what());
        continue;
      }
      if (!obj.is_object()) {
        reject(line, "record is not an object");
        continue;
      }
      for (std::size_t i = 0; i < columns.size(); ++i) fields[i] = json_text(obj, columns[i].c_str()).value_or("");
      std::string why;
      if (auto rec = make(fields, why)) {
        result.records.push_back(std::move(*rec));
      } else {
        reject(line, why);
      }
    }
  }
  if (in.bad()) throw InputError(std::string(what) + ": read failure");
  return result;
}

}  // namespace detail

inline ParseResult<std::vector<Business>> parse_businesses(std::istream& in, Format format) {
  return detail::parse_records<Business>(
      in, format, detail::kBusinessColumns, "businesses",
      [](const std::vector<std::string>& f, std::string& why) {
        return detail::make_business(f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], why);
      });
}

struct ReactionParse {
  ReactionDataset dataset;
  std::vector<std::string> diagnostics;
  std::size_t rejected = 0;
};

inline ReactionParse parse_reactions(std::istream& in, Format format) {
  auto raw = detail::parse_records<Reaction>(
      in, format, detail::kReactionColumns, "reactions",
      [](const std::vector<std::string>& f, std::string& why) { return detail::make_reaction(f[0], f[1], f[2], why); });
  return {ReactionDataset(std::move(raw.records)), std::move(raw.diagnostics), raw.rejected};
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

inline ParseResult<std::vector<Business>> load_businesses(const std::string& path) {
  auto in = open_input(path);
  return parse_businesses(in, format_from_path(path));
}

inline ReactionParse load_reactions(const std::string& path) {
  auto in = open_input(path);
  return parse_reactions(in, format_from_path(path));
}

// One id per line; everything after '#' is a comment.
inline IdSet parse_blocklist(std::istream& in) {
  IdSet ids;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = text::trim(v);
    if (!v.empty()) ids.emplace(v);
  }
  if (in.bad()) throw InputError("blocklist: read failure");
  return ids;
}

inline IdSet load_blocklist(const std::string& path) {
  auto in = open_input(path);
  return parse_blocklist(in);
}

inline void write_businesses_csv(std::ostream& out, const std::vector<Business>& businesses) {
  text::write_csv_row(out, detail::kBusinessColumns);
  auto opt = [](const auto& v) -> std::string {
    if (!v) return {};
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(*v)>>) {
      return text::format_double(*v);
    } else {
      return std::to_string(*v);
    }
  };
  for (const auto& b : businesses) {
    text::write_csv_row(out, {b.id, b.name, opt(b.latitude), opt(b.longitude), b.raw_category, opt(b.checkins),
                              opt(b.fans), opt(b.avg_rating)});
  }
}

inline void write_reactions_csv(std::ostream& out, const ReactionDataset& reactions) {
  text::write_csv_row(out, detail::kReactionColumns);
  for (const auto& r : reactions.reactions()) {
    text::write_csv_row(out, {r.user_id, r.business_id, std::string(to_string(r.type))});
  }
}

struct CleaningReport {
  std::size_t duplicates = 0;
  std::size_t inconsistent = 0;
  std::size_t non_business = 0;
  std::size_t reactions_non_business = 0;  // reactions of blocklisted pages
  std::size_t reactions_dropped = 0;       // all reactions removed, including the above
};

struct CleanResult {
  std::vector<Business> businesses;
  ReactionDataset reactions;
  CleaningReport report;
};

// Inconsistent = empty name or no coordinates at all.
inline bool is_inconsistent(const Business& b) {
  return text::trim(b.name).empty() || (!b.latitude && !b.longitude);
}

// Removes duplicates (first occurrence wins), inconsistent records and
// blocklisted pages, then drops reactions that no longer reference a kept
// business.
inline CleanResult clean(const std::vector<Business>& businesses, const ReactionDataset& reactions,
                         const IdSet& non_business_ids) {
  CleanResult out;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> kept;
  for (const auto& b : businesses) {
    if (!seen.insert(b.id).second) {
      ++out.report.duplicates;
    } else if (is_inconsistent(b)) {
      ++out.report.inconsistent;
    } else if (non_business_ids.contains(b.id)) {
      ++out.report.non_business;
    } else {
      kept.insert(b.id);
      out.businesses.push_back(b);
    }
  }
  for (const auto& r : reactions.reactions()) {
    if (non_business_ids.contains(r.business_id)) ++out.report.reactions_non_business;
  }
  out.reactions = reactions.filtered([&](const Reaction& r) { return kept.contains(r.business_id); });
  out.report.reactions_dropped = reactions.size() - out.reactions.size();
  return out;
}

}  // namespace corelate
