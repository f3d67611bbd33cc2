#pragma once

#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "corelate/csv.hpp"
#include "corelate/error.hpp"

namespace corelate {

// The flat category space that community vectors live in. Paths rooted at a
// parent category collapse onto the parent; paths under the business root keep
// their second level. Names are matched on a normalized key (case, punctuation
// and the connectives "and"/"or" ignored), so "Food and Beverage" and
// "Food & Beverage" are the same name.
class CategoryTaxonomy {
 public:
  CategoryTaxonomy(std::vector<std::string> canonical, std::vector<std::string> parents,
                   std::vector<std::string> business_roots, std::string fallback,
                   const std::map<std::string, std::string>& aliases = {})
      : canonical_(std::move(canonical)) {
    if (canonical_.empty()) throw DomainError("taxonomy: no canonical categories");
    for (std::size_t i = 0; i < canonical_.size(); ++i) {
      if (!by_key_.emplace(key(canonical_[i]), i).second) {
        throw DomainError("taxonomy: duplicate canonical name '" + canonical_[i] + "'");
      }
    }
    fallback_ = resolve_canonical(fallback, "fallback");
    for (const auto& p : parents) parents_.insert(resolve_canonical(p, "parent"));
    for (const auto& r : business_roots) business_roots_.insert(key(r));
    if (business_roots_.empty()) throw DomainError("taxonomy: no business root names");
    for (const auto& [alias, target] : aliases) {
      aliases_[key(alias)] = resolve_canonical(target, "alias target");
      alias_names_[alias] = canonical_[aliases_[key(alias)]];
    }
  }

  // Facebook's page taxonomy: six parents collapsed to themselves plus the 22
  // second-level categories under Businesses.
  static CategoryTaxonomy facebook() {
    return CategoryTaxonomy(default_canonical(),
                            {"Interest", "Community Organization", "Media", "Public Figure",
                             "Non-Business Places", "Other"},
                            {"Business", "Businesses"}, "Other", default_aliases());
  }

  static std::vector<std::string> default_canonical() {
    return {"Interest",
            "Community Organization",
            "Media",
            "Public Figure",
            "Non-Business Places",
            "Other",
            "Advertising or Marketing",
            "Agriculture",
            "Arts & Entertainment",
            "Automotive, Aircraft & Boat",
            "Beauty, Cosmetic & Personal Care",
            "Commercial & Industrial",
            "Education",
            "Finance",
            "Food & Beverage",
            "Hotel & Lodging",
            "Legal",
            "Local Service",
            "Media News Company",
            "Medical & Health",
            "Non-Governmental Organization",
            "Nonprofit Organization",
            "Public & Government Service",
            "Real Estate",
            "Science, Technology & Engineering",
            "Shopping & Retail",
            "Sports & Recreation",
            "Travel & Transportation"};
  }

  static std::map<std::string, std::string> default_aliases() {
    return {{"Advertising Agency", "Advertising or Marketing"},
            {"Copywriting Service", "Advertising or Marketing"},
            {"Restaurant", "Food & Beverage"},
            {"Seafood Restaurant", "Food & Beverage"},
            {"Bar", "Food & Beverage"},
            {"Cafe", "Food & Beverage"},
            {"Bakery", "Food & Beverage"},
            {"NGO", "Non-Governmental Organization"},
            {"Health Plan", "Medical & Health"},
            {"Clothing Store", "Shopping & Retail"},
            {"Beauty Salon", "Beauty, Cosmetic & Personal Care"},
            {"Modeling Agency", "Arts & Entertainment"},
            {"Tour Agency", "Travel & Transportation"},
            {"TV Channel", "Media News Company"}};
  }

  // JSON: {"canonical": [...], "parents": [...], "business_roots": [...],
  //        "fallback": "Other", "aliases": {"name": "canonical name"}}
  static CategoryTaxonomy from_json(const nlohmann::json& j) {
    try {
      std::map<std::string, std::string> aliases;
      if (j.contains("aliases")) aliases = j.at("aliases").get<std::map<std::string, std::string>>();
      return CategoryTaxonomy(j.at("canonical").get<std::vector<std::string>>(),
                              j.at("parents").get<std::vector<std::string>>(),
                              j.at("business_roots").get<std::vector<std::string>>(),
                              j.value("fallback", std::string("Other")), aliases);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("taxonomy: ") + e.what());
    }
  }

  static CategoryTaxonomy load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open taxonomy '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("taxonomy '" + path + "': " + e.what());
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["canonical"] = canonical_;
    std::vector<std::string> parents;
    for (auto p : parents_) parents.push_back(canonical_[p]);
    j["parents"] = parents;
    j["business_roots"] = std::vector<std::string>(business_roots_.begin(), business_roots_.end());
    j["fallback"] = canonical_[fallback_];
    j["aliases"] = alias_names_;
    return j;
  }

  std::size_t size() const { return canonical_.size(); }
  const std::vector<std::string>& canonical() const { return canonical_; }
  const std::string& name(std::size_t i) const { return canonical_.at(i); }
  std::size_t fallback() const { return fallback_; }
  bool is_parent(std::size_t i) const { return parents_.contains(i); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    const auto k = key(name);
    if (const auto it = by_key_.find(k); it != by_key_.end()) return it->second;
    if (const auto it = aliases_.find(k); it != aliases_.end()) return it->second;
    return std::nullopt;
  }

  // Total: anything unrecognized maps to the fallback category.
  std::size_t flatten(std::string_view raw_category) const {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (start <= raw_category.size()) {
      auto end = raw_category.find('/', start);
      if (end == std::string_view::npos) end = raw_category.size();
      const auto part = text::trim(raw_category.substr(start, end - start));
      if (!part.empty()) parts.push_back(part);
      start = end + 1;
    }
    if (parts.empty()) return fallback_;
    if (business_roots_.contains(key(parts[0]))) {
      if (parts.size() < 2) return fallback_;
      const auto sub = index_of(parts[1]);
      return (sub && !parents_.contains(*sub)) ? *sub : fallback_;
    }
    if (const auto idx = index_of(parts[0])) return *idx;
    return fallback_;
  }

  static std::string key(std::string_view name) {
    std::string out;
    std::string word;
    auto flush = [&] {
      if (!word.empty() && word != "and" && word != "or") {
        if (!out.empty()) out.push_back(' ');
        out += word;
      }
      word.clear();
    };
    for (char c : name) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isalnum(u) || u >= 0x80) {
        word.push_back(static_cast<char>(std::tolower(u)));
      } else if (c != '-') {
        flush();
      }
    }
    flush();
    return out;
  }

 private:
  std::size_t resolve_canonical(const std::string& name, std::string_view role) const {
    const auto it = by_key_.find(key(name));
    if (it == by_key_.end()) {
      throw DomainError("taxonomy: " + std::string(role) + " '" + name + "' is not a canonical category");
    }
    return it->second;
  }

  std::vector<std::string> canonical_;
  std::map<std::string, std::size_t> by_key_;
  std::map<std::string, std::size_t> aliases_;
  std::map<std::string, std::string> alias_names_;
  std::set<std::size_t> parents_;
  std::set<std::string> business_roots_;
  std::size_t fallback_ = 0;
};

inline std::size_t flatten_category(std::string_view raw_category, const CategoryTaxonomy& taxonomy) {
  return taxonomy.flatten(raw_category);
}

}  // namespace corelate
