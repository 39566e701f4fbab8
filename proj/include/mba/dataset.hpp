#pragma once

#include <algorithm>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mba/errors.hpp"
#include "mba/format.hpp"

namespace mba {

// POS ingestion and basketization. A receipt's rows become one Basket of
// deduplicated item presence flags; shopper/time attributes can be
// injected as "@"-prefixed virtual items so rules may condition on them.

constexpr char kVirtualPrefix = '@';

constexpr std::string_view kCsvHeader =
    "receipt_id,timestamp,gender,age,item_code,item_name,category,quantity,"
    "unit_price";

enum class Gender { female, male, unknown };

inline std::string to_string(Gender g) {
  switch (g) {
    case Gender::female: return "F";
    case Gender::male: return "M";
    default: return "";
  }
}

/// Minute-resolution local timestamp, format YYYY-MM-DDTHH:MM.
struct Timestamp {
  int year = 0;
  unsigned month = 1;
  unsigned day = 1;
  unsigned hour = 0;
  unsigned minute = 0;

  auto operator<=>(const Timestamp&) const = default;

  static std::optional<Timestamp> parse(std::string_view text) {
    if (text.size() != 16 || text[4] != '-' || text[7] != '-' ||
        text[10] != 'T' || text[13] != ':')
      return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len,
                      unsigned& out) -> bool {
      out = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') return false;
        out = out * 10 + static_cast<unsigned>(text[i] - '0');
      }
      return true;
    };
    unsigned y, mo, d, h, mi;
    if (!digits(0, 4, y) || !digits(5, 2, mo) || !digits(8, 2, d) ||
        !digits(11, 2, h) || !digits(14, 2, mi))
      return std::nullopt;
    Timestamp ts{static_cast<int>(y), mo, d, h, mi};
    if (!ts.valid()) return std::nullopt;
    return ts;
  }

  bool valid() const {
    namespace chr = std::chrono;
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    return ymd.ok() && hour <= 23 && minute <= 59;
  }

  /// Day of week, 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const {
    namespace chr = std::chrono;
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    return chr::weekday{chr::sys_days{ymd}}.c_encoding();
  }

  std::string to_string() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u", year, month,
                  day, hour, minute);
    return std::string(buf);
  }
};

inline constexpr std::string_view kWeekdayNames[7] = {
    "SUN", "MON", "TUE", "WED", "THU", "FRI", "SAT"};

/// One CSV row of point-of-sale data.
struct PosRecord {
  std::string receipt_id;
  Timestamp timestamp;
  Gender gender = Gender::unknown;
  std::optional<int> age;
  std::string item_code;
  std::string item_name;
  std::optional<std::string> category;
  int quantity = 1;
  double unit_price = 0.0;
};

/// One cash receipt reduced to item presence flags. `items` holds real
/// item identifiers, `virtual_items` the "@"-prefixed attribute flags.
struct Basket {
  std::string receipt_id;
  Timestamp timestamp;
  Gender gender = Gender::unknown;
  std::optional<std::string> age_band;
  std::set<std::string> items;
  std::set<std::string> virtual_items;

  /// Real and virtual identifiers merged, sorted ascending.
  std::vector<std::string> all_items() const {
    std::vector<std::string> out;
    out.reserve(items.size() + virtual_items.size());
    std::merge(items.begin(), items.end(), virtual_items.begin(),
               virtual_items.end(), std::back_inserter(out));
    return out;
  }

  bool contains(const std::string& id) const {
    return items.count(id) > 0 || virtual_items.count(id) > 0;
  }
};

/// Which shopper/time attributes become virtual items.
struct VirtualItemSpec {
  bool gender = false;
  bool day_of_week = false;
  bool age_band = false;
  bool antecedent_only = true;

  bool any() const { return gender || day_of_week || age_band; }

  /// Parses a comma list such as "gender,dow,age".
  static VirtualItemSpec parse_list(std::string_view csv) {
    VirtualItemSpec spec;
    if (trim(csv).empty()) return spec;
    for (const auto& raw : split_on(csv, ',')) {
      std::string name = trim(raw);
      if (name == "gender") {
        spec.gender = true;
      } else if (name == "dow" || name == "day_of_week") {
        spec.day_of_week = true;
      } else if (name == "age" || name == "age_band") {
        spec.age_band = true;
      } else {
        throw Error::config("unknown virtual item attribute: " + name);
      }
    }
    return spec;
  }
};

struct ItemCatalog {
  struct Entry {
    std::string name;
    std::optional<std::string> category;
    bool has_category() const { return category.has_value(); }
  };
  std::map<std::string, Entry> by_code;

  const Entry* find(const std::string& code) const {
    auto it = by_code.find(code);
    return it == by_code.end() ? nullptr : &it->second;
  }
};

/// First record of a code wins; later rows only fill a missing category.
inline ItemCatalog build_catalog(const std::vector<PosRecord>& records) {
  ItemCatalog catalog;
  for (const auto& rec : records) {
    auto [it, inserted] = catalog.by_code.try_emplace(
        rec.item_code, ItemCatalog::Entry{rec.item_name, rec.category});
    if (!inserted && !it->second.category && rec.category)
      it->second.category = rec.category;
  }
  return catalog;
}

namespace detail {

// Splits one CSV line on commas. The ingestion format is plain
// comma-separated text without quoting; embedded commas are not supported.
inline std::vector<std::string> csv_fields(const std::string& line) {
  return split_on(line, ',');
}

inline Error row_error(std::size_t line_no, const std::string& what) {
  return Error::data("line " + std::to_string(line_no) + ": " + what);
}

inline bool parse_int(const std::string& text, long long& out) {
  if (text.empty()) return false;
  std::size_t i = text[0] == '-' ? 1 : 0;
  if (i == text.size()) return false;
  long long value = 0;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
    value = value * 10 + (text[i] - '0');
    if (value > 2000000000) return false;
  }
  out = text[0] == '-' ? -value : value;
  return true;
}

}  // namespace detail

/// Parses the ingestion CSV. All-or-nothing: the first malformed row
/// aborts the parse with its line number.
inline std::vector<PosRecord> parse_pos_csv(std::istream& in) {
  std::vector<PosRecord> records;
  std::string line;
  if (!std::getline(in, line))
    throw Error::data("empty input: missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw Error::data("bad CSV header, expected: " + std::string(kCsvHeader));

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::csv_fields(line);
    if (fields.size() != 9)
      throw detail::row_error(line_no,
                              "expected 9 fields, got " +
                                  std::to_string(fields.size()));
    PosRecord rec;
    rec.receipt_id = fields[0];
    if (rec.receipt_id.empty())
      throw detail::row_error(line_no, "empty receipt_id");

    auto ts = Timestamp::parse(fields[1]);
    if (!ts)
      throw detail::row_error(line_no, "unparsable timestamp: " + fields[1]);
    rec.timestamp = *ts;

    if (fields[2] == "F") {
      rec.gender = Gender::female;
    } else if (fields[2] == "M") {
      rec.gender = Gender::male;
    } else if (fields[2].empty()) {
      rec.gender = Gender::unknown;
    } else {
      throw detail::row_error(line_no, "unknown gender code: " + fields[2]);
    }

    if (!fields[3].empty()) {
      long long age;
      if (!detail::parse_int(fields[3], age))
        throw detail::row_error(line_no, "unparsable age: " + fields[3]);
      rec.age = static_cast<int>(age);
    }

    rec.item_code = fields[4];
    if (rec.item_code.empty())
      throw detail::row_error(line_no, "empty item_code");
    if (rec.item_code[0] == kVirtualPrefix)
      throw detail::row_error(
          line_no, "item_code may not start with the reserved '@' prefix");
    rec.item_name = fields[5];
    if (rec.item_name.empty())
      throw detail::row_error(line_no, "empty item_name");
    if (!fields[6].empty()) rec.category = fields[6];

    long long qty;
    if (!detail::parse_int(fields[7], qty))
      throw detail::row_error(line_no, "unparsable quantity: " + fields[7]);
    if (qty < 0) throw detail::row_error(line_no, "negative quantity");
    if (qty == 0) throw detail::row_error(line_no, "quantity must be >= 1");
    rec.quantity = static_cast<int>(qty);

    try {
      std::size_t used = 0;
      rec.unit_price = std::stod(fields[8], &used);
      if (used != fields[8].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw detail::row_error(line_no, "unparsable unit_price: " + fields[8]);
    }
    if (rec.unit_price < 0)
      throw detail::row_error(line_no, "negative unit_price");

    records.push_back(std::move(rec));
  }
  return records;
}

/// Decade band for an age in [0, 130]: 25 -> "20s".
inline std::string discretize_age(int age) {
  if (age < 0 || age > 130)
    throw Error::data("invalid age outside [0,130]: " + std::to_string(age));
  return std::to_string(age / 10 * 10) + "s";
}

struct GroupResult {
  std::vector<Basket> baskets;
  /// One diagnostic per rejected receipt (conflicting demographics or
  /// invalid age). Rejection is counted, not fatal.
  std::vector<std::string> rejections;
};

/// Groups records into one basket per distinct receipt_id, ordered by
/// first appearance. Demographics come from the first record of the
/// receipt; records that disagree on gender or age reject the receipt.
inline GroupResult group_into_baskets(const std::vector<PosRecord>& records) {
  struct Pending {
    Basket basket;
    Gender gender;
    std::optional<int> age;
    std::optional<std::string> reject;
  };
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> index_of;

  for (const auto& rec : records) {
    auto [it, inserted] = index_of.try_emplace(rec.receipt_id, pending.size());
    if (inserted) {
      Pending p;
      p.basket.receipt_id = rec.receipt_id;
      p.basket.timestamp = rec.timestamp;
      p.basket.gender = rec.gender;
      p.gender = rec.gender;
      p.age = rec.age;
      if (rec.age) {
        try {
          p.basket.age_band = discretize_age(*rec.age);
        } catch (const Error&) {
          p.reject = "receipt " + rec.receipt_id + ": age out of range";
        }
      }
      pending.push_back(std::move(p));
    }
    Pending& p = pending[it->second];
    if (rec.gender != p.gender && !p.reject)
      p.reject = "receipt " + rec.receipt_id + ": conflicting gender";
    if (rec.age != p.age && !p.reject)
      p.reject = "receipt " + rec.receipt_id + ": conflicting age";
    p.basket.items.insert(rec.item_code);
  }

  GroupResult result;
  for (auto& p : pending) {
    if (p.reject) {
      result.rejections.push_back(*p.reject);
    } else {
      result.baskets.push_back(std::move(p.basket));
    }
  }
  return result;
}

/// Adds "@gender=", "@dow=", "@age=" flags for the enabled attributes.
/// Attributes whose source value is absent add nothing. Idempotent.
inline Basket derive_virtual_items(Basket basket,
                                   const VirtualItemSpec& spec) {
  if (spec.gender && basket.gender != Gender::unknown)
    basket.virtual_items.insert("@gender=" + to_string(basket.gender));
  if (spec.day_of_week)
    basket.virtual_items.insert(
        "@dow=" + std::string(kWeekdayNames[basket.timestamp.weekday()]));
  if (spec.age_band && basket.age_band)
    basket.virtual_items.insert("@age=" + *basket.age_band);
  return basket;
}

inline std::vector<Basket> apply_virtual_items(std::vector<Basket> baskets,
                                               const VirtualItemSpec& spec) {
  if (!spec.any()) return baskets;
  for (auto& b : baskets) b = derive_virtual_items(std::move(b), spec);
  return baskets;
}

enum class ProfileAttribute { gender, day_of_week, age_band, category };

inline ProfileAttribute parse_profile_attribute(std::string_view name) {
  if (name == "gender") return ProfileAttribute::gender;
  if (name == "day_of_week" || name == "dow") return ProfileAttribute::day_of_week;
  if (name == "age_band" || name == "age") return ProfileAttribute::age_band;
  if (name == "category") return ProfileAttribute::category;
  throw Error::config("unknown profile attribute: " + std::string(name));
}

struct ProfileRow {
  std::string value;
  std::uint64_t count = 0;
  std::string percent;  // rendered to 2 decimals, half-up
};

struct Profile {
  std::vector<ProfileRow> rows;
  /// Number of counted units (baskets with the attribute present; for
  /// category, basket-item presence entries with a known category).
  std::uint64_t present_total = 0;
};

/// Distribution of one attribute. gender/day_of_week/age_band count
/// baskets; category counts item presence entries resolved through the
/// catalog, so uncategorized items stay out of category rollups.
inline Profile categorical_profile(const std::vector<Basket>& baskets,
                                   ProfileAttribute attribute,
                                   const ItemCatalog* catalog = nullptr) {
  std::map<std::string, std::uint64_t> counts;
  if (attribute == ProfileAttribute::category) {
    if (!catalog)
      throw Error::config("category profile requires an item catalog");
    for (const auto& basket : baskets)
      for (const auto& item : basket.items)
        if (const auto* entry = catalog->find(item); entry && entry->category)
          ++counts[*entry->category];
  } else {
    for (const auto& basket : baskets) {
      switch (attribute) {
        case ProfileAttribute::gender:
          if (basket.gender != Gender::unknown)
            ++counts[to_string(basket.gender)];
          break;
        case ProfileAttribute::day_of_week:
          ++counts[std::string(kWeekdayNames[basket.timestamp.weekday()])];
          break;
        case ProfileAttribute::age_band:
          if (basket.age_band) ++counts[*basket.age_band];
          break;
        default:
          break;
      }
    }
  }

  Profile profile;
  for (const auto& [value, count] : counts) profile.present_total += count;
  for (const auto& [value, count] : counts)
    profile.rows.push_back(
        {value, count, render_percent(count, profile.present_total, 2)});
  std::sort(profile.rows.begin(), profile.rows.end(),
            [](const ProfileRow& a, const ProfileRow& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.value < b.value;
            });
  return profile;
}

struct FrequencyRow {
  std::string item;
  std::uint64_t count = 0;
  std::string percent;  // count / N to 2 decimals, half-up
};

/// Per-item basket counts over all N baskets, most frequent first,
/// ties by identifier. Virtual items are excluded.
inline std::vector<FrequencyRow> frequency_table(
    const std::vector<Basket>& baskets) {
  if (baskets.empty()) throw Error::data("frequency_table: no baskets");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& basket : baskets)
    for (const auto& item : basket.items) ++counts[item];
  std::vector<FrequencyRow> rows;
  rows.reserve(counts.size());
  for (const auto& [item, count] : counts)
    rows.push_back({item, count, render_percent(count, baskets.size(), 2)});
  std::sort(rows.begin(), rows.end(),
            [](const FrequencyRow& a, const FrequencyRow& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.item < b.item;
            });
  return rows;
}

inline void write_profile_csv(std::ostream& out, const Profile& profile) {
  out << "value;count;percent\n";
  for (const auto& row : profile.rows)
    out << row.value << ';' << row.count << ';' << row.percent << '\n';
}

inline void write_frequency_csv(std::ostream& out,
                                const std::vector<FrequencyRow>& rows) {
  out << "item;count;percent\n";
  for (const auto& row : rows)
    out << row.item << ';' << row.count << ';' << row.percent << '\n';
}

}  // namespace mba
