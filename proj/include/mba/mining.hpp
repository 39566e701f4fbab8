#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mba/bitmap.hpp"
#include "mba/dataset.hpp"
#include "mba/errors.hpp"

namespace mba {

// Vertical bitmap index and Apriori mining. Each item (real or virtual)
// is a column; support of an itemset is the popcount of the AND of its
// member bitmaps. A direct basket-scan oracle verifies the miner.

/// Sorted, duplicate-free, nonempty set of item identifiers.
using Itemset = std::vector<std::string>;

inline Itemset make_itemset(std::vector<std::string> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  if (items.empty()) throw Error::config("empty itemset");
  return items;
}

/// Minimum support: absolute basket count >= 1, or fraction in (0,1]
/// converted with a ceiling so a fraction never admits an itemset below
/// the exact proportion.
class MinSupport {
 public:
  static MinSupport absolute(std::uint64_t count) {
    if (count < 1)
      throw Error::config("absolute min_support must be >= 1");
    MinSupport m;
    m.value_ = count;
    return m;
  }

  static MinSupport fraction(double f) {
    if (!(f > 0.0) || f > 1.0)
      throw Error::config("fractional min_support must be in (0,1]");
    MinSupport m;
    m.value_ = f;
    return m;
  }

  std::uint64_t threshold(std::uint64_t n_baskets) const {
    if (std::holds_alternative<std::uint64_t>(value_))
      return std::get<std::uint64_t>(value_);
    long double f = std::get<double>(value_);
    return static_cast<std::uint64_t>(
        std::ceil(f * static_cast<long double>(n_baskets)));
  }

  bool is_fraction() const { return std::holds_alternative<double>(value_); }

 private:
  MinSupport() = default;
  std::variant<std::uint64_t, double> value_ = std::uint64_t{1};
};

struct MiningParams {
  MinSupport min_support = MinSupport::absolute(1);
  // Rules over four or more items are impractical in this domain, so
  // levels stop at 3 by default.
  std::uint32_t max_len = 3;
};

class BitmapIndex {
 public:
  /// Builds the index over real and virtual items of the given baskets.
  /// Column order is the ascending identifier order.
  static BitmapIndex build(std::span<const Basket> baskets) {
    if (baskets.empty())
      throw Error::data("build_index: empty basket list");
    BitmapIndex index;
    index.n_baskets_ = baskets.size();
    std::set<std::string> ids;
    for (const auto& basket : baskets) {
      for (const auto& item : basket.items) ids.insert(item);
      for (const auto& item : basket.virtual_items) ids.insert(item);
    }
    index.items_.assign(ids.begin(), ids.end());
    index.bitmaps_.reserve(index.items_.size());
    for (std::size_t col = 0; col < index.items_.size(); ++col) {
      index.bitmaps_.emplace_back(baskets.size());
      index.col_of_[index.items_[col]] = static_cast<std::uint32_t>(col);
    }
    for (std::size_t row = 0; row < baskets.size(); ++row) {
      for (const auto& item : baskets[row].items)
        index.bitmaps_[index.col_of_.at(item)].set(row);
      for (const auto& item : baskets[row].virtual_items)
        index.bitmaps_[index.col_of_.at(item)].set(row);
    }
    return index;
  }

  std::uint64_t n_baskets() const { return n_baskets_; }
  std::size_t n_items() const { return items_.size(); }
  const std::vector<std::string>& item_order() const { return items_; }

  const std::string& item_name(std::uint32_t col) const { return items_[col]; }

  bool is_virtual(std::uint32_t col) const {
    return items_[col][0] == kVirtualPrefix;
  }

  std::optional<std::uint32_t> column(const std::string& id) const {
    auto it = col_of_.find(id);
    if (it == col_of_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t require_column(const std::string& id) const {
    auto col = column(id);
    if (!col) throw Error::config("unknown item identifier: " + id);
    return *col;
  }

  std::uint64_t count(std::uint32_t col) const {
    return bitmaps_[col].popcount();
  }

  const Bitmap& bitmap(std::uint32_t col) const { return bitmaps_[col]; }

  /// Popcount of the AND of the given columns.
  std::uint64_t support_of_columns(std::span<const std::uint32_t> cols) const {
    if (cols.empty()) return n_baskets_;
    if (cols.size() == 1) return bitmaps_[cols[0]].popcount();
    std::vector<std::uint64_t> acc = bitmaps_[cols[0]].words();
    for (std::size_t i = 1; i < cols.size(); ++i)
      Bitmap::and_into(acc, bitmaps_[cols[i]]);
    std::uint64_t total = 0;
    for (std::uint64_t w : acc) total += std::popcount(w);
    return total;
  }

  std::vector<std::uint32_t> columns_of(const Itemset& itemset) const {
    std::vector<std::uint32_t> cols;
    cols.reserve(itemset.size());
    for (const auto& id : itemset) cols.push_back(require_column(id));
    return cols;
  }

 private:
  std::uint64_t n_baskets_ = 0;
  std::vector<std::string> items_;
  std::vector<Bitmap> bitmaps_;
  std::unordered_map<std::string, std::uint32_t> col_of_;
};

inline BitmapIndex build_index(std::span<const Basket> baskets) {
  return BitmapIndex::build(baskets);
}

inline std::uint64_t support_count(const BitmapIndex& index,
                                   const Itemset& itemset) {
  return index.support_of_columns(index.columns_of(itemset));
}

namespace detail {

/// Classic Apriori candidate generation over sorted size-k sets: join
/// pairs sharing a (k-1)-prefix, then drop candidates with an infrequent
/// k-subset. Works for both identifier and column-id element types.
template <typename T>
std::vector<std::vector<T>> join_prune(
    std::vector<std::vector<T>> frequent_k) {
  if (frequent_k.empty()) return {};
  const std::size_t k = frequent_k[0].size();
  for (auto& set : frequent_k) {
    if (set.size() != k)
      throw Error::config("candidate join: mixed itemset sizes");
    std::sort(set.begin(), set.end());
  }
  std::sort(frequent_k.begin(), frequent_k.end());
  frequent_k.erase(std::unique(frequent_k.begin(), frequent_k.end()),
                   frequent_k.end());

  std::set<std::vector<T>> known(frequent_k.begin(), frequent_k.end());
  std::vector<std::vector<T>> candidates;
  for (std::size_t i = 0; i < frequent_k.size(); ++i) {
    for (std::size_t j = i + 1; j < frequent_k.size(); ++j) {
      if (!std::equal(frequent_k[i].begin(), frequent_k[i].end() - 1,
                      frequent_k[j].begin(), frequent_k[j].end() - 1))
        break;  // sorted input: equal prefixes are contiguous
      std::vector<T> candidate = frequent_k[i];
      candidate.push_back(frequent_k[j].back());
      bool ok = true;
      std::vector<T> subset(candidate.begin(), candidate.end() - 1);
      for (std::size_t drop = 0; ok && drop < candidate.size(); ++drop) {
        subset.assign(candidate.begin(), candidate.end());
        subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(drop));
        ok = known.count(subset) > 0;
      }
      if (ok) candidates.push_back(std::move(candidate));
    }
  }
  return candidates;  // generation order is already sorted and unique
}

}  // namespace detail

inline std::vector<Itemset> candidate_join_prune(
    const std::vector<Itemset>& frequent_k) {
  return detail::join_prune(frequent_k);
}

struct FrequentItemset {
  Itemset items;
  std::uint64_t count = 0;

  bool operator==(const FrequentItemset&) const = default;
};

/// All itemsets meeting min support, grouped by size, each level sorted.
/// Closed under subsets by construction.
class FrequentItemsetTable {
 public:
  void insert(Itemset items, std::uint64_t count) {
    const std::size_t size = items.size();
    if (size == 0) throw Error::config("cannot store an empty itemset");
    if (levels_.size() < size) levels_.resize(size);
    levels_[size - 1].push_back({std::move(items), count});
  }

  void finish() {
    for (auto& level : levels_)
      std::sort(level.begin(), level.end(),
                [](const FrequentItemset& a, const FrequentItemset& b) {
                  return a.items < b.items;
                });
  }

  std::size_t max_size() const { return levels_.size(); }

  /// Itemsets of exactly `size` items (1-based), sorted.
  const std::vector<FrequentItemset>& level(std::size_t size) const {
    static const std::vector<FrequentItemset> empty;
    if (size == 0 || size > levels_.size()) return empty;
    return levels_[size - 1];
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& level : levels_) n += level.size();
    return n;
  }

  bool empty() const { return total() == 0; }

  std::optional<std::uint64_t> find(const Itemset& items) const {
    if (items.empty() || items.size() > levels_.size()) return std::nullopt;
    const auto& level = levels_[items.size() - 1];
    auto it = std::lower_bound(
        level.begin(), level.end(), items,
        [](const FrequentItemset& a, const Itemset& b) { return a.items < b; });
    if (it == level.end() || it->items != items) return std::nullopt;
    return it->count;
  }

  bool operator==(const FrequentItemsetTable&) const = default;

  /// CSV `items;count`, items |-joined, grouped by size then sorted —
  /// stable for diffing.
  void write_csv(std::ostream& out) const {
    out << "items;count\n";
    for (const auto& level : levels_)
      for (const auto& entry : level)
        out << join(entry.items, '|') << ';' << entry.count << '\n';
  }

 private:
  std::vector<std::vector<FrequentItemset>> levels_;
};

namespace detail {

/// Counts every candidate against the index, optionally splitting the
/// candidate list across threads. Counting is order-independent, so the
/// result is identical for any worker count.
inline std::vector<std::uint64_t> count_candidates(
    const BitmapIndex& index,
    const std::vector<std::vector<std::uint32_t>>& candidates,
    unsigned n_threads) {
  std::vector<std::uint64_t> counts(candidates.size(), 0);
  auto count_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      counts[i] = index.support_of_columns(candidates[i]);
  };
  if (n_threads <= 1 || candidates.size() < 2 * n_threads) {
    count_range(0, candidates.size());
    return counts;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (candidates.size() + n_threads - 1) / n_threads;
  for (unsigned t = 0; t < n_threads; ++t) {
    const std::size_t begin = t * chunk;
    if (begin >= candidates.size()) break;
    const std::size_t end = std::min(begin + chunk, candidates.size());
    workers.emplace_back(count_range, begin, end);
  }
  for (auto& worker : workers) worker.join();
  return counts;
}

}  // namespace detail

/// Apriori over the bitmap index: exactly the itemsets of size <= max_len
/// with count >= min_support. Deterministic for any thread count.
inline FrequentItemsetTable apriori(const BitmapIndex& index,
                                    const MiningParams& params,
                                    unsigned n_threads = 1) {
  if (params.max_len < 1) throw Error::config("max_len must be >= 1");
  const std::uint64_t threshold = params.min_support.threshold(index.n_baskets());

  FrequentItemsetTable table;
  std::vector<std::vector<std::uint32_t>> frequent;
  for (std::uint32_t col = 0; col < index.n_items(); ++col) {
    const std::uint64_t count = index.count(col);
    if (count >= threshold) {
      frequent.push_back({col});
      table.insert({index.item_name(col)}, count);
    }
  }

  for (std::uint32_t k = 2; k <= params.max_len && frequent.size() > 1; ++k) {
    auto candidates = detail::join_prune(std::move(frequent));
    frequent.clear();
    if (candidates.empty()) break;
    auto counts = detail::count_candidates(index, candidates, n_threads);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (counts[i] < threshold) continue;
      Itemset items;
      items.reserve(candidates[i].size());
      for (std::uint32_t col : candidates[i])
        items.push_back(index.item_name(col));
      table.insert(std::move(items), counts[i]);
      frequent.push_back(std::move(candidates[i]));
    }
  }
  table.finish();
  return table;
}

/// Verification oracle: enumerates every itemset up to max_len by direct
/// basket membership scans. Guarded against exponential blowup.
inline FrequentItemsetTable brute_force_frequent(
    std::span<const Basket> baskets, const MiningParams& params) {
  if (baskets.empty())
    throw Error::data("brute_force_frequent: empty basket list");
  if (params.max_len < 1) throw Error::config("max_len must be >= 1");
  std::set<std::string> ids;
  for (const auto& basket : baskets) {
    for (const auto& item : basket.items) ids.insert(item);
    for (const auto& item : basket.virtual_items) ids.insert(item);
  }
  if (ids.size() > 20)
    throw Error::data("brute_force_frequent: more than 20 distinct items");
  const std::vector<std::string> universe(ids.begin(), ids.end());
  const std::uint64_t threshold = params.min_support.threshold(baskets.size());

  FrequentItemsetTable table;
  std::vector<std::string> current;
  auto scan = [&](const std::vector<std::string>& itemset) {
    std::uint64_t count = 0;
    for (const auto& basket : baskets) {
      bool all = true;
      for (const auto& id : itemset)
        if (!basket.contains(id)) {
          all = false;
          break;
        }
      if (all) ++count;
    }
    return count;
  };
  auto recurse = [&](auto&& self, std::size_t next) -> void {
    if (!current.empty()) {
      const std::uint64_t count = scan(current);
      if (count >= threshold) table.insert(current, count);
    }
    if (current.size() == params.max_len) return;
    for (std::size_t i = next; i < universe.size(); ++i) {
      current.push_back(universe[i]);
      self(self, i + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
  table.finish();
  return table;
}

}  // namespace mba
