#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "c3bv/core.hpp"

namespace c3bv {

/// Sparse (user, item, rating) triples with dense 0-based re-indexing in
/// order of first appearance. At most one triple per (user, item) pair: the
/// one with the latest timestamp, the later line on equal timestamps.
class RatingTable {
 public:
  struct Triple {
    int user;
    int item;
    double rating;
    std::optional<std::int64_t> timestamp;
  };

  /// Adds a raw record; returns false if it replaced an older rating.
  bool add(const std::string& user_id, const std::string& item_id, double rating,
           std::optional<std::int64_t> timestamp);

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
  int num_users() const noexcept { return static_cast<int>(user_ids_.size()); }
  int num_items() const noexcept { return static_cast<int>(item_ids_.size()); }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

 private:
  static int intern(const std::string& id, std::vector<std::string>& ids,
                    std::unordered_map<std::string, int>& index);

  std::vector<Triple> triples_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, int> user_index_;
  std::unordered_map<std::string, int> item_index_;
  std::unordered_map<std::uint64_t, std::size_t> pair_index_;
};

/// MovieLens u.data: tab-separated user, item, rating, timestamp.
RatingTable parse_movielens(const std::filesystem::path& path);

/// Amazon 5-core: one JSON object per line with reviewerID, asin, overall,
/// unixReviewTime.
RatingTable parse_amazon_5core(const std::filesystem::path& path);

/// Portable CSV form: user_id,item_id,rating,timestamp (empty when absent).
void write_rating_table(const RatingTable& table, const std::filesystem::path& path);
RatingTable read_rating_table(const std::filesystem::path& path);

}  // namespace c3bv
