#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "freshrec/error.hpp"

namespace freshrec {

// Identifiers are opaque tokens; nothing in the system interprets them.
using UserId = std::string;
using ItemId = std::string;

// One user-item interaction on the simulated clock. The atomic unit flowing
// through both the batch and the real-time pipeline.
struct WatchEvent {
  UserId user_id;
  ItemId item_id;
  std::int64_t timestamp = 0;       // seconds since simulated epoch
  std::int64_t watch_duration_s = 0;
  double completion_fraction = 0.0;  // in [0, 1]
};

// Throws Error when a field violates its range.
void validate_event(const WatchEvent& e);

struct Item {
  ItemId item_id;
  std::vector<double> genre_vector;  // unit L2 norm, at least one entry > 0
  std::int64_t release_day = 0;      // day index, may be negative (pre-epoch)
};

double l2_norm(const std::vector<double>& v);

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(int genre_count);

  // Validates dimension, unit norm and id uniqueness before accepting.
  void add(Item item);

  const Item* find(const ItemId& id) const;
  const Item& at(const ItemId& id) const;  // Error naming the id when absent

  const std::vector<Item>& items() const { return items_; }
  int genre_count() const { return genre_count_; }
  std::size_t size() const { return items_.size(); }

 private:
  int genre_count_ = 0;
  std::vector<Item> items_;  // insertion order, stable for serialization
  std::unordered_map<ItemId, std::size_t> index_;
};

}  // namespace freshrec
