#include "freshrec/types.hpp"

#include <cmath>

namespace freshrec {

namespace {
constexpr double kNormTolerance = 1e-9;
}

void validate_event(const WatchEvent& e) {
  if (e.user_id.empty()) fail("event has empty user_id");
  if (e.item_id.empty()) fail("event has empty item_id");
  if (e.timestamp < 0) fail("event timestamp is negative");
  if (e.watch_duration_s < 0) fail("event watch_duration_s is negative");
  if (!(e.completion_fraction >= 0.0 && e.completion_fraction <= 1.0)) {
    fail("event completion_fraction outside [0,1]");
  }
}

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Catalog::Catalog(int genre_count) : genre_count_(genre_count) {
  if (genre_count < 2) fail("catalog genre_count must be >= 2");
}

void Catalog::add(Item item) {
  if (item.item_id.empty()) fail("item has empty item_id");
  if (static_cast<int>(item.genre_vector.size()) != genre_count_) {
    fail("item '" + item.item_id + "' genre_vector dimension mismatch");
  }
  bool any_positive = false;
  for (double g : item.genre_vector) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      fail("item '" + item.item_id + "' has a negative or non-finite genre entry");
    }
    if (g > 0.0) any_positive = true;
  }
  if (!any_positive) fail("item '" + item.item_id + "' has an all-zero genre_vector");
  if (std::abs(l2_norm(item.genre_vector) - 1.0) > kNormTolerance) {
    fail("item '" + item.item_id + "' genre_vector is not unit length");
  }
  auto [it, inserted] = index_.emplace(item.item_id, items_.size());
  if (!inserted) fail("duplicate item_id '" + item.item_id + "'");
  items_.push_back(std::move(item));
}

const Item* Catalog::find(const ItemId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Item& Catalog::at(const ItemId& id) const {
  const Item* item = find(id);
  if (!item) fail("unknown item_id '" + id + "'");
  return *item;
}

}  // namespace freshrec
