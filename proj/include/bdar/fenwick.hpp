#pragma once

#include <cstdint>
#include <vector>

namespace bdar {

// Binary indexed tree over nonnegative integer weights. find_kth locates the
// position holding the k-th unit of mass in index order, which is how a
// uniform departure slot is mapped onto the canonical call list.
class FenwickTree {
 public:
  FenwickTree() = default;
  explicit FenwickTree(std::size_t size) : tree_(size + 1, 0) {
    top_bit_ = 1;
    while (top_bit_ * 2 <= size) top_bit_ *= 2;
  }

  std::size_t size() const { return tree_.empty() ? 0 : tree_.size() - 1; }

  void add(std::size_t index, std::int64_t delta) {
    for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  /// Sum of weights at positions [0, index).
  std::int64_t prefix(std::size_t index) const {
    std::int64_t s = 0;
    for (std::size_t i = index; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  /// Position p with prefix(p) < k <= prefix(p + 1), for 1 <= k <= total.
  std::size_t find_kth(std::int64_t k) const {
    std::size_t pos = 0;
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] < k) {
        pos = next;
        k -= tree_[next];
      }
    }
    return pos;
  }

 private:
  std::vector<std::int64_t> tree_;
  std::size_t top_bit_ = 0;
};

}  // namespace bdar
