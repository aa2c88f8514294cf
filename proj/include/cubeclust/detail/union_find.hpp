#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace cubeclust {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    std::size_t r = x;
    while (parent_[r] != r) r = parent_[r];
    while (parent_[x] != r) {
      const std::size_t nxt = parent_[x];
      parent_[x] = r;
      x = nxt;
    }
    return r;
  }

  // Returns false if already joined. The surviving root is the larger set's
  // root (ties keep the smaller index) but callers must not rely on which
  // root survives; canonical ids come from smallest members at readout.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }
  std::size_t set_size(std::size_t a) { return size_[find(a)]; }
  std::size_t universe() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace cubeclust
