#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace hdp {

/// Fixed-width bitset over the disparity range [0, d_max].
///
/// Word-level helpers operate on raw spans so that forests can keep one flat
/// array of words for all of their trees.
class DisparitySet {
 public:
  using Word = std::uint64_t;
  static constexpr int kWordBits = 64;

  static std::size_t words_for(int d_max) { return static_cast<std::size_t>(d_max) / kWordBits + 1; }

  DisparitySet() = default;
  explicit DisparitySet(int d_max) : d_max_(d_max), words_(words_for(d_max), 0) {}
  DisparitySet(int d_max, std::initializer_list<int> values) : DisparitySet(d_max) {
    for (int v : values) insert(v);
  }

  static DisparitySet full(int d_max) {
    DisparitySet s(d_max);
    for (int d = 0; d <= d_max; ++d) s.insert(d);
    return s;
  }
  static DisparitySet from_values(int d_max, std::span<const int> values) {
    DisparitySet s(d_max);
    for (int v : values) s.insert(v);
    return s;
  }

  int d_max() const { return d_max_; }
  void insert(int d) { words_[static_cast<std::size_t>(d) / kWordBits] |= Word{1} << (d % kWordBits); }
  bool contains(int d) const {
    return d >= 0 && d <= d_max_ && (words_[static_cast<std::size_t>(d) / kWordBits] >> (d % kWordBits)) & 1U;
  }
  bool empty() const {
    for (Word w : words_)
      if (w) return false;
    return true;
  }
  int size() const { return popcount(words_); }

  std::span<const Word> words() const { return words_; }
  std::span<Word> words() { return words_; }

  /// Members in ascending order.
  std::vector<int> values() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    append_values(words_, out);
    return out;
  }

  DisparitySet& operator|=(const DisparitySet& other) {
    unite(words_, other.words_);
    return *this;
  }

  friend bool operator==(const DisparitySet&, const DisparitySet&) = default;

  static int popcount(std::span<const Word> a) {
    int n = 0;
    for (Word w : a) n += std::popcount(w);
    return n;
  }
  static bool intersects(std::span<const Word> a, std::span<const Word> b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] & b[i]) return true;
    return false;
  }
  static int intersection_size(std::span<const Word> a, std::span<const Word> b) {
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += std::popcount(a[i] & b[i]);
    return n;
  }
  static int union_size(std::span<const Word> a, std::span<const Word> b) {
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += std::popcount(a[i] | b[i]);
    return n;
  }
  static void unite(std::span<Word> into, std::span<const Word> from) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] |= from[i];
  }
  static void append_values(std::span<const Word> a, std::vector<int>& out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      Word w = a[i];
      while (w) {
        out.push_back(static_cast<int>(i) * kWordBits + std::countr_zero(w));
        w &= w - 1;
      }
    }
  }

 private:
  int d_max_ = -1;
  std::vector<Word> words_;
};

}  // namespace hdp
