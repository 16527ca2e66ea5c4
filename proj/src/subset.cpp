#include "fastpd/subset.hpp"

#include <bit>
#include <stdexcept>

#include "fastpd/errors.hpp"

namespace fastpd {

namespace {
constexpr int kWordBits = 64;
}

FeatureSubset::FeatureSubset(std::initializer_list<int> indices) {
  for (int i : indices) set(i);
}

FeatureSubset FeatureSubset::single(int index) {
  FeatureSubset s;
  s.set(index);
  return s;
}

FeatureSubset FeatureSubset::full(int d) {
  FeatureSubset s;
  for (int i = 0; i < d; ++i) s.set(i);
  return s;
}

FeatureSubset FeatureSubset::from_indices(const std::vector<int>& indices) {
  FeatureSubset s;
  for (int i : indices) s.set(i);
  return s;
}

FeatureSubset FeatureSubset::from_local_mask(std::uint64_t mask,
                                             const std::vector<int>& features) {
  FeatureSubset s;
  while (mask != 0) {
    const int bit = std::countr_zero(mask);
    s.set(features.at(static_cast<std::size_t>(bit)));
    mask &= mask - 1;
  }
  return s;
}

void FeatureSubset::set(int index) {
  if (index < 0) throw ValidationError("feature index must be non-negative");
  const auto word = static_cast<std::size_t>(index / kWordBits);
  if (word >= words_.size()) words_.resize(word + 1, 0);
  words_[word] |= std::uint64_t{1} << (index % kWordBits);
}

void FeatureSubset::reset(int index) {
  if (index < 0) return;
  const auto word = static_cast<std::size_t>(index / kWordBits);
  if (word >= words_.size()) return;
  words_[word] &= ~(std::uint64_t{1} << (index % kWordBits));
  trim();
}

bool FeatureSubset::test(int index) const {
  if (index < 0) return false;
  const auto word = static_cast<std::size_t>(index / kWordBits);
  if (word >= words_.size()) return false;
  return (words_[word] >> (index % kWordBits)) & 1;
}

int FeatureSubset::count() const {
  int n = 0;
  for (std::uint64_t w : words_) n += std::popcount(w);
  return n;
}

int FeatureSubset::max_feature() const {
  if (words_.empty()) return -1;
  const std::size_t w = words_.size() - 1;
  return static_cast<int>(w) * kWordBits + (kWordBits - 1 - std::countl_zero(words_[w]));
}

bool FeatureSubset::is_subset_of(const FeatureSubset& other) const {
  if (words_.size() > other.words_.size()) {
    for (std::size_t w = other.words_.size(); w < words_.size(); ++w)
      if (words_[w] != 0) return false;
  }
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t w = 0; w < n; ++w)
    if ((words_[w] & ~other.words_[w]) != 0) return false;
  return true;
}

FeatureSubset FeatureSubset::operator&(const FeatureSubset& other) const {
  FeatureSubset out;
  const std::size_t n = std::min(words_.size(), other.words_.size());
  out.words_.resize(n);
  for (std::size_t w = 0; w < n; ++w) out.words_[w] = words_[w] & other.words_[w];
  out.trim();
  return out;
}

FeatureSubset FeatureSubset::operator|(const FeatureSubset& other) const {
  FeatureSubset out;
  const std::size_t n = std::max(words_.size(), other.words_.size());
  out.words_.resize(n, 0);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] |= words_[w];
  for (std::size_t w = 0; w < other.words_.size(); ++w) out.words_[w] |= other.words_[w];
  return out;
}

FeatureSubset FeatureSubset::minus(const FeatureSubset& other) const {
  FeatureSubset out = *this;
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t w = 0; w < n; ++w) out.words_[w] &= ~other.words_[w];
  out.trim();
  return out;
}

FeatureSubset FeatureSubset::complement(int d) const {
  return full(d).minus(*this);
}

std::vector<int> FeatureSubset::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits != 0) {
      out.push_back(static_cast<int>(w) * kWordBits + std::countr_zero(bits));
      bits &= bits - 1;
    }
  }
  return out;
}

std::vector<FeatureSubset> FeatureSubset::subsets() const {
  const int k = count();
  if (k > 24) throw BudgetError("refusing to enumerate 2^" + std::to_string(k) + " subsets");
  const std::vector<int> idx = indices();
  std::vector<FeatureSubset> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    FeatureSubset s;
    for (int b = 0; b < k; ++b)
      if ((mask >> b) & 1) s.set(idx[static_cast<std::size_t>(b)]);
    out.push_back(std::move(s));
  }
  return out;
}

bool FeatureSubset::operator<(const FeatureSubset& other) const {
  if (words_.size() != other.words_.size()) return words_.size() < other.words_.size();
  for (std::size_t w = words_.size(); w-- > 0;)
    if (words_[w] != other.words_[w]) return words_[w] < other.words_[w];
  return false;
}

std::size_t FeatureSubset::hash() const {
  // FNV-1a over the words.
  std::size_t h = 1469598103934665603ull;
  for (std::uint64_t w : words_) {
    h ^= static_cast<std::size_t>(w);
    h *= 1099511628211ull;
  }
  return h;
}

void FeatureSubset::trim() {
  while (!words_.empty() && words_.back() == 0) words_.pop_back();
}

bool subset_order_less(const FeatureSubset& a, const FeatureSubset& b) {
  const int ca = a.count(), cb = b.count();
  if (ca != cb) return ca < cb;
  return a.indices() < b.indices();
}

}  // namespace fastpd
