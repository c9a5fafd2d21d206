#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace symclust {

/// Dense ordinal of an interned identifier. The tag keeps disorder and
/// symptom ordinals from being mixed up at compile time.
template <typename Tag>
struct Ordinal {
  std::uint32_t index = 0;

  constexpr Ordinal() = default;
  constexpr explicit Ordinal(std::uint32_t i) : index(i) {}
  constexpr explicit Ordinal(std::size_t i) : index(static_cast<std::uint32_t>(i)) {}

  friend constexpr auto operator<=>(Ordinal, Ordinal) = default;
};

struct DisorderTag {};
struct SymptomTag {};

using DisorderId = Ordinal<DisorderTag>;
using SymptomId = Ordinal<SymptomTag>;

/// Fixed-universe set of ordinals backed by a bitset.
///
/// All sets built against one knowledge base share the same universe size,
/// so the binary set operations below require equal sizes.
template <typename Tag>
class IdSet {
 public:
  using id_type = Ordinal<Tag>;

  IdSet() = default;
  explicit IdSet(std::size_t universe) : bits_(universe) {}
  IdSet(std::size_t universe, std::initializer_list<id_type> ids) : bits_(universe) {
    for (auto id : ids) insert(id);
  }

  std::size_t universe() const { return bits_.size(); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  bool contains(id_type id) const { return id.index < bits_.size() && bits_.test(id.index); }
  void insert(id_type id) { bits_.set(id.index); }
  void erase(id_type id) { bits_.reset(id.index); }
  void toggle(id_type id) { bits_.flip(id.index); }

  bool is_subset_of(const IdSet& other) const { return bits_.is_subset_of(other.bits_); }
  bool is_proper_subset_of(const IdSet& other) const { return bits_.is_proper_subset_of(other.bits_); }
  bool intersects(const IdSet& other) const { return bits_.intersects(other.bits_); }

  IdSet& operator&=(const IdSet& o) { bits_ &= o.bits_; return *this; }
  IdSet& operator|=(const IdSet& o) { bits_ |= o.bits_; return *this; }
  IdSet& operator-=(const IdSet& o) { bits_ -= o.bits_; return *this; }
  friend IdSet operator&(IdSet a, const IdSet& b) { return a &= b; }
  friend IdSet operator|(IdSet a, const IdSet& b) { return a |= b; }
  friend IdSet operator-(IdSet a, const IdSet& b) { return a -= b; }

  IdSet complement() const {
    IdSet out = *this;
    out.bits_.flip();
    return out;
  }

  /// Members in ascending ordinal order.
  std::vector<id_type> members() const {
    std::vector<id_type> out;
    out.reserve(size());
    for_each([&](id_type id) { out.push_back(id); });
    return out;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i)) {
      f(id_type(static_cast<std::uint32_t>(i)));
    }
  }

  friend bool operator==(const IdSet& a, const IdSet& b) { return a.bits_ == b.bits_; }

  /// Lexicographic order on the ascending member sequence.
  friend bool operator<(const IdSet& a, const IdSet& b) {
    auto ma = a.members();
    auto mb = b.members();
    return ma < mb;
  }

 private:
  boost::dynamic_bitset<> bits_;
};

using DisorderSet = IdSet<DisorderTag>;
using SymptomSet = IdSet<SymptomTag>;

}  // namespace symclust
