#pragma once

#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "sddete/errors.hpp"
#include "sddete/parallel.hpp"
#include "sddete/rng.hpp"

namespace sddete {

inline constexpr std::size_t kDefaultPartitionCount = 8;

// Deterministic partitioned collection. Records live in ordered partitions;
// the global order is partition 0's records, then partition 1's, and so on.
// Every operation below is a pure function of its inputs, so results never
// depend on worker count or scheduling.
template <typename T>
class PTable {
 public:
  PTable() = default;

  explicit PTable(std::vector<std::vector<T>> partitions)
      : parts_(std::move(partitions)) {}

  // Splits records into `partition_count` contiguous blocks of near-equal
  // size (earlier blocks take the remainder). Keeping blocks contiguous
  // makes the global order equal the input order, which ingestion and
  // serialization rely on.
  static PTable from_records(std::vector<T> records,
                             std::size_t partition_count = kDefaultPartitionCount) {
    if (partition_count == 0)
      throw ParameterError("PTable: partition count must be positive");
    std::vector<std::vector<T>> parts(partition_count);
    std::size_t n = records.size();
    std::size_t base = n / partition_count;
    std::size_t extra = n % partition_count;
    std::size_t pos = 0;
    for (std::size_t q = 0; q < partition_count; ++q) {
      std::size_t len = base + (q < extra ? 1 : 0);
      parts[q].reserve(len);
      for (std::size_t i = 0; i < len; ++i) parts[q].push_back(std::move(records[pos++]));
    }
    return PTable(std::move(parts));
  }

  std::size_t partition_count() const { return parts_.size(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& p : parts_) n += p.size();
    return n;
  }

  bool empty() const { return size() == 0; }

  const std::vector<T>& partition(std::size_t q) const { return parts_[q]; }

  // Record at global index i; O(partition_count) scan.
  const T& global_at(std::size_t i) const {
    for (const auto& p : parts_) {
      if (i < p.size()) return p[i];
      i -= p.size();
    }
    throw ParameterError("PTable: global index out of range");
  }

  // All records in global order.
  std::vector<T> to_records() const {
    std::vector<T> out;
    out.reserve(size());
    for (const auto& p : parts_)
      for (const auto& r : p) out.push_back(r);
    return out;
  }

  bool operator==(const PTable& other) const { return parts_ == other.parts_; }

 private:
  std::vector<std::vector<T>> parts_;
};

// Applies f to every record, preserving partition structure and order.
// If applications throw, the error of the lowest-global-index record is
// rethrown unchanged once all partitions have finished.
template <typename T, typename F>
auto pmap(const PTable<T>& t, F f) -> PTable<std::invoke_result_t<F, const T&>> {
  using U = std::invoke_result_t<F, const T&>;
  std::vector<std::vector<U>> parts(t.partition_count());
  parallel::parallel_for(t.partition_count(), [&](std::size_t q) {
    const auto& in = t.partition(q);
    auto& out = parts[q];
    out.reserve(in.size());
    for (const auto& r : in) out.push_back(f(r));
  });
  return PTable<U>(std::move(parts));
}

// Concatenates partition lists; a's records precede b's in global order.
template <typename T>
PTable<T> punion(const PTable<T>& a, const PTable<T>& b) {
  std::vector<std::vector<T>> parts;
  parts.reserve(a.partition_count() + b.partition_count());
  for (std::size_t q = 0; q < a.partition_count(); ++q) parts.push_back(a.partition(q));
  for (std::size_t q = 0; q < b.partition_count(); ++q) parts.push_back(b.partition(q));
  return PTable<T>(std::move(parts));
}

// Pairs records positionally. Partition structures must align exactly.
template <typename A, typename B>
PTable<std::pair<A, B>> pzip(const PTable<A>& a, const PTable<B>& b) {
  if (a.partition_count() != b.partition_count())
    throw ShapeError("pzip: partition counts differ");
  for (std::size_t q = 0; q < a.partition_count(); ++q)
    if (a.partition(q).size() != b.partition(q).size())
      throw ShapeError("pzip: partition lengths differ");
  std::vector<std::vector<std::pair<A, B>>> parts(a.partition_count());
  parallel::parallel_for(a.partition_count(), [&](std::size_t q) {
    const auto& pa = a.partition(q);
    const auto& pb = b.partition(q);
    auto& out = parts[q];
    out.reserve(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) out.emplace_back(pa[i], pb[i]);
  });
  return PTable<std::pair<A, B>>(std::move(parts));
}

// Keeps records satisfying pred, preserving partition count and order.
template <typename T, typename Pred>
PTable<T> pfilter(const PTable<T>& t, Pred pred) {
  std::vector<std::vector<T>> parts(t.partition_count());
  parallel::parallel_for(t.partition_count(), [&](std::size_t q) {
    for (const auto& r : t.partition(q))
      if (pred(r)) parts[q].push_back(r);
  });
  return PTable<T>(std::move(parts));
}

// Redistributes into p contiguous blocks of the global order.
template <typename T>
PTable<T> repartition(const PTable<T>& t, std::size_t p) {
  return PTable<T>::from_records(t.to_records(), p);
}

// Seeded redistribution: record at global index i goes to partition
// mix64(seed ^ i) % p; within a partition records keep ascending global
// index, so the layout is a pure function of (table, p, seed).
template <typename T>
PTable<T> repartition(const PTable<T>& t, std::size_t p, std::uint64_t seed) {
  if (p == 0) throw ParameterError("repartition: partition count must be positive");
  std::vector<std::vector<T>> parts(p);
  std::size_t i = 0;
  for (std::size_t q = 0; q < t.partition_count(); ++q)
    for (const auto& r : t.partition(q)) parts[mix64(seed ^ i++) % p].push_back(r);
  return PTable<T>(std::move(parts));
}

// Per-partition reduction with a deterministic combine order: partials are
// computed in parallel, then folded in ascending partition index.
template <typename T, typename Acc, typename PartFn, typename CombineFn>
Acc preduce(const PTable<T>& t, Acc init, PartFn per_partition, CombineFn combine) {
  std::vector<Acc> partials(t.partition_count());
  parallel::parallel_for(t.partition_count(), [&](std::size_t q) {
    partials[q] = per_partition(t.partition(q));
  });
  Acc acc = std::move(init);
  for (std::size_t q = 0; q < t.partition_count(); ++q)
    acc = combine(std::move(acc), std::move(partials[q]));
  return acc;
}

}  // namespace sddete
