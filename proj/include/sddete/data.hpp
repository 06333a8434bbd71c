#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sddete/ptable.hpp"

namespace sddete {

struct LabeledPoint {
  std::vector<double> features;
  int label = 0;  // 0 or 1; 1 is the positive (minority) class by convention

  bool operator==(const LabeledPoint&) const = default;
};

struct ClassStats {
  std::array<std::size_t, 2> count_per_class{0, 0};
  int majority = 0;
  int minority = 1;
  double ir = 1.0;         // count(majority) / count(minority)
  bool ir_infinite = false;  // set when one class is absent

  std::size_t count(int cls) const { return count_per_class[cls]; }
  std::size_t total() const { return count_per_class[0] + count_per_class[1]; }
};

// Counts labels and derives the imbalance ratio. Ties make class 0 the
// majority. Throws ParameterError on an empty table.
ClassStats class_stats(const PTable<LabeledPoint>& data);

// CSV ingestion. label_column is either a header name (requires a header
// row) or a 0-based column index given as digits. Cells equal to
// positive_label map to 1, the single other label value to 0; more than two
// distinct label values is an error. Every feature cell must parse as a
// finite double; failures report the 1-based row and column. Rows must all
// have the same width.
PTable<LabeledPoint> load_csv(const std::filesystem::path& path,
                              const std::string& label_column,
                              const std::string& positive_label,
                              std::size_t partition_count = kDefaultPartitionCount);

// Sparse "label idx:value ..." lines densified to max feature index width.
PTable<LabeledPoint> load_libsvm(const std::filesystem::path& path,
                                 const std::string& positive_label,
                                 std::size_t partition_count = kDefaultPartitionCount);

// Label-free CSV: every column is a feature, labels are set to 0. A header
// row is detected by any cell of the first row failing to parse.
PTable<LabeledPoint> load_csv_features(const std::filesystem::path& path,
                                       std::size_t partition_count = kDefaultPartitionCount);

// Writes header f0..f{T-1},label and one row per record in global order.
// Feature values are printed with shortest round-trip precision, so
// load_csv(write_csv(t)) reproduces t exactly.
void write_csv(const PTable<LabeledPoint>& data, const std::filesystem::path& path);

struct FoldSpec {
  int k = 0;
  std::vector<int> assignments;  // fold id per global record index

  bool operator==(const FoldSpec&) const = default;
};

// Stratified k-fold assignment: each class's records are shuffled with a
// seed-derived stream and dealt round-robin, so per-class fold counts
// differ by at most one. Requires k >= 2 and at least k members per class.
FoldSpec stratified_kfold(const PTable<LabeledPoint>& data, int k, std::uint64_t seed);

// (train, test) tables for one fold; test keeps fold == fold records.
std::pair<PTable<LabeledPoint>, PTable<LabeledPoint>> split_fold(
    const PTable<LabeledPoint>& data, const FoldSpec& spec, int fold);

void save_folds(const FoldSpec& spec, const std::filesystem::path& path);
FoldSpec load_folds(const std::filesystem::path& path);

// Two spherical unit-variance Gaussians: majority (label 0) at the origin,
// minority (label 1) at (separation, 0, ..., 0), minority count
// round(n / (1 + ir)). Majority records come first in global order.
PTable<LabeledPoint> synth_two_gaussian(std::size_t n, double ir, std::size_t dims,
                                        double separation, std::uint64_t seed);

// Like synth_two_gaussian but the minority mass is split evenly across
// `modes` sub-Gaussians whose centers are spread along the second axis
// with the given spacing. Requires dims >= 2 when modes > 1.
PTable<LabeledPoint> synth_clustered_minority(std::size_t n, double ir,
                                              std::size_t dims, double separation,
                                              std::size_t modes, double mode_spread,
                                              std::uint64_t seed);

}  // namespace sddete
