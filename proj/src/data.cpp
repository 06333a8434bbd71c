#include "sddete/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sddete/errors.hpp"
#include "sddete/rng.hpp"

namespace sddete {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.emplace_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

void shortest_double(double v, std::string& out) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

// Maps raw label strings to {0,1}: positive_label becomes 1, the single
// other distinct value becomes 0.
class LabelMapper {
 public:
  explicit LabelMapper(std::string positive) : positive_(std::move(positive)) {}

  int map(const std::string& raw, std::size_t row) {
    if (raw == positive_) return 1;
    if (!have_negative_) {
      negative_ = raw;
      have_negative_ = true;
      return 0;
    }
    if (raw != negative_)
      throw DataError("row " + std::to_string(row) + ": third label value '" + raw +
                      "' (already saw '" + negative_ + "' and positive '" + positive_ + "')");
    return 0;
  }

 private:
  std::string positive_;
  std::string negative_;
  bool have_negative_ = false;
};

}  // namespace

ClassStats class_stats(const PTable<LabeledPoint>& data) {
  if (data.empty()) throw ParameterError("class_stats: empty table");
  using Counts = std::array<std::size_t, 2>;
  Counts counts = preduce(
      data, Counts{0, 0},
      [](const std::vector<LabeledPoint>& part) {
        Counts c{0, 0};
        for (const auto& r : part) {
          if (r.label != 0 && r.label != 1)
            throw DataError("class_stats: label out of range: " + std::to_string(r.label));
          ++c[r.label];
        }
        return c;
      },
      [](Counts a, Counts b) {
        return Counts{a[0] + b[0], a[1] + b[1]};
      });

  ClassStats s;
  s.count_per_class = counts;
  s.majority = counts[1] > counts[0] ? 1 : 0;
  s.minority = 1 - s.majority;
  if (counts[s.minority] == 0) {
    s.ir = std::numeric_limits<double>::infinity();
    s.ir_infinite = true;
  } else {
    s.ir = static_cast<double>(counts[s.majority]) / static_cast<double>(counts[s.minority]);
  }
  return s;
}

PTable<LabeledPoint> load_csv(const std::filesystem::path& path,
                              const std::string& label_column,
                              const std::string& positive_label,
                              std::size_t partition_count) {
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty file: " + path.string());

  auto first = split_csv_line(lines[0]);
  std::size_t width = first.size();
  if (width < 2) throw DataError("need at least one feature column and a label column");

  std::size_t label_idx = 0;
  bool has_header = false;
  if (all_digits(label_column)) {
    label_idx = std::stoul(label_column);
    if (label_idx >= width)
      throw DataError("label column index " + label_column + " out of range, row width is " +
                      std::to_string(width));
    // Header detection: the first row is a header iff some non-label cell
    // is not numeric.
    for (std::size_t c = 0; c < width; ++c) {
      double v;
      if (c != label_idx && !parse_double(first[c], v)) {
        has_header = true;
        break;
      }
    }
  } else {
    auto it = std::find(first.begin(), first.end(), label_column);
    if (it == first.end())
      throw DataError("label column '" + label_column + "' not found in header");
    label_idx = static_cast<std::size_t>(it - first.begin());
    has_header = true;
  }

  LabelMapper mapper(positive_label);
  std::vector<LabeledPoint> records;
  records.reserve(lines.size());
  for (std::size_t li = has_header ? 1 : 0; li < lines.size(); ++li) {
    auto cells = split_csv_line(lines[li]);
    std::size_t row = li + 1;  // 1-based, counting the header
    if (cells.size() != width)
      throw DataError("row " + std::to_string(row) + ": has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(width));
    LabeledPoint p;
    p.features.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_idx) continue;
      double v;
      if (!parse_double(cells[c], v))
        throw DataError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                        ": cannot parse '" + cells[c] + "' as a finite number");
      p.features.push_back(v);
    }
    p.label = mapper.map(cells[label_idx], row);
    records.push_back(std::move(p));
  }
  if (records.empty()) throw DataError("no data rows in " + path.string());
  return PTable<LabeledPoint>::from_records(std::move(records), partition_count);
}

PTable<LabeledPoint> load_libsvm(const std::filesystem::path& path,
                                 const std::string& positive_label,
                                 std::size_t partition_count) {
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty file: " + path.string());

  LabelMapper mapper(positive_label);
  std::vector<int> labels;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::size_t max_index = 0;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::istringstream ss(lines[li]);
    std::string token;
    if (!(ss >> token))
      throw DataError("row " + std::to_string(li + 1) + ": missing label");
    labels.push_back(mapper.map(token, li + 1));
    std::vector<std::pair<std::size_t, double>> entries;
    while (ss >> token) {
      auto colon = token.find(':');
      if (colon == std::string::npos)
        throw DataError("row " + std::to_string(li + 1) + ": bad entry '" + token + "'");
      std::size_t idx = 0;
      double v = 0;
      try {
        idx = std::stoul(token.substr(0, colon));
      } catch (const std::exception&) {
        throw DataError("row " + std::to_string(li + 1) + ": bad index in '" + token + "'");
      }
      if (idx == 0 || !parse_double(token.substr(colon + 1), v))
        throw DataError("row " + std::to_string(li + 1) + ": bad entry '" + token + "'");
      entries.emplace_back(idx, v);
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(entries));
  }
  if (max_index == 0) throw DataError("no feature entries in " + path.string());

  std::vector<LabeledPoint> records(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    records[i].features.assign(max_index, 0.0);
    for (auto& [idx, v] : rows[i]) records[i].features[idx - 1] = v;
    records[i].label = labels[i];
  }
  return PTable<LabeledPoint>::from_records(std::move(records), partition_count);
}

PTable<LabeledPoint> load_csv_features(const std::filesystem::path& path,
                                       std::size_t partition_count) {
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty file: " + path.string());
  auto first = split_csv_line(lines[0]);
  std::size_t width = first.size();
  bool has_header = false;
  for (const auto& cell : first) {
    double v;
    if (!parse_double(cell, v)) {
      has_header = true;
      break;
    }
  }
  std::vector<LabeledPoint> records;
  records.reserve(lines.size());
  for (std::size_t li = has_header ? 1 : 0; li < lines.size(); ++li) {
    auto cells = split_csv_line(lines[li]);
    std::size_t row = li + 1;
    if (cells.size() != width)
      throw DataError("row " + std::to_string(row) + ": has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(width));
    LabeledPoint p;
    p.features.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      double v;
      if (!parse_double(cells[c], v))
        throw DataError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                        ": cannot parse '" + cells[c] + "' as a finite number");
      p.features.push_back(v);
    }
    records.push_back(std::move(p));
  }
  if (records.empty()) throw DataError("no data rows in " + path.string());
  return PTable<LabeledPoint>::from_records(std::move(records), partition_count);
}

void write_csv(const PTable<LabeledPoint>& data, const std::filesystem::path& path) {
  if (data.empty()) throw ParameterError("write_csv: empty table");
  std::size_t arity = data.global_at(0).features.size();
  std::string out;
  for (std::size_t j = 0; j < arity; ++j) {
    out += "f" + std::to_string(j);
    out += ',';
  }
  out += "label\n";
  for (std::size_t q = 0; q < data.partition_count(); ++q) {
    for (const auto& r : data.partition(q)) {
      if (r.features.size() != arity)
        throw ShapeError("write_csv: records have differing arity");
      for (double v : r.features) {
        shortest_double(v, out);
        out += ',';
      }
      out += std::to_string(r.label);
      out += '\n';
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PersistenceError("cannot open for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw PersistenceError("write failed: " + path.string());
}

FoldSpec stratified_kfold(const PTable<LabeledPoint>& data, int k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("stratified_kfold: k must be at least 2");
  ClassStats stats = class_stats(data);
  for (int cls = 0; cls < 2; ++cls) {
    if (stats.count(cls) < static_cast<std::size_t>(k))
      throw DataError("stratified_kfold: class " + std::to_string(cls) + " has " +
                      std::to_string(stats.count(cls)) + " records, fewer than k=" +
                      std::to_string(k));
  }

  std::vector<std::size_t> by_class[2];
  {
    std::size_t i = 0;
    for (std::size_t q = 0; q < data.partition_count(); ++q)
      for (const auto& r : data.partition(q)) by_class[r.label].push_back(i++);
  }

  FoldSpec spec;
  spec.k = k;
  spec.assignments.assign(data.size(), 0);
  for (int cls = 0; cls < 2; ++cls) {
    auto& idx = by_class[cls];
    RngStream rng = substream(seed, static_cast<std::uint64_t>(cls), "fold-shuffle");
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    for (std::size_t pos = 0; pos < idx.size(); ++pos)
      spec.assignments[idx[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return spec;
}

std::pair<PTable<LabeledPoint>, PTable<LabeledPoint>> split_fold(
    const PTable<LabeledPoint>& data, const FoldSpec& spec, int fold) {
  if (spec.assignments.size() != data.size())
    throw ShapeError("split_fold: assignment length differs from table size");
  if (fold < 0 || fold >= spec.k) throw ParameterError("split_fold: fold out of range");

  std::vector<std::vector<LabeledPoint>> train(data.partition_count());
  std::vector<std::vector<LabeledPoint>> test(data.partition_count());
  std::size_t i = 0;
  for (std::size_t q = 0; q < data.partition_count(); ++q) {
    for (const auto& r : data.partition(q)) {
      if (spec.assignments[i++] == fold)
        test[q].push_back(r);
      else
        train[q].push_back(r);
    }
  }
  return {PTable<LabeledPoint>(std::move(train)), PTable<LabeledPoint>(std::move(test))};
}

void save_folds(const FoldSpec& spec, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["k"] = spec.k;
  doc["assignments"] = spec.assignments;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PersistenceError("cannot open for writing: " + path.string());
  f << doc.dump();
  if (!f) throw PersistenceError("write failed: " + path.string());
}

FoldSpec load_folds(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PersistenceError("cannot open: " + path.string());
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("bad fold file " + path.string() + ": " + e.what());
  }
  try {
    if (doc.at("version").get<int>() != 1)
      throw PersistenceError("unsupported fold file version in " + path.string());
    FoldSpec spec;
    spec.k = doc.at("k").get<int>();
    spec.assignments = doc.at("assignments").get<std::vector<int>>();
    if (spec.k < 2) throw PersistenceError("fold file k out of range in " + path.string());
    for (int a : spec.assignments)
      if (a < 0 || a >= spec.k)
        throw PersistenceError("fold assignment out of range in " + path.string());
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("bad fold file " + path.string() + ": " + e.what());
  }
}

namespace {

void append_gaussian(std::vector<LabeledPoint>& out, std::size_t count,
                     const std::vector<double>& mean, int label, RngStream& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    LabeledPoint p;
    p.features.resize(mean.size());
    for (std::size_t d = 0; d < mean.size(); ++d) p.features[d] = mean[d] + rng.normal();
    p.label = label;
    out.push_back(std::move(p));
  }
}

std::size_t minority_count(std::size_t n, double ir) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) / (1.0 + ir)));
}

}  // namespace

PTable<LabeledPoint> synth_two_gaussian(std::size_t n, double ir, std::size_t dims,
                                        double separation, std::uint64_t seed) {
  if (ir < 1.0) throw ParameterError("synth_two_gaussian: ir must be >= 1");
  if (dims == 0) throw ParameterError("synth_two_gaussian: dims must be positive");
  std::size_t minority = minority_count(n, ir);
  if (minority == 0 || minority >= n)
    throw ParameterError("synth_two_gaussian: n and ir give an empty class");
  std::size_t majority = n - minority;

  std::vector<LabeledPoint> records;
  records.reserve(n);
  std::vector<double> mean0(dims, 0.0);
  std::vector<double> mean1(dims, 0.0);
  mean1[0] = separation;
  RngStream rng0 = substream(seed, 0, "majority");
  RngStream rng1 = substream(seed, 1, "minority");
  append_gaussian(records, majority, mean0, 0, rng0);
  append_gaussian(records, minority, mean1, 1, rng1);
  return PTable<LabeledPoint>::from_records(std::move(records));
}

PTable<LabeledPoint> synth_clustered_minority(std::size_t n, double ir,
                                              std::size_t dims, double separation,
                                              std::size_t modes, double mode_spread,
                                              std::uint64_t seed) {
  if (ir < 1.0) throw ParameterError("synth_clustered_minority: ir must be >= 1");
  if (modes == 0) throw ParameterError("synth_clustered_minority: modes must be positive");
  if (dims < 2 && modes > 1)
    throw ParameterError("synth_clustered_minority: dims must be >= 2 for multiple modes");
  std::size_t minority = minority_count(n, ir);
  if (minority < modes || minority >= n)
    throw ParameterError("synth_clustered_minority: too few minority records for modes");
  std::size_t majority = n - minority;

  std::vector<LabeledPoint> records;
  records.reserve(n);
  std::vector<double> mean0(dims, 0.0);
  RngStream rng0 = substream(seed, 0, "majority");
  append_gaussian(records, majority, mean0, 0, rng0);

  RngStream rng1 = substream(seed, 1, "minority");
  std::size_t base = minority / modes;
  std::size_t extra = minority % modes;
  for (std::size_t m = 0; m < modes; ++m) {
    std::vector<double> mean(dims, 0.0);
    mean[0] = separation;
    if (modes > 1)
      mean[1] = mode_spread * (static_cast<double>(m) - (static_cast<double>(modes) - 1.0) / 2.0);
    append_gaussian(records, base + (m < extra ? 1 : 0), mean, 1, rng1);
  }
  return PTable<LabeledPoint>::from_records(std::move(records));
}

}  // namespace sddete
