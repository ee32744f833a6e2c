#include "sumer/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "sumer/error.hpp"

namespace sumer {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string where(std::size_t row) { return "row " + std::to_string(row) + ": "; }

}  // namespace

Dataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty (missing header)");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = split_fields(line);
  std::vector<int> feature_of(header.size(), -1);
  int label_col = -1;
  std::size_t d = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name == opts.label_column) {
      if (label_col >= 0) throw ValidationError("duplicate label column");
      label_col = static_cast<int>(c);
      continue;
    }
    if (name.size() < 2 || name[0] != 'f') throw ValidationError("unexpected CSV column '" + std::string(name) + "'");
    int idx = -1;
    auto r = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
    if (r.ec != std::errc() || r.ptr != name.data() + name.size() || idx < 0)
      throw ValidationError("unexpected CSV column '" + std::string(name) + "'");
    feature_of[c] = idx;
    ++d;
  }
  if (d == 0) throw ValidationError("CSV has no feature columns");
  {
    std::vector<bool> present(d, false);
    for (int f : feature_of) {
      if (f < 0) continue;
      if (static_cast<std::size_t>(f) >= d || present[static_cast<std::size_t>(f)])
        throw ValidationError("feature columns must be exactly f0..f" + std::to_string(d - 1));
      present[static_cast<std::size_t>(f)] = true;
    }
  }

  std::vector<Instance> instances;
  std::vector<std::optional<int>> raw_labels;
  std::size_t row = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ValidationError(where(row) + "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    Instance inst;
    inst.id = instances.size();
    inst.features.assign(d, 0.0);
    std::optional<int> label;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = trim(fields[c]);
      if (static_cast<int>(c) == label_col) {
        if (f.empty()) continue;
        int v = 0;
        auto r = std::from_chars(f.data(), f.data() + f.size(), v);
        if (r.ec != std::errc() || r.ptr != f.data() + f.size() || v < 0)
          throw ValidationError(where(row) + "invalid label '" + std::string(f) + "'");
        if (opts.num_classes && v >= *opts.num_classes)
          throw ValidationError(where(row) + "label " + std::to_string(v) + " outside 0.." +
                                std::to_string(*opts.num_classes - 1));
        label = v;
        max_label = std::max(max_label, v);
        continue;
      }
      double v = 0.0;
      auto r = std::from_chars(f.data(), f.data() + f.size(), v);
      if (r.ec != std::errc() || r.ptr != f.data() + f.size())
        throw ValidationError(where(row) + "invalid number '" + std::string(f) + "'");
      if (!std::isfinite(v)) throw ValidationError(where(row) + "non-finite value '" + std::string(f) + "'");
      inst.features[static_cast<std::size_t>(feature_of[c])] = v;
    }
    instances.push_back(std::move(inst));
    raw_labels.push_back(label);
  }

  const int C = opts.num_classes ? *opts.num_classes : std::max(2, max_label + 1);
  std::vector<LabelRecord> labels;
  labels.reserve(raw_labels.size());
  for (const auto& l : raw_labels)
    labels.push_back(l ? LabelRecord::provided(*l, l) : LabelRecord::unlabeled(std::nullopt));
  return Dataset(std::move(instances), std::move(labels), C);
}

Dataset read_dataset_csv(const std::filesystem::path& path, const CsvReadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open " + path.string());
  return read_dataset_csv(in, opts);
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  bool any_label = false;
  for (const auto& l : dataset.labels())
    if (l.visible() || l.truth) any_label = true;
  const std::size_t d = dataset.dim();
  for (std::size_t f = 0; f < d; ++f) out << (f ? "," : "") << 'f' << f;
  if (any_label) out << (d ? "," : "") << "label";
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto x = dataset.features(i);
    for (std::size_t f = 0; f < d; ++f) out << (f ? "," : "") << format_double(x[f]);
    if (any_label) {
      out << ',';
      const auto& l = dataset.label(i);
      if (auto v = l.visible())
        out << *v;
      else if (l.truth)
        out << *l.truth;
    }
    out << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  write_dataset_csv(out, dataset);
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

}  // namespace sumer
