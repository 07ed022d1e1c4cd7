#include "exstream/manifest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "exstream/errors.hpp"

namespace exstream {

namespace {

constexpr std::array<const char*, 6> kColumns = {"sample_id",   "row",         "split",
                                                 "class_label", "instance_id", "frame_index"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

struct Row {
  std::size_t line = 0;
  std::int64_t row = 0;
  Split split = Split::kTrain;
  std::string label;
  std::int64_t instance_id = 0;
  std::int64_t frame_index = 0;
};

}  // namespace

Dataset load_manifest(const std::filesystem::path& path, const FeatureMatrix& features,
                      const ManifestOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());

  const auto fail = [&](std::size_t line, const std::string& msg) -> ManifestError {
    return ManifestError(path.string() + ":" + std::to_string(line) + ": " + msg);
  };

  std::string line;
  if (!std::getline(in, line)) throw fail(1, "missing header");
  const auto header = split_csv_line(line);
  std::array<std::size_t, kColumns.size()> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return trim(h) == kColumns[c]; });
    if (it == header.end()) throw fail(1, std::string("header lacks column ") + kColumns[c]);
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size()) throw fail(line_no, "too few fields");
    const auto field = [&](std::size_t c) { return trim(fields[col[c]]); };

    Row r;
    r.line = line_no;
    const auto row = parse_int(field(1));
    if (!row || *row < 0) throw fail(line_no, "bad row index '" + field(1) + "'");
    if (static_cast<std::uint64_t>(*row) >= features.rows()) {
      throw fail(line_no, "row " + std::to_string(*row) + " out of range for " +
                              std::to_string(features.rows()) + "-row feature matrix");
    }
    r.row = *row;
    const auto split = field(2);
    if (split == "train") {
      r.split = Split::kTrain;
    } else if (split == "test") {
      r.split = Split::kTest;
    } else {
      throw fail(line_no, "split must be train or test, got '" + split + "'");
    }
    r.label = field(3);
    if (r.label.empty()) throw fail(line_no, "empty class label");
    const auto inst = parse_int(field(4));
    const auto frame = parse_int(field(5));
    if (!inst) throw fail(line_no, "bad instance_id '" + field(4) + "'");
    if (!frame || *frame < 0) throw fail(line_no, "bad frame_index '" + field(5) + "'");
    r.instance_id = *inst;
    r.frame_index = *frame;
    rows.push_back(std::move(r));
  }

  // Label mapping: dense integers pass through, anything else is mapped.
  const bool all_integer = std::all_of(rows.begin(), rows.end(), [](const Row& r) {
    return parse_int(r.label).has_value();
  });
  std::map<std::string, int> string_ids;
  std::map<std::int64_t, bool> int_labels;
  for (const auto& r : rows) {
    if (all_integer) {
      int_labels[*parse_int(r.label)] = true;
    } else {
      string_ids.emplace(r.label, 0);
    }
  }
  int num_classes = 0;
  if (all_integer) {
    std::int64_t expect = 0;
    for (const auto& [label, _] : int_labels) {
      if (label != expect) {
        throw ManifestError(path.string() + ": class labels must densely cover [0, K); missing " +
                            std::to_string(expect));
      }
      ++expect;
    }
    num_classes = static_cast<int>(expect);
  } else {
    for (auto& [label, id] : string_ids) id = num_classes++;
  }

  Dataset dataset;
  dataset.name = options.name.empty() ? path.stem().string() : options.name;
  dataset.num_classes = num_classes;
  dataset.dim = features.cols();
  for (const auto& r : rows) {
    LabeledSample s;
    const auto feat = features.row(static_cast<std::size_t>(r.row));
    s.features.assign(feat.begin(), feat.end());
    s.class_label = all_integer ? static_cast<int>(*parse_int(r.label)) : string_ids.at(r.label);
    s.instance_id = r.instance_id;
    s.frame_index = r.frame_index;
    s.split = r.split;
    (r.split == Split::kTrain ? dataset.train : dataset.test).push_back(std::move(s));
  }
  if (dataset.train.empty()) throw ManifestError(path.string() + ": no train rows");
  if (options.normalize) l2_normalize_in_place(dataset);
  try {
    validate_dataset(dataset);
  } catch (const DataError& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
  return dataset;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& features_path,
                   const std::filesystem::path& manifest_path) {
  const std::size_t n = dataset.train.size() + dataset.test.size();
  FeatureMatrix matrix(n, dataset.dim);
  std::ofstream manifest(manifest_path, std::ios::trunc);
  if (!manifest) throw DataError("cannot open " + manifest_path.string() + " for writing");
  manifest << "sample_id,row,split,class_label,instance_id,frame_index\n";
  std::size_t row = 0;
  for (const auto* split : {&dataset.train, &dataset.test}) {
    for (const auto& s : *split) {
      std::copy(s.features.begin(), s.features.end(), matrix.row(row).begin());
      manifest << row << ',' << row << ',' << (s.split == Split::kTrain ? "train" : "test") << ','
               << s.class_label << ',' << s.instance_id << ',' << s.frame_index << '\n';
      ++row;
    }
  }
  if (!manifest) throw DataError("write failed: " + manifest_path.string());
  write_feature_matrix(features_path, matrix);
}

}  // namespace exstream
