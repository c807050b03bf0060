#include "cacl/datamodel.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "binary_io.hpp"

namespace cacl {

std::string to_string(Domain d) { return d == Domain::Source ? "source" : "target"; }

Domain domain_from_string(const std::string& s) {
  if (s == "source" || s == "Source" || s == "0") return Domain::Source;
  if (s == "target" || s == "Target" || s == "1") return Domain::Target;
  throw ValidationError("unknown domain '" + s + "'");
}

Dataset::Dataset(std::vector<FeatureRecord> records) : records_(std::move(records)) {
  if (records_.empty()) return;
  dim_ = records_.front().feature.size();
  require(dim_ > 0, "record 0: empty feature vector");
  std::unordered_set<std::uint64_t> ids;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    const std::string where = "record " + std::to_string(i);
    require(r.feature.size() == dim_, where + ": dimension " + std::to_string(r.feature.size()) +
                                          " != " + std::to_string(dim_));
    for (float v : r.feature) require(std::isfinite(v), where + ": non-finite feature value");
    require(r.camera >= 1, where + ": camera id must be >= 1");
    require(r.domain != Domain::Source || r.identity.has_value(), where + ": source record without identity");
    require(ids.insert(r.id).second, where + ": duplicate id " + std::to_string(r.id));
    cameras_.insert(r.camera);
  }
}

Matrix Dataset::features() const {
  Matrix m(records_.size(), dim_);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto row = m.row(i);
    std::copy(records_[i].feature.begin(), records_[i].feature.end(), row.begin());
  }
  return m;
}

Matrix Dataset::features(std::span<const std::size_t> indices) const {
  Matrix m(indices.size(), dim_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& f = records_.at(indices[i]).feature;
    std::copy(f.begin(), f.end(), m.row(i).begin());
  }
  return m;
}

std::vector<std::uint32_t> Dataset::camera_labels() const {
  std::vector<std::uint32_t> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.camera);
  return out;
}

std::vector<std::int64_t> Dataset::identity_labels() const {
  std::vector<std::int64_t> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.identity.value_or(-1));
  return out;
}

std::vector<CameraSubset> partition_by_camera(const Dataset& dataset) {
  require(!dataset.empty(), "empty dataset");
  std::map<std::uint32_t, std::vector<std::size_t>> by_cam;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_cam[dataset[i].camera].push_back(i);
  std::vector<CameraSubset> out;
  out.reserve(by_cam.size());
  for (auto& [cam, idx] : by_cam) out.push_back({cam, std::move(idx)});
  return out;
}

FileFormat format_from_string(const std::string& s) {
  if (s == "csv") return FileFormat::Csv;
  if (s == "bin") return FileFormat::Bin;
  throw ValidationError("unknown format '" + s + "' (expected csv or bin)");
}

FileFormat format_from_path(const std::filesystem::path& p) {
  if (p.extension() == ".csv") return FileFormat::Csv;
  if (p.extension() == ".bin") return FileFormat::Bin;
  throw ValidationError(p.string() + ": unknown dataset extension (expected .csv or .bin)");
}

namespace {

using binio::get_f32;
using binio::get_le;
using binio::put_f32;
using binio::put_le;

constexpr std::array<char, 4> kMagic = {'C', 'A', 'C', 'L'};
constexpr std::uint32_t kVersion = 1;

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

// from_chars rejects "nan"/"inf" spellings inconsistently across versions;
// strtod accepts them so they can be reported as non-finite.
bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header row");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"id", "camera", "domain", "identity"}) {
    if (!col.contains(name)) {
      throw ValidationError(path.string() + ": row 0 (header): missing " + name + " column");
    }
  }
  std::vector<std::size_t> feat_cols;
  for (std::size_t k = 0;; ++k) {
    auto it = col.find("f" + std::to_string(k));
    if (it == col.end()) break;
    feat_cols.push_back(it->second);
  }
  if (feat_cols.empty()) throw ValidationError(path.string() + ": row 0 (header): no feature columns");

  std::vector<FeatureRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ": row " + std::to_string(row);
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError(where + ": dimension mismatch (" + std::to_string(cells.size()) + " fields, header has " +
                            std::to_string(header.size()) + ")");
    }
    FeatureRecord r;
    if (!parse_number(cells[col["id"]], r.id)) throw ValidationError(where + ": bad id");
    const auto& cam = cells[col["camera"]];
    if (cam.empty()) throw ValidationError(where + ": missing camera");
    if (!parse_number(cam, r.camera) || r.camera < 1) throw ValidationError(where + ": bad camera '" + cam + "'");
    try {
      r.domain = domain_from_string(cells[col["domain"]]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    const auto& ident = cells[col["identity"]];
    if (!ident.empty()) {
      std::int64_t v = 0;
      if (!parse_number(ident, v)) throw ValidationError(where + ": bad identity '" + ident + "'");
      r.identity = v;
    }
    r.feature.reserve(feat_cols.size());
    for (std::size_t k = 0; k < feat_cols.size(); ++k) {
      double v = 0.0;
      if (!parse_double(cells[feat_cols[k]], v)) {
        throw ValidationError(where + ": bad value in f" + std::to_string(k));
      }
      if (!std::isfinite(v)) throw ValidationError(where + ": non-finite value in f" + std::to_string(k));
      r.feature.push_back(static_cast<float>(v));
    }
    records.push_back(std::move(r));
  }
  try {
    return Dataset(std::move(records));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,camera,domain,identity";
  for (std::size_t k = 0; k < ds.dim(); ++k) out << ",f" << k;
  out << '\n';
  char buf[64];
  for (const auto& r : ds.records()) {
    out << r.id << ',' << r.camera << ',' << to_string(r.domain) << ',';
    if (r.identity) out << *r.identity;
    for (float v : r.feature) {
      std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Binary, little-endian
// ---------------------------------------------------------------------------

Dataset load_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw ValidationError(path.string() + ": bad magic (expected CACL)");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kVersion) throw ValidationError(path.string() + ": unsupported version " + std::to_string(version));
  const auto count = get_le<std::uint32_t>(in, "count");
  const auto dim = get_le<std::uint32_t>(in, "dim");
  std::vector<FeatureRecord> records;
  records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = path.string() + ": row " + std::to_string(i + 1);
    FeatureRecord r;
    r.id = get_le<std::uint64_t>(in, where);
    r.camera = get_le<std::uint32_t>(in, where);
    const auto dom = get_le<std::uint8_t>(in, where);
    if (dom > 1) throw ValidationError(where + ": bad domain tag " + std::to_string(dom));
    r.domain = static_cast<Domain>(dom);
    const auto ident = get_le<std::int64_t>(in, where);
    if (ident >= 0) r.identity = ident;
    r.feature.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      r.feature[k] = get_f32(in, where);
      if (!std::isfinite(r.feature[k])) throw ValidationError(where + ": non-finite value in f" + std::to_string(k));
    }
    records.push_back(std::move(r));
  }
  try {
    return Dataset(std::move(records));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_bin(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic.data(), 4);
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint32_t>(ds.size()));
  put_le(out, static_cast<std::uint32_t>(ds.dim()));
  for (const auto& r : ds.records()) {
    put_le(out, r.id);
    put_le(out, r.camera);
    put_le(out, static_cast<std::uint8_t>(r.domain));
    put_le(out, r.identity.value_or(-1));
    for (float v : r.feature) put_f32(out, v);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  return format == FileFormat::Csv ? load_csv(path) : load_bin(path);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, FileFormat format) {
  require(!dataset.empty(), "empty dataset");
  if (format == FileFormat::Csv) {
    save_csv(dataset, path);
  } else {
    save_bin(dataset, path);
  }
}

}  // namespace cacl
