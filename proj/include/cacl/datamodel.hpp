#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cacl/matrix.hpp"

namespace cacl {

enum class Domain : std::uint8_t { Source = 0, Target = 1 };

std::string to_string(Domain d);
Domain domain_from_string(const std::string& s);

// One sample. Features are stored as float32, the precision of the bin format,
// so every in-memory dataset round-trips bit-exactly through it.
struct FeatureRecord {
  std::uint64_t id = 0;
  std::vector<float> feature;
  std::uint32_t camera = 1;
  Domain domain = Domain::Target;
  std::optional<std::int64_t> identity;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

// Immutable, validated collection of records sharing one feature dimension.
class Dataset {
 public:
  Dataset() = default;
  // Throws ValidationError naming the offending record if an invariant fails.
  explicit Dataset(std::vector<FeatureRecord> records);

  const std::vector<FeatureRecord>& records() const { return records_; }
  const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::set<std::uint32_t>& cameras() const { return cameras_; }

  // Features as a size() x dim() matrix of doubles.
  Matrix features() const;
  Matrix features(std::span<const std::size_t> indices) const;
  std::vector<std::uint32_t> camera_labels() const;
  // Ground-truth identity per record; -1 where absent.
  std::vector<std::int64_t> identity_labels() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<FeatureRecord> records_;
  std::size_t dim_ = 0;
  std::set<std::uint32_t> cameras_;
};

struct CameraSubset {
  std::uint32_t camera = 0;
  std::vector<std::size_t> indices;  // positions in the dataset, ascending
};

// One subset per distinct camera, ascending by camera id.
std::vector<CameraSubset> partition_by_camera(const Dataset& dataset);

enum class FileFormat { Csv, Bin };

FileFormat format_from_string(const std::string& s);
// ".csv" -> Csv, ".bin" -> Bin, anything else is a ValidationError.
FileFormat format_from_path(const std::filesystem::path& p);

Dataset load_dataset(const std::filesystem::path& path, FileFormat format);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path, FileFormat format);

}  // namespace cacl
