#pragma once

#include <string>
#include <vector>

#include "hcp/boxes.hpp"
#include "hcp/errors.hpp"

namespace hcp {

struct AnnotatedBox {
  Box box;
  int category = -1;
};

struct ManifestRecord {
  std::string image;        // path relative to the manifest's directory
  std::vector<int> labels;  // 0/1 per category
  std::vector<AnnotatedBox> boxes;
};

struct Manifest {
  std::vector<std::string> categories;
  std::string split;
  std::string dir;  // directory of the manifest file, for resolving images
  std::vector<ManifestRecord> records;

  std::string image_path(size_t i) const;
  int class_count() const { return int(categories.size()); }
};

// Stages that only classify must not see bounding boxes; the loader drops
// them under ignore_boxes, and every load is recorded so tests can audit
// which stages requested box data.
enum class BoxPolicy { load_boxes, ignore_boxes };

struct ManifestAccess {
  std::string reader;  // stage or tool name
  std::string path;
  BoxPolicy policy;
};

const std::vector<ManifestAccess>& manifest_access_log();
void clear_manifest_access_log();

// JSON lines: a header {"categories": [...], "split": ...} followed by one
// record per line {"image": ..., "labels": [...], "boxes": [...]}.
Manifest load_manifest(const std::string& path, BoxPolicy policy,
                       const std::string& reader);
void save_manifest(const std::string& path, const Manifest& manifest);

}  // namespace hcp
