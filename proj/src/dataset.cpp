#include "hcp/dataset.hpp"

#include <fstream>

#include "json.hpp"

namespace hcp {

using nlohmann::json;

namespace {

std::vector<ManifestAccess>& access_log() {
  static std::vector<ManifestAccess> log;
  return log;
}

std::string dir_of(const std::string& path) {
  size_t pos = path.find_last_of('/');
  if (pos == std::string::npos) return ".";
  if (pos == 0) return "/";
  return path.substr(0, pos);
}

}  // namespace

const std::vector<ManifestAccess>& manifest_access_log() {
  return access_log();
}

void clear_manifest_access_log() { access_log().clear(); }

std::string Manifest::image_path(size_t i) const {
  return dir + "/" + records[i].image;
}

Manifest load_manifest(const std::string& path, BoxPolicy policy,
                       const std::string& reader) {
  access_log().push_back({reader, path, policy});

  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);

  Manifest m;
  m.dir = dir_of(path);

  std::string line;
  if (!std::getline(is, line)) throw DataError("manifest is empty: " + path);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("manifest header is not valid json: " + std::string(e.what()));
  }
  if (!header.contains("categories") || !header["categories"].is_array())
    throw DataError("manifest header lacks a categories list: " + path);
  for (const auto& c : header["categories"]) {
    if (!c.is_string()) throw DataError("manifest category names must be strings");
    m.categories.push_back(c.get<std::string>());
  }
  if (m.categories.empty()) throw DataError("manifest has zero categories");
  m.split = header.value("split", std::string());

  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("manifest line " + std::to_string(lineno) +
                      " is not valid json: " + std::string(e.what()));
    }
    ManifestRecord r;
    if (!rec.contains("image") || !rec["image"].is_string())
      throw DataError("manifest record lacks an image path");
    r.image = rec["image"].get<std::string>();
    if (!rec.contains("labels") || !rec["labels"].is_array())
      throw DataError("manifest record lacks labels");
    for (const auto& v : rec["labels"]) {
      int lv = v.get<int>();
      if (lv != 0 && lv != 1) throw DataError("manifest labels must be 0/1");
      r.labels.push_back(lv);
    }
    if (r.labels.size() != m.categories.size())
      throw DataError("manifest label vector length does not match categories");
    if (policy == BoxPolicy::load_boxes && rec.contains("boxes")) {
      for (const auto& b : rec["boxes"]) {
        AnnotatedBox ab;
        ab.box.x0 = b.at("x0").get<int>();
        ab.box.y0 = b.at("y0").get<int>();
        ab.box.w = b.at("w").get<int>();
        ab.box.h = b.at("h").get<int>();
        ab.category = b.value("category", -1);
        if (ab.box.w < 1 || ab.box.h < 1)
          throw DataError("manifest box has empty extent");
        r.boxes.push_back(ab);
      }
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& manifest) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open manifest for writing: " + path);
  json header;
  header["categories"] = manifest.categories;
  header["split"] = manifest.split;
  os << header.dump() << "\n";
  for (const ManifestRecord& r : manifest.records) {
    json rec;
    rec["image"] = r.image;
    rec["labels"] = r.labels;
    if (!r.boxes.empty()) {
      json boxes = json::array();
      for (const AnnotatedBox& b : r.boxes) {
        json jb;
        jb["x0"] = b.box.x0;
        jb["y0"] = b.box.y0;
        jb["w"] = b.box.w;
        jb["h"] = b.box.h;
        jb["category"] = b.category;
        boxes.push_back(jb);
      }
      rec["boxes"] = boxes;
    }
    os << rec.dump() << "\n";
  }
  if (!os) throw IoError("manifest write failed: " + path);
}

}  // namespace hcp
