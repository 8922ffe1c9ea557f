#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hcp/config.hpp"
#include "hcp/dataset.hpp"
#include "hcp/eval.hpp"
#include "hcp/fusion.hpp"
#include "hcp/hselect.hpp"
#include "hcp/image.hpp"
#include "hcp/network.hpp"
#include "hcp/objectness.hpp"
#include "hcp/stages.hpp"
#include "hcp/synth.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;
constexpr int kConfig = 3;
constexpr int kData = 4;
constexpr int kStage = 5;
constexpr int kIo = 6;

// Config file values fill in for flags the user did not pass explicitly.
void cfg_int(const hcp::Config& c, CLI::Option* o, const char* k, int& v) {
  if (o->count() == 0) v = c.get_int(k, v);
}
void cfg_ll(const hcp::Config& c, CLI::Option* o, const char* k, long long& v) {
  if (o->count() == 0) v = c.get_ll(k, v);
}
void cfg_dbl(const hcp::Config& c, CLI::Option* o, const char* k, double& v) {
  if (o->count() == 0) v = c.get_double(k, v);
}
void cfg_u64(const hcp::Config& c, CLI::Option* o, const char* k, uint64_t& v) {
  if (o->count() == 0) v = c.get_u64(k, v);
}
void cfg_bool(const hcp::Config& c, CLI::Option* o, const char* k, bool& v) {
  if (o->count() == 0) v = c.get_bool(k, v);
}
void cfg_str(const hcp::Config& c, CLI::Option* o, const char* k,
             std::string& v) {
  if (o->count() == 0) v = c.get_string(k, v);
}
void cfg_dbls(const hcp::Config& c, CLI::Option* o, const char* k,
              std::vector<double>& v) {
  if (o->count() == 0) v = c.get_doubles(k, v);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_scores_csv(
    const std::string& path, const std::vector<std::string>& categories,
    const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::ofstream os(path);
  if (!os) throw hcp::IoError("cannot open score file for writing: " + path);
  os << "image";
  for (const std::string& c : categories) os << "," << c;
  os << "\n";
  for (const auto& [image, scores] : rows) {
    os << image;
    for (double s : scores) os << "," << fmt_double(s);
    os << "\n";
  }
  if (!os) throw hcp::IoError("score file write failed: " + path);
}

struct ScoreFile {
  std::vector<std::string> categories;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

ScoreFile read_scores_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw hcp::IoError("cannot open score file: " + path);
  ScoreFile sf;
  std::string line;
  if (!std::getline(is, line)) throw hcp::DataError("score file is empty: " + path);
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "image")
    throw hcp::DataError("score file header must be image,<categories>: " + path);
  sf.categories.assign(header.begin() + 1, header.end());
  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw hcp::DataError(path + ":" + std::to_string(lineno) +
                           ": wrong column count");
    std::vector<double> scores;
    for (size_t i = 1; i < cells.size(); ++i) {
      try {
        size_t pos = 0;
        scores.push_back(std::stod(cells[i], &pos));
        if (pos != cells[i].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw hcp::DataError(path + ":" + std::to_string(lineno) +
                             ": bad score value: " + cells[i]);
      }
    }
    sf.rows.emplace_back(cells[0], std::move(scores));
  }
  return sf;
}

void write_train_log(const std::string& path, const char* stage,
                     const hcp::TrainLog& log) {
  if (path.empty()) return;
  json j;
  j["stage"] = stage;
  j["epoch_loss"] = log.epoch_loss;
  j["skipped_images"] = log.skipped_images;
  std::ofstream os(path);
  if (!os) throw hcp::IoError("cannot open train log for writing: " + path);
  os << j.dump(2) << "\n";
}

json box_json(const hcp::Box& b) {
  json j;
  j["x0"] = b.x0;
  j["y0"] = b.y0;
  j["w"] = b.w;
  j["h"] = b.h;
  return j;
}

// ---- subcommand option blocks ----

struct GenDataArgs {
  std::string out;
  int image_size = 128, categories = 10;
  int min_objects = 1, max_objects = 4, min_size = 20, max_size = 44;
  double occlusion = 0.15;
  uint64_t seed = 1;
  int train = 200, val = 0, test = 100, pretrain = 200;
  int obj_train = 60, obj_heldout = 40;
};

void run_gen_data(const GenDataArgs& a) {
  std::filesystem::create_directories(a.out);
  hcp::SyntheticSpec cls;
  cls.image_size = a.image_size;
  cls.categories = a.categories;
  cls.bank = hcp::ShapeBank::classification;
  cls.min_objects = a.min_objects;
  cls.max_objects = a.max_objects;
  cls.min_size = a.min_size;
  cls.max_size = a.max_size;
  cls.occlusion_prob = a.occlusion;
  cls.seed = a.seed;

  hcp::SyntheticSpec bank = cls;
  bank.bank = hcp::ShapeBank::objectness;
  bank.categories = hcp::bank_size(hcp::ShapeBank::objectness);

  auto emit = [&](const hcp::SyntheticSpec& spec, const std::string& split,
                  int count, bool single) {
    if (count < 1) return;
    hcp::Manifest m = hcp::gen_synthetic(spec, a.out, split, count, single);
    hcp::save_manifest(a.out + "/" + split + ".jsonl", m);
    std::printf("wrote %s: %d images\n", (split + ".jsonl").c_str(), count);
  };
  emit(cls, "pretrain", a.pretrain, true);
  emit(cls, "train", a.train, false);
  emit(cls, "val", a.val, false);
  emit(cls, "test", a.test, false);
  emit(bank, "objectness-train", a.obj_train, false);
  emit(bank, "objectness-heldout", a.obj_heldout, false);
}

struct TrainObjArgs {
  std::string data, model, eval_data, report;
  int epochs = 10;
  double lr = 0.05, l2 = 1e-4;
  int neg_per_pos = 3;
  uint64_t seed = 7;
  int eval_n = 200;
  double nms_thresh = 0.8;
};

void run_train_objectness(const TrainObjArgs& a) {
  hcp::Manifest m =
      hcp::load_manifest(a.data, hcp::BoxPolicy::load_boxes, "train-objectness");
  std::vector<hcp::AnnotatedImage> annotated;
  for (size_t i = 0; i < m.records.size(); ++i) {
    hcp::AnnotatedImage ai;
    ai.image = hcp::read_ppm(m.image_path(i));
    for (const hcp::AnnotatedBox& b : m.records[i].boxes) ai.boxes.push_back(b.box);
    annotated.push_back(std::move(ai));
  }
  hcp::ObjectnessTrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.lr = a.lr;
  cfg.l2 = a.l2;
  cfg.negatives_per_positive = a.neg_per_pos;
  cfg.seed = a.seed;
  hcp::ObjectnessModel model = hcp::train_objectness(annotated, cfg);
  hcp::save_objectness(a.model, model);
  std::printf("wrote objectness model: %s\n", a.model.c_str());

  if (!a.eval_data.empty()) {
    hcp::Manifest held = hcp::load_manifest(
        a.eval_data, hcp::BoxPolicy::load_boxes, "objectness-recall");
    std::vector<std::vector<hcp::ScoredProposal>> props;
    std::vector<std::vector<hcp::Box>> gt;
    for (size_t i = 0; i < held.records.size(); ++i) {
      hcp::ImageU8 img = hcp::read_ppm(held.image_path(i));
      props.push_back(
          hcp::generate_proposals(img, model, a.eval_n, a.nms_thresh));
      std::vector<hcp::Box> boxes;
      for (const hcp::AnnotatedBox& b : held.records[i].boxes)
        boxes.push_back(b.box);
      gt.push_back(std::move(boxes));
    }
    double rate = hcp::recall_evaluation(props, gt, 0.5);
    std::printf("detection rate at %d proposals (IoU 0.5): %.4f\n", a.eval_n,
                rate);
    if (!a.report.empty()) {
      json j;
      j["proposals"] = a.eval_n;
      j["iou_threshold"] = 0.5;
      j["detection_rate"] = rate;
      std::ofstream os(a.report);
      if (!os) throw hcp::IoError("cannot open report for writing: " + a.report);
      os << j.dump(2) << "\n";
    }
  }
}

struct ProposalsArgs {
  std::string data, model, out;
  int n = 200;
  double nms_thresh = 0.8;
  bool hs = false;
  int m = 10, k = 1;
  long long min_area = 900;
  double max_ratio = 4.0;
};

void run_proposals(const ProposalsArgs& a) {
  hcp::Manifest m =
      hcp::load_manifest(a.data, hcp::BoxPolicy::ignore_boxes, "proposals");
  hcp::ObjectnessModel model = hcp::load_objectness(a.model);
  std::ofstream os(a.out);
  if (!os) throw hcp::IoError("cannot open proposal dump for writing: " + a.out);

  hcp::HSConfig cfg;
  cfg.m = a.m;
  cfg.k = a.k;
  cfg.min_area = a.min_area;
  cfg.max_ratio = a.max_ratio;

  for (size_t i = 0; i < m.records.size(); ++i) {
    hcp::ImageU8 img = hcp::read_ppm(m.image_path(i));
    auto props = hcp::generate_proposals(img, model, a.n, a.nms_thresh);
    if (!a.hs) {
      for (const hcp::ScoredProposal& p : props) {
        json j = box_json(p.box);
        j["image"] = m.records[i].image;
        j["score"] = p.score;
        os << j.dump() << "\n";
      }
      continue;
    }
    std::vector<uint8_t> kept(props.size(), 0);
    std::vector<int> labels(props.size(), -1);
    if (!props.empty()) {
      try {
        hcp::HSelection sel = hcp::select_boxes(props, cfg);
        labels = sel.cluster_labels;
        for (int idx : sel.chosen) kept[size_t(idx)] = 1;
      } catch (const hcp::DataError&) {
        // nothing survives filtering; every line reports kept=false
      }
    }
    for (size_t p = 0; p < props.size(); ++p) {
      json j = box_json(props[p].box);
      j["image"] = m.records[i].image;
      j["score"] = props[p].score;
      j["cluster"] = labels[p];
      j["kept"] = bool(kept[p]);
      os << j.dump() << "\n";
    }
  }
  if (!os) throw hcp::IoError("proposal dump write failed: " + a.out);
}

struct PretrainArgs {
  std::string data, out, log;
  int epochs = 14, batch = 32, input = 64, resize = 72;
  double lr = 0.01;
  uint64_t seed = 1;
  bool no_augment = false;
};

void run_pretrain_cmd(const PretrainArgs& a) {
  hcp::Manifest m =
      hcp::load_manifest(a.data, hcp::BoxPolicy::ignore_boxes, "pretrain");
  hcp::TrainOpts opts;
  opts.group_lrs = {a.lr, a.lr, a.lr};
  opts.epochs = a.epochs;
  opts.batch = a.batch;
  opts.seed = a.seed;
  opts.augment = !a.no_augment;
  opts.resize_for_crop = a.resize;
  hcp::StageResult res = hcp::run_pretrain(m, a.input, opts);
  res.net.save(a.out, hcp::Stage::pretrain, a.epochs);
  write_train_log(a.log, "pretrain", res.log);
  std::printf("wrote checkpoint: %s\n", a.out.c_str());
}

struct IftArgs {
  std::string data, in, out, log;
  int epochs = 20, batch = 32;
  std::vector<double> lrs = {0.001, 0.002, 0.01};
  uint64_t seed = 2;
  bool no_augment = false;
};

void run_ift_cmd(const IftArgs& a) {
  hcp::Stage tag;
  hcp::Network pre = hcp::Network::load(a.in, &tag);
  hcp::Manifest m = hcp::load_manifest(a.data, hcp::BoxPolicy::ignore_boxes, "ift");
  hcp::TrainOpts opts;
  opts.group_lrs = a.lrs;
  opts.epochs = a.epochs;
  opts.batch = a.batch;
  opts.seed = a.seed;
  opts.augment = !a.no_augment;
  hcp::StageResult res = hcp::run_ift(pre, tag, m, opts);
  res.net.save(a.out, hcp::Stage::ift, a.epochs);
  write_train_log(a.log, "ift", res.log);
  std::printf("wrote checkpoint: %s\n", a.out.c_str());
}

struct HftArgs {
  std::string data, in, objectness, out, log;
  int epochs = 6, batch = 16;
  std::vector<double> lrs = {0.0001, 0.0002, 0.001};
  uint64_t seed = 3;
  bool no_augment = false;
  int proposals_n = 200;
  int m = 10, k = 1;
  long long min_area = 900;
  double max_ratio = 4.0;
};

void run_hft_cmd(const HftArgs& a) {
  hcp::Stage tag;
  hcp::Network ift = hcp::Network::load(a.in, &tag);
  hcp::Manifest m = hcp::load_manifest(a.data, hcp::BoxPolicy::ignore_boxes, "hft");
  hcp::ObjectnessModel objn = hcp::load_objectness(a.objectness);
  hcp::HftOpts opts;
  opts.train.group_lrs = a.lrs;
  opts.train.epochs = a.epochs;
  opts.train.batch = a.batch;
  opts.train.seed = a.seed;
  opts.train.augment = !a.no_augment;
  opts.proposals_n = a.proposals_n;
  opts.hs.m = a.m;
  opts.hs.k = a.k;
  opts.hs.min_area = a.min_area;
  opts.hs.max_ratio = a.max_ratio;
  opts.hs.crop_size = ift.input_side();
  hcp::StageResult res = hcp::run_hft(ift, tag, m, objn, opts);
  if (res.log.skipped_images > 0)
    std::fprintf(stderr, "warning: %d images yielded zero hypotheses and were skipped\n",
                 res.log.skipped_images);
  res.net.save(a.out, hcp::Stage::hft, a.epochs);
  write_train_log(a.log, "hft", res.log);
  std::printf("wrote checkpoint: %s\n", a.out.c_str());
}

struct PredictArgs {
  std::string data, in, out, jsonl, objectness;
  bool whole = false;
  std::string fuse = "post";
  int proposals_n = 200;
  int m = 10, k = 50;
  long long min_area = 900;
  double max_ratio = 4.0;
};

void run_predict(const PredictArgs& a) {
  hcp::Stage tag;
  hcp::Network net = hcp::Network::load(a.in, &tag);
  if (a.whole) {
    if (tag != hcp::Stage::ift && tag != hcp::Stage::hft)
      throw hcp::StageError(
          "whole-image prediction needs an image- or hypotheses-fine-tuned checkpoint");
  } else {
    if (tag != hcp::Stage::hft)
      throw hcp::StageError(
          "hypothesis prediction needs a hypotheses-fine-tuned checkpoint");
    if (a.objectness.empty())
      throw hcp::ConfigError("hypothesis prediction needs --objectness");
  }
  if (a.fuse != "post" && a.fuse != "pre")
    throw hcp::ConfigError("--fuse must be 'post' or 'pre'");

  hcp::Manifest m =
      hcp::load_manifest(a.data, hcp::BoxPolicy::ignore_boxes, "predict");
  if (m.class_count() != net.output_classes())
    throw hcp::StageError("checkpoint class count does not match the manifest");

  hcp::ObjectnessModel objn;
  if (!a.whole) objn = hcp::load_objectness(a.objectness);
  hcp::HSConfig hs;
  hs.m = a.m;
  hs.k = a.k;
  hs.min_area = a.min_area;
  hs.max_ratio = a.max_ratio;
  hs.crop_size = net.input_side();
  hcp::FuseMode mode = a.fuse == "post" ? hcp::FuseMode::post_softmax
                                        : hcp::FuseMode::pre_softmax;

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (size_t i = 0; i < m.records.size(); ++i) {
    hcp::ImageU8 img = hcp::read_ppm(m.image_path(i));
    hcp::Tensor scores =
        a.whole ? hcp::predict_whole(net, img)
                : hcp::predict_hypotheses(net, img, objn, a.proposals_n, hs, mode);
    rows.emplace_back(m.records[i].image, scores.data);
  }
  write_scores_csv(a.out, m.categories, rows);
  if (!a.jsonl.empty()) {
    std::ofstream os(a.jsonl);
    if (!os) throw hcp::IoError("cannot open prediction dump for writing: " + a.jsonl);
    for (const auto& [image, scores] : rows) {
      json j;
      j["image"] = image;
      j["scores"] = scores;
      os << j.dump() << "\n";
    }
  }
  std::printf("wrote predictions: %s\n", a.out.c_str());
}

struct EvalArgs {
  std::string pred, data, out, pr_csv;
  bool all_points = false;
};

void run_eval(const EvalArgs& a) {
  ScoreFile sf = read_scores_csv(a.pred);
  hcp::Manifest m = hcp::load_manifest(a.data, hcp::BoxPolicy::ignore_boxes, "eval");
  if (sf.categories != m.categories)
    throw hcp::DataError("prediction categories do not match the manifest");

  std::map<std::string, const std::vector<int>*> labels_by_image;
  for (const hcp::ManifestRecord& r : m.records)
    labels_by_image[r.image] = &r.labels;

  const int c = m.class_count();
  std::vector<std::vector<double>> scores(static_cast<size_t>(c));
  std::vector<std::vector<int>> labels(static_cast<size_t>(c));
  for (const auto& [image, row] : sf.rows) {
    auto it = labels_by_image.find(image);
    if (it == labels_by_image.end())
      throw hcp::DataError("prediction for unknown image: " + image);
    for (int j = 0; j < c; ++j) {
      scores[size_t(j)].push_back(row[size_t(j)]);
      labels[size_t(j)].push_back((*it->second)[size_t(j)]);
    }
  }
  if (sf.rows.empty()) throw hcp::DataError("prediction file has no rows");

  hcp::EvalReport report = hcp::mean_ap(scores, labels, !a.all_points);

  json j;
  j["protocol"] = a.all_points ? "all-points" : "11-point";
  j["map"] = report.map;
  json classes = json::array();
  for (int k = 0; k < c; ++k) {
    const hcp::ClassEval& ev = report.per_class[size_t(k)];
    json e;
    e["name"] = m.categories[size_t(k)];
    e["ap"] = ev.ap;
    e["evaluable"] = ev.evaluable;
    e["ties_cross_boundary"] = ev.ties_cross_boundary;
    classes.push_back(e);
  }
  j["classes"] = classes;
  json skipped = json::array();
  for (int k : report.skipped_classes) skipped.push_back(m.categories[size_t(k)]);
  j["skipped"] = skipped;

  std::ofstream os(a.out);
  if (!os) throw hcp::IoError("cannot open report for writing: " + a.out);
  os << j.dump(2) << "\n";
  if (!os) throw hcp::IoError("report write failed: " + a.out);

  if (!a.pr_csv.empty()) {
    std::ofstream pr(a.pr_csv);
    if (!pr) throw hcp::IoError("cannot open PR dump for writing: " + a.pr_csv);
    pr << "class,rank,recall,precision\n";
    for (int k = 0; k < c; ++k) {
      const hcp::ClassEval& ev = report.per_class[size_t(k)];
      for (size_t r = 0; r < ev.curve.size(); ++r)
        pr << m.categories[size_t(k)] << "," << (r + 1) << ","
           << fmt_double(ev.curve[r].recall) << ","
           << fmt_double(ev.curve[r].precision) << "\n";
    }
  }
  std::printf("mAP %.4f (%s)\n", report.map,
              a.all_points ? "all-points" : "11-point");
}

struct FuseArgs {
  std::string a, b, out;
  double weight = 0.5;
  bool no_normalize = false;
};

void run_fuse(const FuseArgs& args) {
  ScoreFile fa = read_scores_csv(args.a);
  ScoreFile fb = read_scores_csv(args.b);
  if (fa.categories != fb.categories)
    throw hcp::DataError("fuse: category lists differ");
  if (fa.rows.size() != fb.rows.size())
    throw hcp::DataError("fuse: row counts differ");

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (size_t i = 0; i < fa.rows.size(); ++i) {
    if (fa.rows[i].first != fb.rows[i].first)
      throw hcp::DataError("fuse: image order differs at row " +
                           std::to_string(i + 1));
    hcp::Tensor va({int(fa.categories.size())}, fa.rows[i].second);
    hcp::Tensor vb({int(fb.categories.size())}, fb.rows[i].second);
    if (!args.no_normalize) {
      va = hcp::minmax_normalize(va);
      vb = hcp::minmax_normalize(vb);
    }
    hcp::Tensor fused = hcp::late_fusion(va, vb, args.weight);
    rows.emplace_back(fa.rows[i].first, fused.data);
  }
  write_scores_csv(args.out, fa.categories, rows);
  std::printf("wrote fused predictions: %s\n", args.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Multi-label image classification via pooled hypothesis crops: "
      "objectness proposals, normalized-cut hypothesis selection, a shared "
      "CNN, and cross-hypothesis max pooling."};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "key=value settings file; explicit flags take precedence");

  hcp::Config cfg;
  auto load_cfg = [&]() {
    if (!config_path.empty()) cfg = hcp::Config::from_file(config_path);
  };

  int rc = kOk;
  auto guard = [&](auto&& fn) {
    try {
      load_cfg();
      fn();
    } catch (const hcp::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      rc = kConfig;
    } catch (const hcp::DataError& e) {
      std::fprintf(stderr, "data error: %s\n", e.what());
      rc = kData;
    } catch (const hcp::StageError& e) {
      std::fprintf(stderr, "stage error: %s\n", e.what());
      rc = kStage;
    } catch (const hcp::IoError& e) {
      std::fprintf(stderr, "io error: %s\n", e.what());
      rc = kIo;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      rc = kInternal;
    }
  };

  // gen-data
  GenDataArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-data", "generate the synthetic shape datasets");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  auto* g_is = gen_cmd->add_option("--image-size", gen.image_size);
  auto* g_c = gen_cmd->add_option("--categories", gen.categories);
  auto* g_mno = gen_cmd->add_option("--min-objects", gen.min_objects);
  auto* g_mxo = gen_cmd->add_option("--max-objects", gen.max_objects);
  auto* g_mns = gen_cmd->add_option("--min-size", gen.min_size);
  auto* g_mxs = gen_cmd->add_option("--max-size", gen.max_size);
  auto* g_occ = gen_cmd->add_option("--occlusion", gen.occlusion);
  auto* g_seed = gen_cmd->add_option("--seed", gen.seed);
  auto* g_tr = gen_cmd->add_option("--train", gen.train, "multi-label train images");
  auto* g_va = gen_cmd->add_option("--val", gen.val, "multi-label val images");
  auto* g_te = gen_cmd->add_option("--test", gen.test, "multi-label test images");
  auto* g_pre = gen_cmd->add_option("--pretrain", gen.pretrain,
                                    "single-label pre-training images");
  auto* g_ot = gen_cmd->add_option("--objectness-train", gen.obj_train);
  auto* g_oh = gen_cmd->add_option("--objectness-heldout", gen.obj_heldout);
  gen_cmd->callback([&] {
    guard([&] {
      cfg_int(cfg, g_is, "gen.image_size", gen.image_size);
      cfg_int(cfg, g_c, "gen.categories", gen.categories);
      cfg_int(cfg, g_mno, "gen.min_objects", gen.min_objects);
      cfg_int(cfg, g_mxo, "gen.max_objects", gen.max_objects);
      cfg_int(cfg, g_mns, "gen.min_size", gen.min_size);
      cfg_int(cfg, g_mxs, "gen.max_size", gen.max_size);
      cfg_dbl(cfg, g_occ, "gen.occlusion", gen.occlusion);
      cfg_u64(cfg, g_seed, "gen.seed", gen.seed);
      cfg_int(cfg, g_tr, "gen.train", gen.train);
      cfg_int(cfg, g_va, "gen.val", gen.val);
      cfg_int(cfg, g_te, "gen.test", gen.test);
      cfg_int(cfg, g_pre, "gen.pretrain", gen.pretrain);
      cfg_int(cfg, g_ot, "gen.objectness_train", gen.obj_train);
      cfg_int(cfg, g_oh, "gen.objectness_heldout", gen.obj_heldout);
      run_gen_data(gen);
    });
  });

  // train-objectness
  TrainObjArgs tob;
  CLI::App* tob_cmd = app.add_subcommand(
      "train-objectness", "fit the window objectness scorer on annotated boxes");
  tob_cmd->add_option("--data", tob.data, "annotated manifest")->required();
  tob_cmd->add_option("--model", tob.model, "output model path")->required();
  auto* t_ep = tob_cmd->add_option("--epochs", tob.epochs);
  auto* t_lr = tob_cmd->add_option("--lr", tob.lr);
  auto* t_l2 = tob_cmd->add_option("--l2", tob.l2);
  auto* t_np = tob_cmd->add_option("--neg-per-pos", tob.neg_per_pos);
  auto* t_seed = tob_cmd->add_option("--seed", tob.seed);
  tob_cmd->add_option("--eval", tob.eval_data,
                      "held-out manifest for a detection-rate report");
  auto* t_en = tob_cmd->add_option("--eval-n", tob.eval_n,
                                   "proposals per image for the report");
  auto* t_nms = tob_cmd->add_option("--nms", tob.nms_thresh);
  tob_cmd->add_option("--report", tob.report, "detection-rate report path");
  tob_cmd->callback([&] {
    guard([&] {
      cfg_int(cfg, t_ep, "objectness.epochs", tob.epochs);
      cfg_dbl(cfg, t_lr, "objectness.lr", tob.lr);
      cfg_dbl(cfg, t_l2, "objectness.l2", tob.l2);
      cfg_int(cfg, t_np, "objectness.neg_per_pos", tob.neg_per_pos);
      cfg_u64(cfg, t_seed, "objectness.seed", tob.seed);
      cfg_int(cfg, t_en, "objectness.n", tob.eval_n);
      cfg_dbl(cfg, t_nms, "objectness.nms", tob.nms_thresh);
      run_train_objectness(tob);
    });
  });

  // proposals
  ProposalsArgs pro;
  CLI::App* pro_cmd = app.add_subcommand(
      "proposals", "dump scored candidate windows (with --hs, the selection trace)");
  pro_cmd->add_option("--data", pro.data)->required();
  pro_cmd->add_option("--model", pro.model, "objectness model")->required();
  pro_cmd->add_option("--out", pro.out, "output JSONL path")->required();
  auto* p_n = pro_cmd->add_option("-n,--n", pro.n, "proposals per image");
  auto* p_nms = pro_cmd->add_option("--nms", pro.nms_thresh);
  pro_cmd->add_flag("--hs", pro.hs, "emit the cluster/filter/top-k trace");
  auto* p_m = pro_cmd->add_option("--m", pro.m, "clusters");
  auto* p_k = pro_cmd->add_option("--k", pro.k, "picks per cluster");
  auto* p_ma = pro_cmd->add_option("--min-area", pro.min_area);
  auto* p_mr = pro_cmd->add_option("--max-ratio", pro.max_ratio);
  pro_cmd->callback([&] {
    guard([&] {
      cfg_int(cfg, p_n, "objectness.n", pro.n);
      cfg_dbl(cfg, p_nms, "objectness.nms", pro.nms_thresh);
      cfg_int(cfg, p_m, "hs.m", pro.m);
      cfg_int(cfg, p_k, "hs.k_train", pro.k);
      cfg_ll(cfg, p_ma, "hs.min_area", pro.min_area);
      cfg_dbl(cfg, p_mr, "hs.max_ratio", pro.max_ratio);
      run_proposals(pro);
    });
  });

  // pretrain
  PretrainArgs pre;
  CLI::App* pre_cmd = app.add_subcommand(
      "pretrain", "train the shared CNN on the single-label split");
  pre_cmd->add_option("--data", pre.data)->required();
  pre_cmd->add_option("--out", pre.out, "checkpoint path")->required();
  pre_cmd->add_option("--log", pre.log, "epoch-loss JSON path");
  auto* pr_ep = pre_cmd->add_option("--epochs", pre.epochs);
  auto* pr_ba = pre_cmd->add_option("--batch", pre.batch);
  auto* pr_in = pre_cmd->add_option("--input", pre.input, "CNN input side");
  auto* pr_rs = pre_cmd->add_option("--resize", pre.resize, "pre-crop resize");
  auto* pr_lr = pre_cmd->add_option("--lr", pre.lr);
  auto* pr_seed = pre_cmd->add_option("--seed", pre.seed);
  auto* pr_na = pre_cmd->add_flag("--no-augment", pre.no_augment);
  pre_cmd->callback([&] {
    guard([&] {
      cfg_int(cfg, pr_ep, "pretrain.epochs", pre.epochs);
      cfg_int(cfg, pr_ba, "pretrain.batch", pre.batch);
      cfg_int(cfg, pr_in, "cnn.input", pre.input);
      cfg_int(cfg, pr_rs, "cnn.resize", pre.resize);
      cfg_dbl(cfg, pr_lr, "pretrain.lr", pre.lr);
      cfg_u64(cfg, pr_seed, "pretrain.seed", pre.seed);
      bool aug = !pre.no_augment;
      cfg_bool(cfg, pr_na, "pretrain.augment", aug);
      pre.no_augment = !aug;
      run_pretrain_cmd(pre);
    });
  });

  // ift
  IftArgs ift;
  CLI::App* ift_cmd = app.add_subcommand(
      "ift", "image-fine-tune a pre-trained checkpoint on the multi-label split");
  ift_cmd->add_option("--data", ift.data)->required();
  ift_cmd->add_option("--in", ift.in, "pre-training checkpoint")->required();
  ift_cmd->add_option("--out", ift.out, "checkpoint path")->required();
  ift_cmd->add_option("--log", ift.log, "epoch-loss JSON path");
  auto* i_ep = ift_cmd->add_option("--epochs", ift.epochs);
  auto* i_ba = ift_cmd->add_option("--batch", ift.batch);
  auto* i_lr = ift_cmd->add_option("--lrs", ift.lrs,
                                   "per-group learning rates (conv, hidden, classifier)");
  auto* i_seed = ift_cmd->add_option("--seed", ift.seed);
  auto* i_na = ift_cmd->add_flag("--no-augment", ift.no_augment);
  ift_cmd->callback([&] {
    guard([&] {
      cfg_int(cfg, i_ep, "ift.epochs", ift.epochs);
      cfg_int(cfg, i_ba, "ift.batch", ift.batch);
      cfg_dbls(cfg, i_lr, "ift.lrs", ift.lrs);
      cfg_u64(cfg, i_seed, "ift.seed", ift.seed);
      bool aug = !ift.no_augment;
      cfg_bool(cfg, i_na, "ift.augment", aug);
      ift.no_augment = !aug;
      run_ift_cmd(ift);
    });
  });

  // hft
  HftArgs hft;
  CLI::App* hft_cmd = app.add_subcommand(
      "hft", "hypotheses-fine-tune through cross-hypothesis max pooling");
  hft_cmd->add_option("--data", hft.data)->required();
  hft_cmd->add_option("--in", hft.in, "image-fine-tuned checkpoint")->required();
  hft_cmd->add_option("--objectness", hft.objectness, "objectness model")
      ->required();
  hft_cmd->add_option("--out", hft.out, "checkpoint path")->required();
  hft_cmd->add_option("--log", hft.log, "epoch-loss JSON path");
  auto* h_ep = hft_cmd->add_option("--epochs", hft.epochs);
  auto* h_ba = hft_cmd->add_option("--batch", hft.batch);
  auto* h_lr = hft_cmd->add_option("--lrs", hft.lrs);
  auto* h_seed = hft_cmd->add_option("--seed", hft.seed);
  auto* h_na = hft_cmd->add_flag("--no-augment", hft.no_augment);
  auto* h_pn = hft_cmd->add_option("--proposals-n", hft.proposals_n);
  auto* h_m = hft_cmd->add_option("--m", hft.m);
  auto* h_k = hft_cmd->add_option("--k", hft.k);
  auto* h_ma = hft_cmd->add_option("--min-area", hft.min_area);
  auto* h_mr = hft_cmd->add_option("--max-ratio", hft.max_ratio);
  hft_cmd->callback([&] {
    guard([&] {
      cfg_int(cfg, h_ep, "hft.epochs", hft.epochs);
      cfg_int(cfg, h_ba, "hft.batch", hft.batch);
      cfg_dbls(cfg, h_lr, "hft.lrs", hft.lrs);
      cfg_u64(cfg, h_seed, "hft.seed", hft.seed);
      bool aug = !hft.no_augment;
      cfg_bool(cfg, h_na, "hft.augment", aug);
      hft.no_augment = !aug;
      cfg_int(cfg, h_pn, "objectness.n", hft.proposals_n);
      cfg_int(cfg, h_m, "hs.m", hft.m);
      cfg_int(cfg, h_k, "hs.k_train", hft.k);
      cfg_ll(cfg, h_ma, "hs.min_area", hft.min_area);
      cfg_dbl(cfg, h_mr, "hs.max_ratio", hft.max_ratio);
      run_hft_cmd(hft);
    });
  });

  // predict
  PredictArgs prd;
  CLI::App* prd_cmd = app.add_subcommand(
      "predict", "score images with a trained checkpoint");
  prd_cmd->add_option("--data", prd.data)->required();
  prd_cmd->add_option("--in", prd.in, "checkpoint")->required();
  prd_cmd->add_option("--out", prd.out, "prediction CSV path")->required();
  prd_cmd->add_option("--jsonl", prd.jsonl, "optional JSONL dump");
  prd_cmd->add_option("--objectness", prd.objectness, "objectness model");
  prd_cmd->add_flag("--whole", prd.whole,
                    "whole-image forward instead of pooled hypotheses");
  auto* d_fu = prd_cmd->add_option(
      "--fuse", prd.fuse, "max-pool 'post'- or 'pre'-softmax scores");
  auto* d_pn = prd_cmd->add_option("--proposals-n", prd.proposals_n);
  auto* d_m = prd_cmd->add_option("--m", prd.m);
  auto* d_k = prd_cmd->add_option("--k", prd.k);
  auto* d_ma = prd_cmd->add_option("--min-area", prd.min_area);
  auto* d_mr = prd_cmd->add_option("--max-ratio", prd.max_ratio);
  prd_cmd->callback([&] {
    guard([&] {
      cfg_str(cfg, d_fu, "hft.fuse", prd.fuse);
      cfg_int(cfg, d_pn, "objectness.n", prd.proposals_n);
      cfg_int(cfg, d_m, "hs.m", prd.m);
      cfg_int(cfg, d_k, "hs.k_test", prd.k);
      cfg_ll(cfg, d_ma, "hs.min_area", prd.min_area);
      cfg_dbl(cfg, d_mr, "hs.max_ratio", prd.max_ratio);
      run_predict(prd);
    });
  });

  // eval
  EvalArgs ev;
  CLI::App* ev_cmd = app.add_subcommand(
      "eval", "average precision and mAP over a prediction file");
  ev_cmd->add_option("--pred", ev.pred, "prediction CSV")->required();
  ev_cmd->add_option("--data", ev.data, "manifest with ground-truth labels")
      ->required();
  ev_cmd->add_option("--out", ev.out, "report JSON path")->required();
  ev_cmd->add_option("--pr-curves", ev.pr_csv, "per-class PR curve CSV");
  auto* e_ap = ev_cmd->add_flag("--all-points", ev.all_points,
                                "area-under-curve AP instead of 11-point");
  ev_cmd->callback([&] {
    guard([&] {
      if (e_ap->count() == 0)
        ev.all_points = cfg.get_string("eval.protocol", "11-point") == "all-points";
      run_eval(ev);
    });
  });

  // fuse
  FuseArgs fus;
  CLI::App* fus_cmd = app.add_subcommand(
      "fuse", "late-fuse two prediction files (min-max normalized weighted sum)");
  fus_cmd->add_option("--a", fus.a, "first prediction CSV")->required();
  fus_cmd->add_option("--b", fus.b, "second prediction CSV")->required();
  fus_cmd->add_option("--out", fus.out, "fused CSV path")->required();
  auto* f_w = fus_cmd->add_option("--weight", fus.weight, "weight on the first file");
  fus_cmd->add_flag("--no-normalize", fus.no_normalize);
  fus_cmd->callback([&] {
    guard([&] {
      cfg_dbl(cfg, f_w, "fuse.weight", fus.weight);
      run_fuse(fus);
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  return rc;
}
