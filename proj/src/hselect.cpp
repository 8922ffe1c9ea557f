#include "hcp/hselect.hpp"

#include <algorithm>

namespace hcp {

namespace {

bool box_survives(const Box& b, const HSConfig& cfg) {
  if (b.area() < cfg.min_area) return false;
  double ratio = double(std::max(b.w, b.h)) / double(std::min(b.w, b.h));
  return ratio <= cfg.max_ratio;
}

}  // namespace

std::vector<std::pair<int, int>> filter_hypotheses(
    const std::vector<ScoredProposal>& proposals,
    const std::vector<int>& cluster_labels, const HSConfig& cfg) {
  if (proposals.size() != cluster_labels.size())
    throw ShapeError("filter: label count does not match proposals");
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < proposals.size(); ++i)
    if (box_survives(proposals[i].box, cfg))
      out.emplace_back(int(i), cluster_labels[i]);
  return out;
}

HSelection select_boxes(const std::vector<ScoredProposal>& proposals,
                        const HSConfig& cfg) {
  if (cfg.m < 1 || cfg.k < 1 || cfg.min_area < 1 || cfg.max_ratio <= 1.0)
    throw ConfigError("hs: bad configuration");
  const int n = int(proposals.size());
  if (n < 1) throw DataError("hs: no proposals to select from");

  HSelection sel;

  std::vector<Box> boxes;
  boxes.reserve(size_t(n));
  for (const ScoredProposal& p : proposals) boxes.push_back(p.box);
  const int m_eff = std::min(cfg.m, n);
  sel.cluster_labels = normalized_cut(build_affinity(boxes), m_eff);

  sel.survived.assign(size_t(n), 0);
  auto surviving = filter_hypotheses(proposals, sel.cluster_labels, cfg);
  for (auto [idx, cluster] : surviving) sel.survived[size_t(idx)] = 1;
  if (surviving.empty()) throw DataError("hs: every hypothesis was filtered out");

  // Survivors per cluster, each list ordered by score.
  std::vector<std::vector<int>> members(static_cast<size_t>(m_eff));
  {
    std::vector<ScoredProposal> surv_props;
    std::vector<int> surv_idx;
    for (auto [idx, cluster] : surviving) {
      surv_props.push_back(proposals[size_t(idx)]);
      surv_idx.push_back(idx);
    }
    for (int rank : order_by_score(surv_props)) {
      int idx = surv_idx[size_t(rank)];
      members[size_t(sel.cluster_labels[size_t(idx)])].push_back(idx);
    }
  }

  std::vector<uint8_t> taken(size_t(n), 0);
  for (int c = 0; c < m_eff; ++c) {
    int take = std::min<int>(cfg.k, int(members[size_t(c)].size()));
    for (int t = 0; t < take; ++t) {
      int idx = members[size_t(c)][size_t(t)];
      sel.chosen.push_back(idx);
      sel.chosen_cluster.push_back(c);
      taken[size_t(idx)] = 1;
    }
  }

  // Backfill from the leftover survivors, highest score first.
  long long target =
      std::min<long long>((long long)cfg.m * cfg.k, (long long)surviving.size());
  if ((long long)sel.chosen.size() < target) {
    std::vector<ScoredProposal> rest_props;
    std::vector<int> rest_idx;
    for (auto [idx, cluster] : surviving)
      if (!taken[size_t(idx)]) {
        rest_props.push_back(proposals[size_t(idx)]);
        rest_idx.push_back(idx);
      }
    for (int rank : order_by_score(rest_props)) {
      if ((long long)sel.chosen.size() >= target) break;
      int idx = rest_idx[size_t(rank)];
      sel.chosen.push_back(idx);
      sel.chosen_cluster.push_back(sel.cluster_labels[size_t(idx)]);
    }
  }
  return sel;
}

std::vector<ImageU8> hypothesis_crops(
    const ImageU8& image, const std::vector<ScoredProposal>& proposals,
    const HSelection& sel, int crop_size) {
  if (crop_size < 1) throw ConfigError("hs: bad crop size");
  std::vector<ImageU8> crops;
  crops.reserve(sel.chosen.size());
  for (int idx : sel.chosen)
    crops.push_back(
        resize_region(image, proposals[size_t(idx)].box, crop_size, crop_size));
  return crops;
}

std::vector<ImageU8> select_hypotheses(
    const ImageU8& image, const std::vector<ScoredProposal>& proposals,
    const HSConfig& cfg) {
  HSelection sel = select_boxes(proposals, cfg);
  return hypothesis_crops(image, proposals, sel, cfg.crop_size);
}

}  // namespace hcp
