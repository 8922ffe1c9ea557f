#pragma once

#include <utility>
#include <vector>

#include "hcp/boxes.hpp"
#include "hcp/image.hpp"
#include "hcp/ncut.hpp"

namespace hcp {

struct HSConfig {
  int m = 10;              // clusters
  int k = 1;               // picks per cluster (1 at train, 50 at test)
  long long min_area = 900;
  double max_ratio = 4.0;
  int crop_size = 64;
};

// Full trace of one selection pass, enough to drive both the crop stage and
// the debugging dump.
struct HSelection {
  std::vector<int> cluster_labels;   // per input proposal
  std::vector<uint8_t> survived;     // filter verdict per input proposal
  std::vector<int> chosen;           // proposal indices in emission order
  std::vector<int> chosen_cluster;   // cluster of each chosen entry
};

// Filter step alone: drops (proposal, cluster) pairs whose box has area below
// min_area or aspect ratio above max_ratio. Clustering precedes filtering.
std::vector<std::pair<int, int>> filter_hypotheses(
    const std::vector<ScoredProposal>& proposals,
    const std::vector<int>& cluster_labels, const HSConfig& cfg);

// Cluster all proposals into min(m, n) groups, filter, take the top k of
// each cluster by score, then backfill from the remaining survivors by score
// until min(m*k, survivors) boxes are chosen. Emission order is cluster-major
// (clusters numbered by smallest member), backfill last.
HSelection select_boxes(const std::vector<ScoredProposal>& proposals,
                        const HSConfig& cfg);

// Square bilinear crops for the chosen boxes, in emission order.
std::vector<ImageU8> hypothesis_crops(const ImageU8& image,
                                      const std::vector<ScoredProposal>& proposals,
                                      const HSelection& sel, int crop_size);

// select_boxes + hypothesis_crops. Throws DataError when nothing survives.
std::vector<ImageU8> select_hypotheses(const ImageU8& image,
                                       const std::vector<ScoredProposal>& proposals,
                                       const HSConfig& cfg);

}  // namespace hcp
