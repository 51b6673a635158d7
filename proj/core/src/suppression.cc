/* Copyright 2026 The Drivedet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "drivedet/suppression.h"

#include <algorithm>
#include <map>
#include <numeric>

namespace drivedet {
namespace {

// Descending score, then ascending position.
struct ByScoreThenIndex {
  absl::Span<const double> scores;
  bool operator()(std::size_t a, std::size_t b) const {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  }
};

std::vector<double> ScoresOf(absl::Span<const ScoredBox> items) {
  std::vector<double> s(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) s[i] = items[i].score;
  return s;
}

std::vector<ScoredBox> Gather(absl::Span<const ScoredBox> items,
                              const std::vector<std::size_t>& idx) {
  std::vector<ScoredBox> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(items[i]);
  return out;
}

}  // namespace

std::vector<std::size_t> TopKIndices(absl::Span<const double> scores,
                                     std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const ByScoreThenIndex cmp{scores};
  if (k >= idx.size()) {
    std::sort(idx.begin(), idx.end(), cmp);
    return idx;
  }
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(), cmp);
  idx.resize(k);
  std::sort(idx.begin(), idx.end(), cmp);
  return idx;
}

std::vector<ScoredBox> TopK(absl::Span<const ScoredBox> items, std::size_t k) {
  const std::vector<double> scores = ScoresOf(items);
  return Gather(items, TopKIndices(scores, k));
}

std::vector<std::size_t> GreedyNmsIndices(absl::Span<const ScoredBox> items,
                                          double iou_threshold,
                                          std::optional<std::size_t> max_keep) {
  const std::vector<double> scores = ScoresOf(items);
  const std::vector<std::size_t> order =
      TopKIndices(scores, scores.size());
  const std::size_t limit = max_keep.value_or(items.size());
  std::vector<std::size_t> kept;
  if (limit == 0) return kept;
  kept.reserve(std::min(limit, items.size()));
  for (std::size_t candidate : order) {
    const Box& box = items[candidate].box;
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (Iou(items[k].box, box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) continue;
    kept.push_back(candidate);
    if (kept.size() == limit) break;
  }
  return kept;
}

std::vector<ScoredBox> GreedyNms(absl::Span<const ScoredBox> items,
                                 double iou_threshold,
                                 std::optional<std::size_t> max_keep) {
  return Gather(items, GreedyNmsIndices(items, iou_threshold, max_keep));
}

std::vector<ScoredBox> NmsOracle(absl::Span<const ScoredBox> items,
                                 double iou_threshold,
                                 std::optional<std::size_t> max_keep) {
  std::vector<bool> alive(items.size(), true);
  std::vector<ScoredBox> out;
  const std::size_t limit = max_keep.value_or(items.size());
  while (out.size() < limit) {
    // Select the best remaining item by linear scan.
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!alive[i]) continue;
      if (!best.has_value() || items[i].score > items[*best].score) best = i;
    }
    if (!best.has_value()) break;
    out.push_back(items[*best]);
    alive[*best] = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (alive[i] && Iou(items[*best].box, items[i].box) > iou_threshold) {
        alive[i] = false;
      }
    }
  }
  return out;
}

std::vector<ScoredBox> BatchedNms(absl::Span<const ScoredBox> items,
                                  double iou_threshold,
                                  std::optional<std::size_t> max_keep) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < items.size(); ++i) {
    by_class[items[i].class_id].push_back(i);
  }
  std::vector<std::size_t> kept;
  for (const auto& [class_id, members] : by_class) {
    const std::vector<ScoredBox> subset = Gather(items, members);
    for (std::size_t local :
         GreedyNmsIndices(subset, iou_threshold, max_keep)) {
      kept.push_back(members[local]);
    }
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].score != items[b].score) return items[a].score > items[b].score;
    if (items[a].class_id != items[b].class_id) {
      return items[a].class_id < items[b].class_id;
    }
    return a < b;
  });
  if (max_keep.has_value() && kept.size() > *max_keep) kept.resize(*max_keep);
  return Gather(items, kept);
}

}  // namespace drivedet
