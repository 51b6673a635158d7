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
#ifndef DRIVEDET_SUPPRESSION_H_
#define DRIVEDET_SUPPRESSION_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "absl/types/span.h"
#include "drivedet/box.h"

namespace drivedet {

struct ScoredBox {
  Box box;
  double score = 0.0;
  int class_id = 0;

  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

// Greedy non-maximum suppression. Repeatedly keeps the highest-scoring
// remaining item and drops every remaining item whose IoU with it is strictly
// greater than `iou_threshold`. Equal scores are resolved by input position
// (earlier wins). Output is in descending score order, truncated at max_keep.
std::vector<ScoredBox> GreedyNms(absl::Span<const ScoredBox> items,
                                 double iou_threshold,
                                 std::optional<std::size_t> max_keep = {});

// Same as GreedyNms but returns indices into `items`.
std::vector<std::size_t> GreedyNmsIndices(
    absl::Span<const ScoredBox> items, double iou_threshold,
    std::optional<std::size_t> max_keep = {});

// Reference implementation of the GreedyNms contract: a literal quadratic
// select-then-suppress loop with no presorting. Kept separate from the fast
// path so the two can be checked against each other.
std::vector<ScoredBox> NmsOracle(absl::Span<const ScoredBox> items,
                                 double iou_threshold,
                                 std::optional<std::size_t> max_keep = {});

// Per-class NMS: class-agnostic GreedyNms within each class_id, merged by
// descending score, then ascending class_id, then input position.
std::vector<ScoredBox> BatchedNms(absl::Span<const ScoredBox> items,
                                  double iou_threshold,
                                  std::optional<std::size_t> max_keep = {});

// The k highest-scoring items in descending score order; ties keep input order.
std::vector<ScoredBox> TopK(absl::Span<const ScoredBox> items, std::size_t k);

// Index form of TopK over a plain score array.
std::vector<std::size_t> TopKIndices(absl::Span<const double> scores,
                                     std::size_t k);

}  // namespace drivedet

#endif  // DRIVEDET_SUPPRESSION_H_
