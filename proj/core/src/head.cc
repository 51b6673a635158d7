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
#include "drivedet/head.h"

#include <algorithm>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace drivedet {

ReplayHead::ReplayHead(std::vector<HeadRecord> records, int num_stages)
    : num_stages_(num_stages) {
  int max_stages = 0;
  for (auto& r : records) {
    max_stages = std::max(max_stages, static_cast<int>(r.stages.size()));
    std::string id = r.frame_id;
    records_.emplace(std::move(id), std::move(r));
  }
  if (num_stages_ < 0) num_stages_ = max_stages;
}

absl::StatusOr<const HeadRecord*> ReplayHead::Find(const Frame& frame) const {
  auto it = records_.find(frame.frame_id);
  if (it == records_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no recorded head outputs for frame '", frame.frame_id,
                     "'"));
  }
  return &it->second;
}

absl::StatusOr<std::vector<LevelOutputs>> ReplayHead::Rpn(
    const Frame& frame, const AnchorPyramid&) const {
  absl::StatusOr<const HeadRecord*> r = Find(frame);
  if (!r.ok()) return r.status();
  return (*r)->rpn;
}

absl::StatusOr<LevelOutputs> ReplayHead::Stage(const Frame& frame, int stage,
                                               absl::Span<const Box>) const {
  absl::StatusOr<const HeadRecord*> r = Find(frame);
  if (!r.ok()) return r.status();
  if (stage < 0 || stage >= static_cast<int>((*r)->stages.size())) {
    return absl::OutOfRangeError(absl::StrCat(
        "frame '", frame.frame_id, "' has no recorded outputs for stage ",
        stage + 1));
  }
  return (*r)->stages[static_cast<std::size_t>(stage)];
}

absl::StatusOr<std::vector<LevelOutputs>> ReplayHead::Dense(
    const Frame& frame, const AnchorPyramid&) const {
  absl::StatusOr<const HeadRecord*> r = Find(frame);
  if (!r.ok()) return r.status();
  return (*r)->dense;
}

absl::StatusOr<std::vector<LevelOutputs>> RecordingHead::Rpn(
    const Frame& frame, const AnchorPyramid& anchors) const {
  auto out = inner_->Rpn(frame, anchors);
  if (out.ok()) {
    std::lock_guard<std::mutex> lock(mu_);
    HeadRecord& r = records_[frame.frame_id];
    r.frame_id = frame.frame_id;
    r.rpn = *out;
  }
  return out;
}

absl::StatusOr<LevelOutputs> RecordingHead::Stage(
    const Frame& frame, int stage, absl::Span<const Box> boxes) const {
  auto out = inner_->Stage(frame, stage, boxes);
  if (out.ok()) {
    std::lock_guard<std::mutex> lock(mu_);
    HeadRecord& r = records_[frame.frame_id];
    r.frame_id = frame.frame_id;
    if (r.stages.size() <= static_cast<std::size_t>(stage)) {
      r.stages.resize(static_cast<std::size_t>(stage) + 1);
    }
    r.stages[static_cast<std::size_t>(stage)] = *out;
  }
  return out;
}

absl::StatusOr<std::vector<LevelOutputs>> RecordingHead::Dense(
    const Frame& frame, const AnchorPyramid& anchors) const {
  auto out = inner_->Dense(frame, anchors);
  if (out.ok()) {
    std::lock_guard<std::mutex> lock(mu_);
    HeadRecord& r = records_[frame.frame_id];
    r.frame_id = frame.frame_id;
    r.dense = *out;
  }
  return out;
}

std::vector<HeadRecord> RecordingHead::Records() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<HeadRecord> out;
  out.reserve(records_.size());
  for (const auto& [id, r] : records_) out.push_back(r);
  return out;
}

}  // namespace drivedet
