// Copyright 2026 The gsdlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/model.hpp"

namespace gsdlab {

// Gaussian class-conditional mixture with a controlled separation between
// class means. Features are rescaled to max-norm <= 1 after generation.
struct TaskSpec {
  std::size_t input_dim = 8;     // d
  std::size_t num_classes = 2;   // C
  std::size_t n_train = 256;
  std::size_t n_test = 256;
  std::size_t n_public = 256;
  double margin = 4.0;  // distance between class means before rescaling
  double noise = 0.5;   // per-coordinate Gaussian noise before rescaling
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ShiftKind { kRotation, kLabelFlip, kFeatureMask };

struct ShiftSpec {
  ShiftKind kind = ShiftKind::kRotation;
  // radians for rotation (|magnitude| <= 2*pi), flip probability or masked
  // coordinate fraction in [0, 1] otherwise.
  double magnitude = 0.0;

  void validate() const;
  std::string name() const;
};

// train/test are disjoint splits; pool holds the held-out examples that
// public variants are derived from. For a shifted variant, train and pool
// coincide (the shifted pool).
struct Dataset {
  TaskSpec spec;
  std::string name = "private";
  Batch train, test, pool;
  // Columns span the plane the rotation shift acts in: the class-mean axis
  // and a fixed mean-free direction.
  Matrix rotation_plane;  // d x 2
  std::optional<ShiftSpec> shift;
};

Dataset make_task(const TaskSpec& spec);

// Derives a public dataset from the held-out pool:
//  rotation:     rotate features by `magnitude` inside the dataset's fixed
//                2-plane (labels unchanged)
//  label-flip:   flip each label with probability `magnitude`
//  feature-mask: zero round(magnitude*d) coordinates, chosen by seed
Dataset make_shifted_public(const Dataset& ds, const ShiftSpec& shift,
                            std::uint64_t seed);

// Batch <-> matrix with the label as the trailing column.
Matrix batch_to_matrix(const Batch& b);
Batch batch_from_matrix(const Matrix& m);
Batch batch_from_csv(const std::string& path);
void write_batch_csv(const Batch& b, const std::string& path);

struct SynthRequest {
  TaskSpec task;
  std::vector<ShiftSpec> shifts;
  std::string name = "task";
};

SynthRequest synth_request_from_json_text(const std::string& text);

// Writes train.csv, test.csv, one public_*.csv per shift, and manifest.json
// into out_dir. Returns the manifest text.
std::string synth_make(const SynthRequest& req, const std::string& out_dir);

}  // namespace gsdlab
