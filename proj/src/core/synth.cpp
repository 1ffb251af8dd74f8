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

#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "core/linalg.hpp"
#include "core/rng.hpp"

namespace gsdlab {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846264338;

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

// Rotation of x by phi inside the plane spanned by the orthonormal pair
// (a, b): the (a, b) components rotate, the orthogonal complement is fixed.
void rotate_in_plane(Matrix& features, const Matrix& plane, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  const std::size_t d = features.cols();
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto row = features.row(i);
    double xa = 0.0, xb = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      xa += plane(j, 0) * row[j];
      xb += plane(j, 1) * row[j];
    }
    const double ra = c * xa - s * xb;
    const double rb = s * xa + c * xb;
    for (std::size_t j = 0; j < d; ++j)
      row[j] += (ra - xa) * plane(j, 0) + (rb - xb) * plane(j, 1);
  }
}

Batch apply_shift(const Batch& src, const Dataset& ds, const ShiftSpec& shift,
                  std::uint64_t seed) {
  Batch out = src;
  switch (shift.kind) {
    case ShiftKind::kRotation:
      rotate_in_plane(out.features, ds.rotation_plane, shift.magnitude);
      break;
    case ShiftKind::kLabelFlip: {
      Rng rng(seed);
      const std::size_t c = ds.spec.num_classes;
      for (double& y : out.labels) {
        if (rng.uniform01() < shift.magnitude) {
          if (c == 2) {
            y = 1.0 - y;
          } else {
            double ny = static_cast<double>(rng.below(c - 1));
            if (ny >= y) ny += 1.0;
            y = ny;
          }
        }
      }
      break;
    }
    case ShiftKind::kFeatureMask: {
      Rng rng(seed);
      const std::size_t d = out.features.cols();
      const std::size_t count = static_cast<std::size_t>(
          std::llround(shift.magnitude * static_cast<double>(d)));
      const auto coords = sample_without_replacement(d, count, rng);
      for (std::size_t j : coords)
        for (std::size_t i = 0; i < out.features.rows(); ++i)
          out.features(i, j) = 0.0;
      break;
    }
  }
  return out;
}

}  // namespace

void TaskSpec::validate() const {
  require(n_train >= 1 && n_test >= 1 && n_public >= 1,
          Status::kInvalidArgument, "task: example counts must be positive");
  require(num_classes >= 2, Status::kInvalidArgument,
          "task: need at least two classes");
  require(margin >= 0.0 && noise >= 0.0, Status::kInvalidArgument,
          "task: margin and noise must be non-negative");
  const std::size_t dirs = num_classes == 2 ? 2 : num_classes + 1;
  require(input_dim >= dirs, Status::kInvalidArgument,
          "task: input_dim too small for the class layout (need "
          "num_classes+1, or 2 for binary)");
}

void ShiftSpec::validate() const {
  switch (kind) {
    case ShiftKind::kRotation:
      require(std::abs(magnitude) <= kTwoPi, Status::kBadMagnitude,
              "shift: rotation magnitude must lie in [-2*pi, 2*pi]");
      break;
    case ShiftKind::kLabelFlip:
      require(magnitude >= 0.0 && magnitude <= 1.0, Status::kBadMagnitude,
              "shift: flip probability must lie in [0, 1]");
      break;
    case ShiftKind::kFeatureMask:
      require(magnitude >= 0.0 && magnitude <= 1.0, Status::kBadMagnitude,
              "shift: masked fraction must lie in [0, 1]");
      break;
  }
}

std::string ShiftSpec::name() const {
  const char* kind_name = kind == ShiftKind::kRotation      ? "rotation"
                          : kind == ShiftKind::kLabelFlip   ? "label-flip"
                                                            : "feature-mask";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s-%.4f", kind_name, magnitude);
  return buf;
}

Dataset make_task(const TaskSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t d = spec.input_dim;
  const std::size_t c = spec.num_classes;
  const std::size_t dirs = c == 2 ? 2 : c + 1;

  // Orthonormal direction frame: class-mean axes first, one spare mean-free
  // direction last (the rotation partner).
  const Subspace frame = orthonormalize(gaussian_matrix(d, dirs, rng));

  // Class means with pairwise distance `margin`. Binary tasks sit at
  // +/- margin/2 on the first axis; multiclass means go on separate axes.
  std::vector<std::vector<double>> means(c, std::vector<double>(d, 0.0));
  if (c == 2) {
    for (std::size_t j = 0; j < d; ++j) {
      means[0][j] = -0.5 * spec.margin * frame.basis(j, 0);
      means[1][j] = 0.5 * spec.margin * frame.basis(j, 0);
    }
  } else {
    const double r = spec.margin / std::sqrt(2.0);
    for (std::size_t cls = 0; cls < c; ++cls)
      for (std::size_t j = 0; j < d; ++j)
        means[cls][j] = r * frame.basis(j, cls);
  }

  const std::size_t total = spec.n_train + spec.n_test + spec.n_public;
  Matrix x(total, d);
  std::vector<double> y(total, 0.0);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t cls = static_cast<std::size_t>(rng.below(c));
    y[i] = static_cast<double>(cls);
    auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j)
      row[j] = means[cls][j] + spec.noise * rng.normal();
  }
  const double scale = max_abs(x);
  if (scale > 0.0)
    for (double& v : x.data()) v /= scale;

  Dataset ds;
  ds.spec = spec;
  ds.rotation_plane = Matrix(d, 2);
  for (std::size_t j = 0; j < d; ++j) {
    ds.rotation_plane(j, 0) = frame.basis(j, 0);
    ds.rotation_plane(j, 1) = frame.basis(j, dirs - 1);
  }
  auto slice = [&](std::size_t lo, std::size_t n) {
    Batch b;
    b.features = Matrix(n, d);
    b.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = x.row(lo + i);
      std::copy(src.begin(), src.end(), b.features.row(i).begin());
      b.labels[i] = y[lo + i];
    }
    return b;
  };
  ds.train = slice(0, spec.n_train);
  ds.test = slice(spec.n_train, spec.n_test);
  ds.pool = slice(spec.n_train + spec.n_test, spec.n_public);
  return ds;
}

Dataset make_shifted_public(const Dataset& ds, const ShiftSpec& shift,
                            std::uint64_t seed) {
  shift.validate();
  require(ds.pool.size() >= 1, Status::kEmptyMatrix,
          "make_shifted_public: dataset has no held-out pool");
  Dataset out;
  out.spec = ds.spec;
  out.name = shift.name();
  out.rotation_plane = ds.rotation_plane;
  out.shift = shift;
  out.train = apply_shift(ds.pool, ds, shift, seed);
  out.pool = out.train;
  if (ds.test.size() > 0)
    out.test = apply_shift(ds.test, ds, shift, derive_seed(seed, 0x7e57));
  return out;
}

Matrix batch_to_matrix(const Batch& b) {
  Matrix m(b.features.rows(), b.features.cols() + 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto src = b.features.row(i);
    auto dst = m.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[b.features.cols()] = b.labels[i];
  }
  return m;
}

Batch batch_from_matrix(const Matrix& m) {
  require(m.cols() >= 2, Status::kDimMismatch,
          "batch: need at least one feature column plus the label column");
  require(m.rows() >= 1, Status::kEmptyMatrix, "batch: no examples");
  Batch b;
  b.features = Matrix(m.rows(), m.cols() - 1);
  b.labels.resize(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto src = m.row(i);
    std::copy(src.begin(), src.end() - 1, b.features.row(i).begin());
    b.labels[i] = src[m.cols() - 1];
  }
  return b;
}

Batch batch_from_csv(const std::string& path) {
  return batch_from_matrix(read_csv(path));
}

void write_batch_csv(const Batch& b, const std::string& path) {
  write_csv(batch_to_matrix(b), path);
}

SynthRequest synth_request_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Status::kParseError, std::string("synth request: ") + e.what());
  }
  SynthRequest req;
  try {
    if (j.contains("name")) req.name = j["name"].get<std::string>();
    const json& t = j.contains("task") ? j["task"] : j;
    if (t.contains("input_dim")) req.task.input_dim = t["input_dim"].get<std::size_t>();
    if (t.contains("num_classes")) req.task.num_classes = t["num_classes"].get<std::size_t>();
    if (t.contains("n_train")) req.task.n_train = t["n_train"].get<std::size_t>();
    if (t.contains("n_test")) req.task.n_test = t["n_test"].get<std::size_t>();
    if (t.contains("n_public")) req.task.n_public = t["n_public"].get<std::size_t>();
    if (t.contains("margin")) req.task.margin = t["margin"].get<double>();
    if (t.contains("noise")) req.task.noise = t["noise"].get<double>();
    if (t.contains("seed")) req.task.seed = t["seed"].get<std::uint64_t>();
    if (j.contains("shifts")) {
      for (const json& js : j["shifts"]) {
        ShiftSpec s;
        const std::string kind = js.at("kind").get<std::string>();
        if (kind == "rotation") s.kind = ShiftKind::kRotation;
        else if (kind == "label-flip") s.kind = ShiftKind::kLabelFlip;
        else if (kind == "feature-mask") s.kind = ShiftKind::kFeatureMask;
        else fail(Status::kParseError, "synth request: unknown shift kind '" + kind + "'");
        s.magnitude = js.at("magnitude").get<double>();
        s.validate();
        req.shifts.push_back(s);
      }
    }
  } catch (const json::exception& e) {
    fail(Status::kParseError, std::string("synth request: ") + e.what());
  }
  req.task.validate();
  return req;
}

std::string synth_make(const SynthRequest& req, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(Status::kIoError, "synth: cannot create '" + out_dir + "'");

  const Dataset ds = make_task(req.task);
  json manifest = json::array();
  auto add_entry = [&](const std::string& name, const std::string& file,
                       std::size_t n, const std::optional<ShiftSpec>& shift) {
    json e;
    e["name"] = name;
    e["file"] = file;
    e["n"] = n;
    e["d"] = req.task.input_dim;
    e["num_classes"] = req.task.num_classes;
    e["seed"] = req.task.seed;
    if (shift) {
      json s;
      s["kind"] = shift->kind == ShiftKind::kRotation      ? "rotation"
                  : shift->kind == ShiftKind::kLabelFlip   ? "label-flip"
                                                           : "feature-mask";
      s["magnitude"] = shift->magnitude;
      e["shift"] = s;
    } else {
      e["shift"] = nullptr;
    }
    manifest.push_back(e);
  };

  write_batch_csv(ds.train, (fs::path(out_dir) / "train.csv").string());
  add_entry(req.name + "-train", "train.csv", ds.train.size(), std::nullopt);
  write_batch_csv(ds.test, (fs::path(out_dir) / "test.csv").string());
  add_entry(req.name + "-test", "test.csv", ds.test.size(), std::nullopt);

  for (std::size_t i = 0; i < req.shifts.size(); ++i) {
    const Dataset pub =
        make_shifted_public(ds, req.shifts[i], derive_seed(req.task.seed, i));
    const std::string file =
        "public_" + std::to_string(i) + "_" + req.shifts[i].name() + ".csv";
    write_batch_csv(pub.train, (fs::path(out_dir) / file).string());
    add_entry(pub.name, file, pub.train.size(), req.shifts[i]);
  }

  const std::string text = manifest.dump(2) + "\n";
  write_text_file((fs::path(out_dir) / "manifest.json").string(), text);
  return text;
}

}  // namespace gsdlab
