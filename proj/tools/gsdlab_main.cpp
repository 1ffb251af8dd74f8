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

// Command-line front end; talks to the shared library through the C API
// only. Exit codes: 0 success (and pass, for `experiment`), 1 error,
// 2 experiment ran but failed its thresholds.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gsdlab.h"

namespace {

int fail_with(gsdlab_status rc) {
  std::cerr << "error (" << gsdlab_status_name(rc) << "): " << gsdlab_last_error()
            << "\n";
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read '" << path << "'\n";
    std::exit(1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_and_free(char* s) {
  if (s == nullptr) return;
  std::cout << s << "\n";
  gsdlab_string_free(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gsdlab - gradient subspace distance toolkit"};
  app.require_subcommand(1);

  // gsd
  std::string model_path, private_path, public_path;
  std::size_t k = 16;
  bool random_labels = false, raw = false;
  std::uint64_t model_seed = 0, label_seed = 0;
  auto* gsd_cmd = app.add_subcommand(
      "gsd", "distance between private and public gradient subspaces");
  gsd_cmd->add_option("--model", model_path, "model spec JSON file")->required();
  gsd_cmd->add_option("--private", private_path, "private batch CSV")->required();
  gsd_cmd->add_option("--public", public_path, "public batch CSV")->required();
  gsd_cmd->add_option("--k", k, "subspace dimension (default 16)");
  gsd_cmd->add_option("--model-seed", model_seed, "weight init seed");
  gsd_cmd->add_flag("--random-labels", random_labels,
                    "relabel both batches uniformly at random");
  gsd_cmd->add_option("--label-seed", label_seed, "seed for --random-labels");
  gsd_cmd->add_flag("--raw", raw,
                    "report the raw distance in [0, sqrt(k)] as the headline "
                    "instead of the normalized one");

  // dp-gsd
  double epsilon = 1.0, delta = 1e-5, clip = 1.0;
  std::uint64_t seed = 0;
  auto* dp_cmd = app.add_subcommand(
      "dp-gsd", "differentially private distance (k = 1)");
  dp_cmd->add_option("--model", model_path, "model spec JSON file")->required();
  dp_cmd->add_option("--private", private_path, "private batch CSV")->required();
  dp_cmd->add_option("--public", public_path, "public batch CSV")->required();
  dp_cmd->add_option("--epsilon", epsilon, "privacy parameter")->required();
  dp_cmd->add_option("--delta", delta, "privacy parameter (default 1e-5)");
  dp_cmd->add_option("--clip", clip, "row clip norm (default 1)");
  dp_cmd->add_option("--seed", seed, "sampler seed");
  dp_cmd->add_option("--model-seed", model_seed, "weight init seed");
  dp_cmd->add_flag("--random-labels", random_labels,
                   "relabel both batches uniformly at random");
  dp_cmd->add_option("--label-seed", label_seed, "seed for --random-labels");
  dp_cmd->add_flag("--raw", raw, "headline the raw distance");

  // gep-train
  std::string config_path, out_path, trace_path, test_path;
  auto* gep_cmd = app.add_subcommand(
      "gep-train", "private training on a public gradient subspace");
  gep_cmd->add_option("--config", config_path, "training config JSON file")
      ->required();
  gep_cmd->add_option("--private", private_path, "private train CSV")->required();
  gep_cmd->add_option("--test", test_path, "held-out test CSV");
  gep_cmd->add_option("--public", public_path, "public batch CSV")->required();
  gep_cmd->add_option("--out", out_path, "result JSON path")->required();
  gep_cmd->add_option("--trace", trace_path,
                      "trace CSV path (default: <out>_trace.csv)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "synthetic task generation");
  std::string synth_spec, synth_out;
  auto* synth_make_cmd =
      synth_cmd->add_subcommand("make", "generate a task and public variants");
  synth_make_cmd->add_option("--spec", synth_spec, "task spec JSON file")
      ->required();
  synth_make_cmd->add_option("--out", synth_out, "output directory")->required();

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run a harness experiment");
  exp_cmd->add_option("--config", config_path, "experiment config JSON file")
      ->required();
  exp_cmd->add_option("--out", out_path, "report JSON path");

  CLI11_PARSE(app, argc, argv);

  if (gsd_cmd->parsed()) {
    char* report = nullptr;
    const gsdlab_status rc = gsdlab_gsd_run(
        read_file(model_path).c_str(), model_seed, private_path.c_str(),
        public_path.c_str(), k, random_labels ? 1 : 0, label_seed,
        raw ? 1 : 0, &report);
    if (rc != GSDLAB_OK) return fail_with(rc);
    print_and_free(report);
    return 0;
  }

  if (dp_cmd->parsed()) {
    char* report = nullptr;
    const gsdlab_status rc = gsdlab_dp_gsd_run(
        read_file(model_path).c_str(), model_seed, private_path.c_str(),
        public_path.c_str(), epsilon, delta, clip, seed,
        random_labels ? 1 : 0, label_seed, raw ? 1 : 0, &report);
    if (rc != GSDLAB_OK) return fail_with(rc);
    print_and_free(report);
    return 0;
  }

  if (gep_cmd->parsed()) {
    if (trace_path.empty()) {
      trace_path = out_path;
      const std::string suffix = ".json";
      if (trace_path.size() > suffix.size() &&
          trace_path.compare(trace_path.size() - suffix.size(), suffix.size(),
                             suffix) == 0)
        trace_path.resize(trace_path.size() - suffix.size());
      trace_path += "_trace.csv";
    }
    char* summary = nullptr;
    const gsdlab_status rc = gsdlab_gep_train_run(
        read_file(config_path).c_str(), private_path.c_str(),
        test_path.empty() ? "" : test_path.c_str(), public_path.c_str(),
        out_path.c_str(), trace_path.c_str(), &summary);
    if (rc != GSDLAB_OK) return fail_with(rc);
    print_and_free(summary);
    return 0;
  }

  if (synth_make_cmd->parsed()) {
    char* manifest = nullptr;
    const gsdlab_status rc = gsdlab_synth_make(read_file(synth_spec).c_str(),
                                               synth_out.c_str(), &manifest);
    if (rc != GSDLAB_OK) return fail_with(rc);
    print_and_free(manifest);
    return 0;
  }

  if (exp_cmd->parsed()) {
    int passed = 0;
    char* report = nullptr;
    const gsdlab_status rc = gsdlab_experiment_run(
        read_file(config_path).c_str(),
        out_path.empty() ? nullptr : out_path.c_str(), &passed, &report);
    if (rc != GSDLAB_OK) return fail_with(rc);
    print_and_free(report);
    return passed ? 0 : 2;
  }

  return 1;
}
