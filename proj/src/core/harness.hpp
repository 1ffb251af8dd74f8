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

#include <string>
#include <vector>

#include <json.hpp>

#include "core/gep.hpp"
#include "core/gsd.hpp"
#include "core/privacy.hpp"
#include "core/synth.hpp"

namespace gsdlab {

enum class ExperimentKind {
  kMonotonicity,
  kOrderingStability,
  kLemma1Audit,
  kSpectrum,
  kDppcaUtility,
  kDpgsdCloseness,
};

const char* experiment_kind_name(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kMonotonicity;
  std::string description;
  TaskSpec task;
  std::vector<ShiftSpec> shifts;
  ModelSpec model;
  GepConfig gep;
  PrivacyParams privacy;
  SgdConfig sgd;
  std::vector<std::uint64_t> seeds{1};
  std::size_t gsd_k = 4;
  std::size_t gsd_batch = 256;
  bool use_averaged_model = false;

  // lemma1-audit
  std::size_t instances = 1000;
  // spectrum
  std::size_t energy_k = 16;
  std::size_t checkpoint_every = 10;
  // dppca-utility
  std::vector<std::size_t> m_grid{100, 1000, 10000};
  std::size_t ambient_dim = 20;
  double eigengap = 0.5;
  // dpgsd-closeness
  CloseApprox close;
  std::size_t trials = 100;
  std::size_t probe_samples = 2000;
  std::size_t max_m = 100000;

  std::string output;  // report path; when set, a CSV side table is written too

  void validate() const;
};

ExperimentConfig experiment_config_from_json_text(const std::string& text);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// Shared JSON converters for the nested config blocks.
TaskSpec task_spec_from_json(const nlohmann::json& j);
nlohmann::json task_spec_to_json(const TaskSpec& t);
ShiftSpec shift_spec_from_json(const nlohmann::json& j);
ModelSpec model_spec_from_json(const nlohmann::json& j);
GepConfig gep_config_from_json(const nlohmann::json& j);
nlohmann::json gep_config_to_json(const GepConfig& g);
PrivacyParams privacy_params_from_json(const nlohmann::json& j);
nlohmann::json privacy_params_to_json(const PrivacyParams& p);
SgdConfig sgd_config_from_json(const nlohmann::json& j);

struct ExperimentReport {
  nlohmann::json doc;
  bool passed = false;
  std::string side_table_csv;  // per-record rows, for plotting

  std::string to_json_text() const { return doc.dump(2) + "\n"; }
};

ExperimentReport run_monotonicity(const ExperimentConfig& cfg);
ExperimentReport run_ordering_stability(const ExperimentConfig& cfg);
ExperimentReport run_lemma1_audit(const ExperimentConfig& cfg);
ExperimentReport run_spectrum(const ExperimentConfig& cfg);
ExperimentReport run_dppca_utility(const ExperimentConfig& cfg);
ExperimentReport run_dpgsd_closeness(const ExperimentConfig& cfg);

// Dispatches on cfg.kind and, when cfg.output is set, writes the report JSON
// there plus the side table next to it.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);
double median(std::vector<double> v);

}  // namespace gsdlab
