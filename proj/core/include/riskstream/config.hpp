#pragma once

#include <filesystem>
#include <string>

#include "riskstream/feature_frame.hpp"
#include "riskstream/gbdt.hpp"
#include "riskstream/profile_store.hpp"
#include "riskstream/simulator.hpp"

namespace riskstream {

struct SimulatorSection {
  double rate_per_day{480.0};
  Timestamp horizon{days(125).seconds};
  std::uint64_t seed{1};
  PopulationSpec population;
  AmountRange amounts{Money{500}, Money{50000}, 1.3};
  DriftScript script;
  DelayModel delays;
};

struct ProfileSection {
  WindowConfig windows;
  Duration bucket_granularity{hours(1)};
  double smoothing_alpha{0.5};
  FeedbackPolicy policy;
  std::vector<EntityDescriptor> descriptors;
};

struct EvaluationSection {
  SplitSpec::Mode split_mode{SplitSpec::Mode::temporal};
  double train_fraction{0.7};
  Timestamp holdout_boundary{days(98).seconds};
  double fpr_anchor{0.005};
  double tpr_anchor{0.5};
};

// The whole run, one versioned JSON document. Durations are strings like
// "4w", "1d", "3h"; a bare integer means seconds. Every field has a default
// (`riskstream config --print-defaults` emits them all); unknown fields are
// rejected. All randomness flows from simulator.seed via named sub-seeds.
struct RunConfig {
  int version{1};
  SimulatorSection simulator;
  ProfileSection profile;
  UpdateSchedule schedule;
  Hyperparams model;
  EvaluationSection evaluation;
  std::string output_dir{"out"};

  static RunConfig defaults();
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::filesystem::path& path);
  std::string to_json() const;

  // Cross-field validation with named-field diagnostics; throws ConfigError.
  void validate() const;
};

}  // namespace riskstream
