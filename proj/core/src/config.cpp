#include "riskstream/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "riskstream/errors.hpp"
#include "riskstream/rng.hpp"

namespace riskstream {

using json = nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& section,
                         std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("unknown field " + (section.empty() ? key : section + "." + key));
    }
  }
}

Duration duration_field(const json& obj, const std::string& section, const char* key,
                        Duration fallback) {
  if (!obj.contains(key)) return fallback;
  const json& value = obj.at(key);
  if (value.is_number_integer()) return seconds(value.get<std::int64_t>());
  if (value.is_string()) return parse_duration(value.get<std::string>());
  throw ConfigError("bad duration in " + section + "." + key);
}

template <typename T>
T scalar_field(const json& obj, const std::string& section, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value in " + section + "." + key);
  }
}

DelaySpec delay_field(const json& obj, const std::string& section, const char* key,
                      DelaySpec fallback) {
  if (!obj.contains(key)) return fallback;
  const std::string path = section + "." + key;
  const json& spec = obj.at(key);
  reject_unknown_keys(spec, path, {"distribution", "min", "max", "value", "emission_probability"});
  DelaySpec out = fallback;
  const std::string family = scalar_field<std::string>(spec, path, "distribution",
                                                       out.family == DelaySpec::Family::fixed
                                                           ? "fixed"
                                                           : "uniform");
  if (family == "fixed") {
    out.family = DelaySpec::Family::fixed;
    out.min = out.max = duration_field(spec, path, "value", out.min);
  } else if (family == "uniform") {
    out.family = DelaySpec::Family::uniform;
    out.min = duration_field(spec, path, "min", out.min);
    out.max = duration_field(spec, path, "max", out.max);
  } else {
    throw ConfigError(path + ".distribution must be fixed or uniform");
  }
  out.emission_probability =
      scalar_field<double>(spec, path, "emission_probability", out.emission_probability);
  return out;
}

json delay_to_json(const DelaySpec& spec) {
  if (spec.family == DelaySpec::Family::fixed) {
    return {{"distribution", "fixed"},
            {"value", format_duration(spec.min)},
            {"emission_probability", spec.emission_probability}};
  }
  return {{"distribution", "uniform"},
          {"min", format_duration(spec.min)},
          {"max", format_duration(spec.max)},
          {"emission_probability", spec.emission_probability}};
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig config;
  for (int i = 0; i < 20; ++i) {
    char name[8];
    std::snprintf(name, sizeof(name), "P%02d", i);
    config.simulator.population.entity_values.emplace_back(name);
  }
  config.simulator.script.segments.push_back(
      {Timestamp{0}, config.simulator.horizon, 0.03, {}, {}, 1.0});
  config.profile.descriptors.push_back({"product", {"product"}});
  config.model.seed = derive_seed(config.simulator.seed, "train");
  return config;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) throw ConfigError("config is not valid JSON");

  RunConfig config = defaults();
  config.simulator.script.segments.clear();
  config.profile.descriptors.clear();
  config.simulator.population.entity_values.clear();

  reject_unknown_keys(root, "",
                      {"version", "simulator", "profile", "schedule", "model", "evaluation",
                       "output_dir"});
  config.version = scalar_field<int>(root, "", "version", config.version);
  config.output_dir = scalar_field<std::string>(root, "", "output_dir", config.output_dir);

  if (root.contains("simulator")) {
    const json& sim = root.at("simulator");
    reject_unknown_keys(sim, "simulator",
                        {"rate_per_day", "horizon", "seed", "population", "amounts", "segments",
                         "delays"});
    auto& out = config.simulator;
    out.rate_per_day = scalar_field<double>(sim, "simulator", "rate_per_day", out.rate_per_day);
    out.horizon = Timestamp{duration_field(sim, "simulator", "horizon",
                                           Duration{out.horizon.seconds})
                                .seconds};
    out.seed = scalar_field<std::uint64_t>(sim, "simulator", "seed", out.seed);

    if (sim.contains("population")) {
      const json& pop = sim.at("population");
      reject_unknown_keys(pop, "simulator.population", {"entity_feature", "values"});
      out.population.entity_feature = scalar_field<std::string>(
          pop, "simulator.population", "entity_feature", out.population.entity_feature);
      if (pop.contains("values")) {
        try {
          out.population.entity_values = pop.at("values").get<std::vector<std::string>>();
        } catch (const json::exception&) {
          throw ConfigError("bad value in simulator.population.values");
        }
      }
    }

    if (sim.contains("amounts")) {
      const json& amounts = sim.at("amounts");
      reject_unknown_keys(amounts, "simulator.amounts",
                          {"min_cents", "max_cents", "fraud_multiplier"});
      out.amounts.min.cents = scalar_field<std::int64_t>(amounts, "simulator.amounts",
                                                         "min_cents", out.amounts.min.cents);
      out.amounts.max.cents = scalar_field<std::int64_t>(amounts, "simulator.amounts",
                                                         "max_cents", out.amounts.max.cents);
      out.amounts.fraud_multiplier = scalar_field<double>(
          amounts, "simulator.amounts", "fraud_multiplier", out.amounts.fraud_multiplier);
    }

    if (sim.contains("segments")) {
      std::size_t index = 0;
      for (const json& seg : sim.at("segments")) {
        const std::string path = "simulator.segments[" + std::to_string(index++) + "]";
        reject_unknown_keys(seg, path,
                            {"start", "end", "fraud_prior", "attack_targets", "population_mix",
                             "fraud_amount_multiplier"});
        DriftSegment segment;
        segment.start = Timestamp{duration_field(seg, path, "start", Duration{0}).seconds};
        segment.end = Timestamp{duration_field(seg, path, "end", Duration{0}).seconds};
        segment.fraud_prior = scalar_field<double>(seg, path, "fraud_prior", 0.0);
        segment.fraud_amount_multiplier =
            scalar_field<double>(seg, path, "fraud_amount_multiplier", 1.0);
        if (seg.contains("attack_targets")) {
          for (const auto& [value, mult] : seg.at("attack_targets").items()) {
            segment.attack_targets[value] = mult.get<double>();
          }
        }
        if (seg.contains("population_mix")) {
          for (const auto& [value, weight] : seg.at("population_mix").items()) {
            segment.population_mix[value] = weight.get<double>();
          }
        }
        out.script.segments.push_back(std::move(segment));
      }
    }

    if (sim.contains("delays")) {
      const json& delays = sim.at("delays");
      reject_unknown_keys(delays, "simulator.delays",
                          {"chargeback", "manual_review_reject", "system_reject"});
      out.delays.chargeback =
          delay_field(delays, "simulator.delays", "chargeback", out.delays.chargeback);
      out.delays.manual_review_reject = delay_field(delays, "simulator.delays",
                                                    "manual_review_reject",
                                                    out.delays.manual_review_reject);
      out.delays.system_reject =
          delay_field(delays, "simulator.delays", "system_reject", out.delays.system_reject);
    }
  }
  if (config.simulator.script.segments.empty()) {
    config.simulator.script.segments.push_back(
        {Timestamp{0}, config.simulator.horizon, 0.03, {}, {}, 1.0});
  }
  if (config.simulator.population.entity_values.empty()) {
    config.simulator.population = defaults().simulator.population;
  }

  if (root.contains("profile")) {
    const json& profile = root.at("profile");
    reject_unknown_keys(profile, "profile",
                        {"short_window", "long_window", "bucket_granularity", "smoothing_alpha",
                         "feedback_policy", "descriptors"});
    auto& out = config.profile;
    out.windows.short_window =
        duration_field(profile, "profile", "short_window", out.windows.short_window);
    out.windows.long_window =
        duration_field(profile, "profile", "long_window", out.windows.long_window);
    out.bucket_granularity =
        duration_field(profile, "profile", "bucket_granularity", out.bucket_granularity);
    out.smoothing_alpha =
        scalar_field<double>(profile, "profile", "smoothing_alpha", out.smoothing_alpha);
    if (profile.contains("feedback_policy")) {
      const json& policy = profile.at("feedback_policy");
      reject_unknown_keys(policy, "profile.feedback_policy",
                          {"chargeback", "manual_review_reject", "system_reject"});
      out.policy.use_chargeback = scalar_field<bool>(policy, "profile.feedback_policy",
                                                     "chargeback", out.policy.use_chargeback);
      out.policy.use_manual_review_reject =
          scalar_field<bool>(policy, "profile.feedback_policy", "manual_review_reject",
                             out.policy.use_manual_review_reject);
      out.policy.use_system_reject = scalar_field<bool>(
          policy, "profile.feedback_policy", "system_reject", out.policy.use_system_reject);
    }
    if (profile.contains("descriptors")) {
      for (const json& desc : profile.at("descriptors")) {
        reject_unknown_keys(desc, "profile.descriptors", {"name", "extractor"});
        EntityDescriptor descriptor;
        descriptor.name = scalar_field<std::string>(desc, "profile.descriptors", "name", "");
        if (desc.contains("extractor")) {
          descriptor.extractor = desc.at("extractor").get<std::vector<std::string>>();
        }
        config.profile.descriptors.push_back(std::move(descriptor));
      }
    }
  }
  if (config.profile.descriptors.empty()) {
    config.profile.descriptors = defaults().profile.descriptors;
  }

  if (root.contains("schedule")) {
    const json& schedule = root.at("schedule");
    reject_unknown_keys(schedule, "schedule", {"period", "epoch"});
    config.schedule.period = duration_field(schedule, "schedule", "period",
                                            config.schedule.period);
    config.schedule.epoch = Timestamp{
        duration_field(schedule, "schedule", "epoch", Duration{config.schedule.epoch.seconds})
            .seconds};
  }

  if (root.contains("model")) {
    const json& model = root.at("model");
    reject_unknown_keys(model, "model",
                        {"num_trees", "max_depth", "learning_rate", "min_leaf_count", "seed",
                         "max_categories"});
    config.model.num_trees = scalar_field<int>(model, "model", "num_trees",
                                               config.model.num_trees);
    config.model.max_depth = scalar_field<int>(model, "model", "max_depth",
                                               config.model.max_depth);
    config.model.learning_rate =
        scalar_field<double>(model, "model", "learning_rate", config.model.learning_rate);
    config.model.min_leaf_count =
        scalar_field<int>(model, "model", "min_leaf_count", config.model.min_leaf_count);
    config.model.max_categories =
        scalar_field<int>(model, "model", "max_categories", config.model.max_categories);
    if (model.contains("seed")) {
      config.model.seed = scalar_field<std::uint64_t>(model, "model", "seed", 0);
    } else {
      config.model.seed = derive_seed(config.simulator.seed, "train");
    }
  } else {
    config.model.seed = derive_seed(config.simulator.seed, "train");
  }

  if (root.contains("evaluation")) {
    const json& eval = root.at("evaluation");
    reject_unknown_keys(eval, "evaluation",
                        {"split_mode", "train_fraction", "holdout_boundary", "fpr_anchor",
                         "tpr_anchor"});
    const std::string mode = scalar_field<std::string>(
        eval, "evaluation", "split_mode",
        config.evaluation.split_mode == SplitSpec::Mode::random ? "random" : "temporal");
    if (mode == "random") {
      config.evaluation.split_mode = SplitSpec::Mode::random;
    } else if (mode == "temporal") {
      config.evaluation.split_mode = SplitSpec::Mode::temporal;
    } else {
      throw ConfigError("evaluation.split_mode must be random or temporal");
    }
    config.evaluation.train_fraction = scalar_field<double>(
        eval, "evaluation", "train_fraction", config.evaluation.train_fraction);
    config.evaluation.holdout_boundary =
        Timestamp{duration_field(eval, "evaluation", "holdout_boundary",
                                 Duration{config.evaluation.holdout_boundary.seconds})
                      .seconds};
    config.evaluation.fpr_anchor =
        scalar_field<double>(eval, "evaluation", "fpr_anchor", config.evaluation.fpr_anchor);
    config.evaluation.tpr_anchor =
        scalar_field<double>(eval, "evaluation", "tpr_anchor", config.evaluation.tpr_anchor);
  }

  return config;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string RunConfig::to_json() const {
  json segments = json::array();
  for (const auto& seg : simulator.script.segments) {
    json item{{"start", format_duration(Duration{seg.start.seconds})},
              {"end", format_duration(Duration{seg.end.seconds})},
              {"fraud_prior", seg.fraud_prior},
              {"attack_targets", seg.attack_targets},
              {"population_mix", seg.population_mix},
              {"fraud_amount_multiplier", seg.fraud_amount_multiplier}};
    segments.push_back(std::move(item));
  }
  json descriptors = json::array();
  for (const auto& desc : profile.descriptors) {
    descriptors.push_back({{"name", desc.name}, {"extractor", desc.extractor}});
  }

  json root{
      {"version", version},
      {"simulator",
       {{"rate_per_day", simulator.rate_per_day},
        {"horizon", format_duration(Duration{simulator.horizon.seconds})},
        {"seed", simulator.seed},
        {"population",
         {{"entity_feature", simulator.population.entity_feature},
          {"values", simulator.population.entity_values}}},
        {"amounts",
         {{"min_cents", simulator.amounts.min.cents},
          {"max_cents", simulator.amounts.max.cents},
          {"fraud_multiplier", simulator.amounts.fraud_multiplier}}},
        {"segments", std::move(segments)},
        {"delays",
         {{"chargeback", delay_to_json(simulator.delays.chargeback)},
          {"manual_review_reject", delay_to_json(simulator.delays.manual_review_reject)},
          {"system_reject", delay_to_json(simulator.delays.system_reject)}}}}},
      {"profile",
       {{"short_window", format_duration(profile.windows.short_window)},
        {"long_window", format_duration(profile.windows.long_window)},
        {"bucket_granularity", format_duration(profile.bucket_granularity)},
        {"smoothing_alpha", profile.smoothing_alpha},
        {"feedback_policy",
         {{"chargeback", profile.policy.use_chargeback},
          {"manual_review_reject", profile.policy.use_manual_review_reject},
          {"system_reject", profile.policy.use_system_reject}}},
        {"descriptors", std::move(descriptors)}}},
      {"schedule",
       {{"period", format_duration(schedule.period)},
        {"epoch", format_duration(Duration{schedule.epoch.seconds})}}},
      {"model",
       {{"num_trees", model.num_trees},
        {"max_depth", model.max_depth},
        {"learning_rate", model.learning_rate},
        {"min_leaf_count", model.min_leaf_count},
        {"seed", model.seed},
        {"max_categories", model.max_categories}}},
      {"evaluation",
       {{"split_mode", evaluation.split_mode == SplitSpec::Mode::random ? "random" : "temporal"},
        {"train_fraction", evaluation.train_fraction},
        {"holdout_boundary", format_duration(Duration{evaluation.holdout_boundary.seconds})},
        {"fpr_anchor", evaluation.fpr_anchor},
        {"tpr_anchor", evaluation.tpr_anchor}}},
      {"output_dir", output_dir}};
  return root.dump(2);
}

void RunConfig::validate() const {
  if (version != 1) throw ConfigError("version must be 1");

  if (!(simulator.rate_per_day > 0.0)) {
    throw ConfigError("simulator.rate_per_day must be positive");
  }
  if (simulator.horizon.seconds <= 0) throw ConfigError("simulator.horizon must be positive");
  if (simulator.population.entity_values.empty()) {
    throw ConfigError("simulator.population.values must not be empty");
  }
  {
    std::set<std::string> unique(simulator.population.entity_values.begin(),
                                 simulator.population.entity_values.end());
    if (unique.size() != simulator.population.entity_values.size()) {
      throw ConfigError("simulator.population.values must be unique");
    }
    std::size_t index = 0;
    for (const auto& seg : simulator.script.segments) {
      const std::string path = "simulator.segments[" + std::to_string(index++) + "]";
      for (const auto& [value, mult] : seg.attack_targets) {
        if (!unique.contains(value)) {
          throw ConfigError(path + ".attack_targets references unknown entity value " + value);
        }
      }
      for (const auto& [value, weight] : seg.population_mix) {
        if (!unique.contains(value)) {
          throw ConfigError(path + ".population_mix references unknown entity value " + value);
        }
      }
    }
  }
  if (simulator.amounts.min.cents <= 0 || simulator.amounts.max < simulator.amounts.min) {
    throw ConfigError("simulator.amounts must satisfy 0 < min_cents <= max_cents");
  }
  if (!(simulator.amounts.fraud_multiplier > 0.0)) {
    throw ConfigError("simulator.amounts.fraud_multiplier must be positive");
  }
  for (const DelaySpec* spec :
       {&simulator.delays.chargeback, &simulator.delays.manual_review_reject,
        &simulator.delays.system_reject}) {
    if (spec->min.seconds < 0 || spec->max < spec->min) {
      throw ConfigError("simulator.delays must satisfy 0 <= min <= max");
    }
    if (spec->emission_probability < 0.0 || spec->emission_probability > 1.0) {
      throw ConfigError("simulator.delays emission_probability must be in [0,1]");
    }
  }
  simulator.script.validate(simulator.horizon);

  profile.windows.validate();
  if (profile.bucket_granularity.seconds <= 0) {
    throw ConfigError("profile.bucket_granularity must be positive");
  }
  if (!(profile.smoothing_alpha > 0.0)) {
    throw ConfigError("profile.smoothing_alpha must be > 0");
  }
  if (profile.descriptors.empty()) throw ConfigError("profile.descriptors must not be empty");
  {
    std::set<std::string> names;
    for (const auto& desc : profile.descriptors) {
      if (desc.name.empty()) throw ConfigError("profile.descriptors entries need a name");
      if (!names.insert(desc.name).second) {
        throw ConfigError("profile.descriptors names must be unique: " + desc.name);
      }
      if (desc.extractor.empty()) {
        throw ConfigError("profile.descriptors." + desc.name + " has an empty extractor");
      }
    }
  }
  if (simulator.horizon.seconds <= profile.windows.long_window.seconds) {
    throw ConfigError("simulator.horizon must exceed profile.long_length");
  }

  schedule.validate(profile.bucket_granularity);
  model.validate();

  if (!(evaluation.train_fraction > 0.0) || !(evaluation.train_fraction < 1.0)) {
    throw ConfigError("evaluation.train_fraction must be in (0, 1)");
  }
  if (!(evaluation.fpr_anchor > 0.0) || !(evaluation.fpr_anchor < 1.0)) {
    throw ConfigError("evaluation.fpr_anchor must be in (0, 1)");
  }
  if (!(evaluation.tpr_anchor > 0.0) || !(evaluation.tpr_anchor < 1.0)) {
    throw ConfigError("evaluation.tpr_anchor must be in (0, 1)");
  }
  if (evaluation.split_mode == SplitSpec::Mode::temporal) {
    if (evaluation.holdout_boundary.seconds <= profile.windows.long_window.seconds ||
        evaluation.holdout_boundary >= simulator.horizon) {
      throw ConfigError(
          "evaluation.holdout_boundary must lie between profile.long_length and "
          "simulator.horizon");
    }
  }
}

}  // namespace riskstream
