#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptix/experiments.hpp"

namespace adaptix::io {

using Json = nlohmann::ordered_json;

/// 17 significant digits, "%.17g".
std::string format_double(double x);

/// CSV with header x1,...,xd,y; LF line endings.
std::string dataset_csv(const Dataset& data);
/// Parses dataset_csv() output (dimension from the header). Throws Error with
/// the offending line number on malformed input.
Dataset parse_dataset_csv(const std::string& text);

Json target_to_json(const TargetFunction& target);
TargetFunction target_from_json(const Json& j);

/// Target, sigma, seed, design and size of a generated dataset.
Json dataset_metadata(const Dataset& data, const TargetFunction& target);

Json model_to_json(const NetworkParams& net);
Json model_to_json(const SplineModel& model);
Json model_to_json(const CssModel& model);
Json model_to_json(const TpsModel& model);
Json model_to_json(const FittedModel& model);
/// Model type is recognized from its fields (W, beta0, second_derivs, centers).
FittedModel model_from_json(const Json& j);

/// One row per (size, trial): size,trial,seed,lambda,mse,ok.
std::string rate_csv(const RateResult& result, const std::string& estimator);
/// Same rows with wall-clock fit seconds; not deterministic.
std::string timing_csv(const RateResult& result, const std::string& estimator);
Json rate_summary(const RateResult& result);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace adaptix::io
