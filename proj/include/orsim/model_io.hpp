#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "orsim/boosting.hpp"

namespace orsim {

inline constexpr const char* kModelHeader = "orsim-model v1";

// Line-oriented text: header, configuration, the channel enumeration, the
// lambda table, then every tree in preorder with its alpha and threshold.
// Doubles are written with 17 significant digits and split thresholds with 9,
// so write -> read -> write is byte-identical.
std::string model_to_string(const BoostedModel& model);

// ParseError with line number on malformed input; FormatError on a wrong
// header or a channel list that does not match the configuration.
BoostedModel model_from_string(const std::string& text);

void save_model(const std::filesystem::path& path, const BoostedModel& model);
BoostedModel load_model(const std::filesystem::path& path);

// Lambda table file written by calibration: `group lambda r2 mu...` lines
// after `#` header lines. load_lambda_table reads the first two numbers.
void save_lambda_table(const std::filesystem::path& path, const CalibrationReport& report,
                       const std::vector<std::string>& header);
LambdaTable load_lambda_table(const std::filesystem::path& path);

}  // namespace orsim
