#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "icp/experiments.hpp"

namespace icp {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportFormats {
  bool csv = true;
  bool json = false;
  bool svg = false;
};

/// Header `lambda,runs,alive,p_hat,wilson_lo,wilson_hi,horizon`, one row per
/// estimate. Reals are printed with 17 significant digits.
std::string survival_csv(std::span<const SurvivalEstimate> estimates);
std::string survival_json(std::span<const SurvivalEstimate> estimates);
/// Survival curve: lambda on x, p_hat with Wilson whiskers on y.
std::string survival_svg(std::span<const SurvivalEstimate> estimates);

std::vector<SurvivalEstimate> parse_survival_json(std::string_view text);

/// Writes <dir>/<stem>.{csv,json,svg} for the requested formats and returns
/// the written paths. Throws ReportError naming the path on I/O failure.
std::vector<std::filesystem::path> emit_report(std::span<const SurvivalEstimate> estimates,
                                               const ReportFormats& formats,
                                               const std::filesystem::path& dir, std::string_view stem);

/// Writes `text` to `path`, throwing ReportError with the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace icp
