#pragma once

#include "kf/singularity.hpp"

#include <filesystem>
#include <string>

namespace kf {

// BlowupReport as a single JSON document with all residuals, series, and
// verdicts.
std::string report_to_json(const BlowupReport& report);
void write_report(const std::filesystem::path& path, const BlowupReport& report);
BlowupReport read_report(const std::filesystem::path& path);

// Human-readable rendering used by the report subcommand.
std::string render_report(const BlowupReport& report);

}  // namespace kf
