#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "reptex/pipeline.hpp"

namespace reptex {

using OrderedJson = nlohmann::ordered_json;

struct ReportError {
    std::string stage;
    std::string code;
    std::string message;
};

inline constexpr int kReportVersion = 1;

/// Per-region output file names, relative to the output directory.
struct RegionFiles {
    std::string texture_weighted;
    std::string texture_plain;
    std::optional<std::string> overlay;
    std::optional<std::string> tiled;
    std::optional<std::string> model;
};

RegionFiles region_files(const PipelineConfig& cfg, int subarea_id);

/// Structured run report. Keys appear in a fixed order; non-finite reals
/// are written as null. `result` may be partial or absent on failure.
OrderedJson build_report(const PipelineConfig& cfg, const PipelineResult* result,
                         const std::optional<ReportError>& error);

/// Throws UnwritableOutput.
void write_report(const OrderedJson& report, const std::filesystem::path& path);

} // namespace reptex
