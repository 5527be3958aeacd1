#pragma once

// File formats: recording CSV, versioned model JSON, and state reports.
//
// Recording CSV header: timestamp_s,sensor,gx,gy,gz[,state[,activity]]
// Rows for a sensor must be strictly increasing in time at 1/fs spacing
// (tolerance 1e-6 s); sensors may be interleaved and must share a clock.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pdstate/inference.hpp"
#include "pdstate/model.hpp"
#include "pdstate/types.hpp"

namespace pdstate::io {

struct RecordingFormat {
    double sample_rate_hz = 128.0;
    double timestamp_tolerance_s = 1e-6;
};

Recording read_recording(std::istream& in, const RecordingFormat& format = {});
Recording read_recording(const std::filesystem::path& path, const RecordingFormat& format = {});

void write_recording(const Recording& recording, std::ostream& out);
void write_recording(const Recording& recording, const std::filesystem::path& path);

std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(const std::string& text);
void write_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel read_model(const std::filesystem::path& path);

enum class ReportFormat { Json, Csv };

std::string report_to_json(const inference::StateReport& report);
std::string report_to_csv(const inference::StateReport& report);
inference::StateReport report_from_json(const std::string& text);
void write_report(const inference::StateReport& report, const std::filesystem::path& path, ReportFormat format);
inference::StateReport read_report(const std::filesystem::path& path);

std::string evaluation_to_json(const inference::EvaluationResult& result);
std::string activity_table_csv(const std::vector<inference::ActivityAccuracy>& rows);

/// Whole-file helpers; throw std::runtime_error on I/O failure.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace pdstate::io
