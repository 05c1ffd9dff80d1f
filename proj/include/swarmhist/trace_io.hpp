#pragma once

// Structured-text formats: simulation configs, run manifests, trace files and
// report records. See docs/formats.md for the schemas.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swarmhist/audit.hpp"
#include "swarmhist/detect.hpp"
#include "swarmhist/prob.hpp"
#include "swarmhist/sim.hpp"

namespace swarmhist {

inline constexpr std::string_view kToolName = "swarmhist";
inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kTraceFormat = "swarmhist-trace";
inline constexpr int kTraceVersion = 1;
inline constexpr int kConfigVersion = 1;

// Parses the config schema. Unknown keys and bad values raise
// InvalidParameter naming the field; the result is validated.
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& config);
// Reads and parses a file; JSON syntax errors become InvalidParameter with
// the byte position in the message.
nlohmann::json read_json_file(const std::filesystem::path& path);

struct MonteCarloSettings {
  std::vector<std::string> suites{"report_within"};  // report_within | framing | collusion
  double tolerance = 0.005;                          // |empirical - closed form| bound for report_within
  std::size_t runs = 1000;                           // scenario runs for framing / collusion
};

// The optional "montecarlo" section of a config document.
MonteCarloSettings montecarlo_from_json(const nlohmann::json& j);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  SimConfig config;
  std::vector<std::string> outputs;
};

nlohmann::json manifest_to_json(const RunManifest& m);

std::string trace_to_string(const SimTrace& trace, const RunManifest& manifest);

struct LoadedTrace {
  SimTrace trace;
  nlohmann::json manifest;
};

// Throws DecodeError naming the first malformed record.
LoadedTrace trace_from_string(std::string_view text);

nlohmann::json to_json(const SuspicionReport& report);
nlohmann::json to_json(const AuditReport& report);
nlohmann::json to_json(const Estimate& estimate);

}  // namespace swarmhist
