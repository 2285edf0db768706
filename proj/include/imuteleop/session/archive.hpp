// Session archives: line-delimited JSON. The first line is a header with the
// format version and metadata (config snapshot, seed, labels); each further
// line is one record tagged by "type": "imu", "trial" or "summary", and
// an "end" record with the record counts closes the file.
#pragma once

#include "imuteleop/imusim.hpp"
#include "imuteleop/task.hpp"
#include "imuteleop/teleop/session.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace imuteleop {

constexpr int kArchiveVersion = 1;
inline constexpr const char* kArchiveFormat = "imuteleop-archive";

class ArchiveError : public std::runtime_error {
 public:
  enum class Kind { io, corrupt, version };
  ArchiveError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct ArchiveMetadata {
  std::string created_at;
  std::uint64_t seed = 0;
  std::string wire_id;
  std::string input_source = "imusim";
  double duration = 0.0;     ///< simulated seconds driven through the session
  std::string user;          ///< report grouping label
  std::string device;        ///< report grouping label
  nlohmann::json config;     ///< session_config_to_json snapshot
  nlohmann::json generator;  ///< how the input stream was produced (informational)

  friend bool operator==(const ArchiveMetadata&, const ArchiveMetadata&) = default;
};

struct SessionArchive {
  ArchiveMetadata metadata;
  std::vector<ImuPair> imu;
  std::vector<TrialRecord> trials;
  std::vector<TrialSummary> summaries;
};

bool operator==(const SessionArchive& a, const SessionArchive& b);

nlohmann::json imu_record(const ImuPair& imus);
ImuPair imu_from_record(const nlohmann::json& record);

nlohmann::json trial_record(const TrialRecord& trial);
TrialRecord trial_from_record(const nlohmann::json& record);

nlohmann::json summary_record(const TrialSummary& s);
TrialSummary summary_from_record(const nlohmann::json& record);

nlohmann::json session_config_to_json(const SessionConfig& config);
SessionConfig session_config_from_json(const nlohmann::json& j);

nlohmann::json drift_to_json(const DriftModel& m);

std::string serialize_archive(const SessionArchive& archive);
SessionArchive parse_archive(const std::string& text);

void record_archive(const SessionArchive& archive, const std::filesystem::path& path);
SessionArchive load_archive(const std::filesystem::path& path);

/// ImuPair stream dump, same record shape as archive "imu" lines.
std::string serialize_imu_stream(const std::vector<ImuPair>& stream);
std::vector<ImuPair> parse_imu_stream(const std::string& text);

}  // namespace imuteleop
