// Fixed-rate teleoperation session: freshest input -> mapping -> ring pose ->
// task metrics -> trial recording. The session object is the single writer
// of SessionState; transports feed it inputs and commands.
#pragma once

#include "imuteleop/arm.hpp"
#include "imuteleop/task.hpp"
#include "imuteleop/teleop/datagram.hpp"
#include "imuteleop/teleop/mapping.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imuteleop {

enum class InputSource { imusim, datagram, ui };
enum class TrialPhase { idle, running, done };

std::string to_string(InputSource s);
InputSource input_source_from_string(const std::string& name);
std::string to_string(TrialPhase p);

struct SessionConfig {
  InputSource source = InputSource::imusim;
  std::optional<Wire> wire = make_straight_wire();
  ArmModel arm{0.30, 0.25};
  Mapping mapping;
  TrialConfig trial;
  double loop_rate = 50.0;   ///< Hz
  double stale_after = 1.0;  ///< seconds without fresh input
};

void validate(const SessionConfig& config);

struct Command {
  enum class Type { start, stop, clutch };
  Type type = Type::start;
  bool engaged = false;  ///< clutch only
};

struct SessionState {
  double t = 0.0;
  InputSource source = InputSource::imusim;
  RigidTransformd ring;
  std::optional<ArmSkeleton> arm;
  std::string wire_id;
  std::optional<TaskMetrics> metrics;
  TrialPhase phase = TrialPhase::idle;
  double elapsed = 0.0;   ///< seconds since the trial started recording
  double progress = 0.0;  ///< arclength reached in the trial, meters
  bool clutch = false;
  bool stale = true;
  std::uint64_t malformed = 0;
  std::uint64_t dropped = 0;
};

class TeleopSession {
 public:
  explicit TeleopSession(SessionConfig config);

  const SessionConfig& config() const { return config_; }

  /// Input offers. Each returns false when the input was rejected: wrong
  /// source for this session, not newer than the freshest accepted input,
  /// or (datagrams) malformed.
  bool offer_imus(const ImuPair& imus);
  bool offer_joints(double t, const JointConfig& joints);
  bool offer_pose(double t, const RigidTransformd& pose);
  bool offer_datagram(std::span<const std::uint8_t> bytes);

  /// Queued; applied at the start of the next tick.
  void command(const Command& c);

  SessionState tick(double now);

  const SessionState& state() const { return state_; }

  /// Record of the most recently finished trial (completed or stopped).
  const std::optional<TrialRecord>& finished_trial() const { return finished_; }

 private:
  struct Input {
    double t = 0.0;
    RigidTransformd pose;
    std::optional<ArmSkeleton> skeleton;
  };

  bool accept(InputSource source, Input input);
  void apply_command(const Command& c);
  void finish_trial();

  SessionConfig config_;
  Mapping mapping_;
  SessionState state_;
  std::deque<Command> commands_;
  std::optional<Input> pending_;
  std::optional<Input> applied_;
  std::optional<double> newest_t_;
  std::optional<std::uint32_t> newest_seq_;
  std::optional<double> last_fresh_tick_;
  std::optional<double> first_tick_;
  std::optional<TrialRecorder> recorder_;
  std::optional<double> trial_start_;
  std::optional<TrialRecord> finished_;
};

// -- Simulated runs ---------------------------------------------------------------

struct TimedDatagram {
  double arrival = 0.0;
  std::vector<std::uint8_t> bytes;
};

struct SessionRun {
  std::vector<SessionState> states;
  std::optional<TrialRecord> record;
  std::uint64_t malformed = 0;
};

/// Ticks at k / loop_rate over [0, duration], delivering every stream sample
/// with t <= tick time before the tick. Starts a trial on the first tick and
/// stops it after the last one if still running.
SessionRun run_session(const SessionConfig& config, const std::vector<ImuPair>& imu_stream,
                       double duration);
SessionRun run_session(const SessionConfig& config, const std::vector<TimedDatagram>& datagrams,
                       double duration);

}  // namespace imuteleop
