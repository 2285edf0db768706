#include "imuteleop/teleop/session.hpp"

#include <cmath>
#include <stdexcept>

namespace imuteleop {

std::string to_string(InputSource s) {
  switch (s) {
    case InputSource::imusim: return "imusim";
    case InputSource::datagram: return "datagram";
    case InputSource::ui: return "ui";
  }
  return "?";
}

InputSource input_source_from_string(const std::string& name) {
  if (name == "imusim") return InputSource::imusim;
  if (name == "datagram") return InputSource::datagram;
  if (name == "ui") return InputSource::ui;
  throw std::invalid_argument("unknown input source '" + name + "'");
}

std::string to_string(TrialPhase p) {
  switch (p) {
    case TrialPhase::idle: return "idle";
    case TrialPhase::running: return "running";
    case TrialPhase::done: return "done";
  }
  return "?";
}

void validate(const SessionConfig& config) {
  validate(config.mapping);
  validate(config.trial.ring_shape);
  if (!(config.loop_rate > 0.0 && config.loop_rate <= 1000.0)) {
    throw std::invalid_argument("session loop rate must be in (0, 1000] Hz");
  }
  if (!(config.stale_after > 0.0)) throw std::invalid_argument("stale timeout must be positive");
}

TeleopSession::TeleopSession(SessionConfig config)
    : config_(std::move(config)), mapping_(config_.mapping) {
  validate(config_);
  state_.source = config_.source;
  state_.ring = apply_mapping(mapping_, RigidTransformd::Identity());
  if (config_.wire) state_.wire_id = config_.wire->id();
}

bool TeleopSession::accept(InputSource source, Input input) {
  if (source != config_.source) {
    ++state_.dropped;
    return false;
  }
  if (newest_t_ && !(input.t > *newest_t_)) {
    ++state_.dropped;
    return false;
  }
  newest_t_ = input.t;
  pending_ = std::move(input);
  return true;
}

bool TeleopSession::offer_imus(const ImuPair& imus) {
  return accept(InputSource::imusim,
                {imus.t, wrist_pose(config_.arm, imus), arm_skeleton(config_.arm, imus)});
}

bool TeleopSession::offer_joints(double t, const JointConfig& joints) {
  if (!in_range(joints)) {
    ++state_.malformed;
    return false;
  }
  const ImuPair imus = joints_to_imus(joints, t);
  return accept(InputSource::ui, {t, wrist_pose(config_.arm, imus), arm_skeleton(config_.arm, imus)});
}

bool TeleopSession::offer_pose(double t, const RigidTransformd& pose) {
  if (!is_finite(pose.translation) || !(std::abs(pose.rotation.norm() - 1.0) < 1e-6)) {
    ++state_.malformed;
    return false;
  }
  return accept(InputSource::ui, {t, pose, std::nullopt});
}

bool TeleopSession::offer_datagram(std::span<const std::uint8_t> bytes) {
  if (config_.source != InputSource::datagram) {
    ++state_.dropped;
    return false;
  }
  PoseDatagram d;
  try {
    d = decode_datagram(bytes);
  } catch (const DatagramError&) {
    ++state_.malformed;
    return false;
  }
  // Ordering follows the sender's sequence number; timestamps only label.
  if (newest_seq_ && d.seq <= *newest_seq_) {
    ++state_.dropped;
    return false;
  }
  newest_seq_ = d.seq;
  pending_ = Input{d.t, d.pose(), std::nullopt};
  return true;
}

void TeleopSession::command(const Command& c) { commands_.push_back(c); }

void TeleopSession::finish_trial() {
  finished_ = recorder_->take();
  recorder_.reset();
  trial_start_.reset();
  state_.phase = TrialPhase::done;
}

void TeleopSession::apply_command(const Command& c) {
  switch (c.type) {
    case Command::Type::start:
      if (state_.phase == TrialPhase::running) return;
      if (!config_.wire) return;
      state_.phase = TrialPhase::running;
      recorder_.emplace(*config_.wire, config_.trial);
      state_.elapsed = 0.0;
      state_.progress = 0.0;
      return;
    case Command::Type::stop:
      if (state_.phase != TrialPhase::running) return;
      finish_trial();
      return;
    case Command::Type::clutch: {
      const RigidTransformd input = applied_ ? applied_->pose : RigidTransformd::Identity();
      mapping_ = c.engaged ? engage_clutch(mapping_, input) : release_clutch(mapping_, input);
      return;
    }
  }
}

SessionState TeleopSession::tick(double now) {
  if (!first_tick_) first_tick_ = now;
  while (!commands_.empty()) {
    apply_command(commands_.front());
    commands_.pop_front();
  }

  if (pending_) {
    applied_ = std::move(pending_);
    pending_.reset();
    last_fresh_tick_ = now;
  }
  state_.t = now;
  state_.stale = !last_fresh_tick_ || now - *last_fresh_tick_ > config_.stale_after;
  if (applied_ && !state_.stale) {
    state_.ring = apply_mapping(mapping_, applied_->pose);
    state_.arm = applied_->skeleton;
  } else if (mapping_.clutch_engaged) {
    state_.ring = mapping_.frozen;
  }
  state_.clutch = mapping_.clutch_engaged;

  if (config_.wire) {
    state_.metrics = evaluate(*config_.wire, ring_at(state_.ring, config_.trial.ring_shape));
  }

  if (state_.phase == TrialPhase::running && recorder_) {
    const auto phase = recorder_->push(now, state_.ring, *state_.metrics);
    const auto& samples = recorder_->record().samples;
    if (!samples.empty()) {
      if (!trial_start_) trial_start_ = samples.front().t;
      state_.elapsed = now - *trial_start_;
      state_.progress = samples.back().s;
    }
    if (phase == TrialRecorder::Phase::completed) finish_trial();
  }
  return state_;
}

namespace {

template <typename Feed>
SessionRun drive(const SessionConfig& config, double duration, Feed&& feed) {
  if (!(duration >= 0.0)) throw std::invalid_argument("run_session: negative duration");
  TeleopSession session(config);
  SessionRun run;
  const auto ticks = static_cast<std::size_t>(std::floor(duration * config.loop_rate + 1e-9)) + 1;
  run.states.reserve(ticks);
  session.command({Command::Type::start});
  double now = 0.0;
  for (std::size_t k = 0; k < ticks; ++k) {
    now = static_cast<double>(k) / config.loop_rate;
    feed(session, now);
    run.states.push_back(session.tick(now));
  }
  if (session.state().phase == TrialPhase::running) {
    session.command({Command::Type::stop});
    session.tick(now);
  }
  run.record = session.finished_trial();
  run.malformed = session.state().malformed;
  return run;
}

}  // namespace

SessionRun run_session(const SessionConfig& config, const std::vector<ImuPair>& imu_stream,
                       double duration) {
  std::size_t next = 0;
  return drive(config, duration, [&](TeleopSession& session, double now) {
    while (next < imu_stream.size() && imu_stream[next].t <= now) {
      session.offer_imus(imu_stream[next++]);
    }
  });
}

SessionRun run_session(const SessionConfig& config, const std::vector<TimedDatagram>& datagrams,
                       double duration) {
  std::size_t next = 0;
  return drive(config, duration, [&](TeleopSession& session, double now) {
    while (next < datagrams.size() && datagrams[next].arrival <= now) {
      session.offer_datagram(datagrams[next++].bytes);
    }
  });
}

}  // namespace imuteleop
