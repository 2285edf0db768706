#include "imuteleop/session/cli.hpp"

#include "imuteleop/calib.hpp"
#include "imuteleop/session/archive.hpp"
#include "imuteleop/session/report.hpp"
#include "imuteleop/teleop/autopilot.hpp"
#include "imuteleop/teleop/server.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/asio.hpp>
#include <json.hpp>

namespace imuteleop {

using nlohmann::json;

namespace {

// Thrown for unreadable or malformed user-supplied files and values.
struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadInput("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw BadInput("cannot write " + path);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// "straight", "s-shaped" (or "s"), or a wire JSON file.
Wire select_wire(const std::string& name) {
  if (name == "straight") return make_straight_wire();
  if (name == "s-shaped" || name == "s") return make_s_wire();
  return load_wire(name);
}

std::string task_label(const std::string& wire_id) {
  if (wire_id == "straight") return "Straight Wire Task";
  if (wire_id == "s-shaped") return "S-Shaped Wire Task";
  return wire_id;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void print_summary(std::ostream& out, const TrialSummary& s) {
  out << "completion_time_s " << fmt("%.3f", s.completion_time) << "\n"
      << "mean_pos_err_mm " << fmt("%.4f", s.mean_position_error) << "\n"
      << "mean_ori_err_deg " << fmt("%.4f", s.mean_orientation_error) << "\n"
      << "non_collision_pct " << fmt("%.2f", s.non_collision_pct) << "\n"
      << "completed " << (s.completed ? "yes" : "no") << "\n";
}

// -- calibrate ------------------------------------------------------------------

struct CalibrateArgs {
  std::string samples;
  std::string grid;
  bool synthetic = false;
  std::uint64_t seed = 7;
  int trials = 10;
  int points = 4;
  double noise_deg = 2.0;
  double true_upper = 0.28;
  double true_forearm = 0.24;
  bool csv = false;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  const CalibrationGrid grid = a.grid.empty() ? CalibrationGrid::standard() : load_grid(a.grid);
  if (a.synthetic) {
    SyntheticStudy study;
    study.arm = ArmModel(a.true_upper, a.true_forearm);
    study.points_per_trial = a.points;
    study.noise_rms_deg = a.noise_deg;
    study.trials = a.trials;
    study.seed = a.seed;
    const auto trials = run_synthetic_study(study, grid);
    std::vector<PercentErrors> errors;
    bool converged = true;
    for (const auto& t : trials) {
      errors.push_back(*t.result.percent_errors);
      converged = converged && t.result.converged;
    }
    const auto table = make_calibration_table(errors);
    out << (a.csv ? calibration_table_csv(table) : render_calibration_table(table));
    if (!converged) {
      err << "calibrate: at least one trial did not converge\n";
      return kExitNoConvergence;
    }
    return kExitOk;
  }
  if (a.samples.empty()) throw BadInput("calibrate: give --samples FILE or --synthetic");
  const auto samples = load_samples(a.samples);
  const CalibrationResult r = calibrate(samples, grid);
  out << "upper_m " << fmt("%.6f", r.upper) << "\n"
      << "forearm_m " << fmt("%.6f", r.forearm) << "\n"
      << "residual_m " << fmt("%.3e", r.residual) << "\n"
      << "iterations " << r.iterations << "\n"
      << "converged " << (r.converged ? "yes" : "no") << "\n";
  if (r.conditioning_warning) err << "warning: " << *r.conditioning_warning << "\n";
  if (!r.converged) return kExitNoConvergence;
  return kExitOk;
}

// -- simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string wire = "straight";
  std::string trajectory;
  std::string out;
  std::string dump_stream;
  std::string drift = "default";
  std::uint64_t seed = 0;
  double bias_rw = -1.0;
  double noise = -1.0;
  double initial_bias = -1.0;
  double gain = 0.0;
  double traverse = 10.0;
  double hold = 0.5;
  double duration = -1.0;
  double rate = kDefaultStreamRate;
  double loop_rate = 50.0;
  double upper = 0.30;
  double forearm = 0.25;
  double scale = 1.0;
  std::string user = "User1";
  std::string device = "IMU";
  std::string created_at;
};

DriftModel drift_from(const SimulateArgs& a) {
  DriftModel m;
  if (a.drift == "none") {
    m = DriftModel::none();
  } else if (a.drift != "default") {
    throw BadInput("simulate: --drift must be 'none' or 'default'");
  }
  if (a.bias_rw >= 0.0) m.bias_rw_sigma = a.bias_rw;
  if (a.noise >= 0.0) m.noise_sigma = a.noise;
  if (a.initial_bias >= 0.0) m.initial_bias.setConstant(a.initial_bias);
  m.seed = a.seed;
  validate(m);
  return m;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  SessionConfig config;
  config.source = InputSource::imusim;
  config.wire = select_wire(a.wire);
  config.arm = ArmModel(a.upper, a.forearm);
  config.mapping = default_arm_mapping();
  config.mapping.scale = a.scale;
  config.loop_rate = a.loop_rate;
  validate(config);
  // Run with the config as it will be read back, so replay sees the same bits.
  config = session_config_from_json(session_config_to_json(config));

  const DriftModel drift = drift_from(a);
  json generator;
  std::vector<ImuPair> imu;
  double duration = a.duration;
  if (!a.trajectory.empty()) {
    const Trajectory traj = load_trajectory(a.trajectory);
    if (duration < 0.0) duration = traj.duration();
    imu = stream(traj, drift, a.rate);
    generator = {{"kind", "trajectory"}, {"file", a.trajectory}, {"rate", a.rate},
                 {"drift", drift_to_json(drift)}};
  } else {
    AutopilotPlan plan;
    plan.hold = a.hold;
    plan.traverse = a.traverse;
    if (duration < 0.0) duration = plan.hold + plan.traverse + 1.0;
    imu = steer_along_wire(*config.wire, config.arm, config.mapping, plan, drift, duration,
                           a.rate, a.gain)
              .measured;
    generator = {{"kind", "autopilot"}, {"hold", plan.hold}, {"traverse", plan.traverse},
                 {"feedback_gain", a.gain}, {"rate", a.rate}, {"drift", drift_to_json(drift)}};
  }

  const SessionRun run = run_session(config, imu, duration);

  SessionArchive archive;
  archive.metadata.created_at = a.created_at.empty() ? utc_now() : a.created_at;
  archive.metadata.seed = a.seed;
  archive.metadata.wire_id = config.wire->id();
  archive.metadata.input_source = to_string(config.source);
  archive.metadata.duration = duration;
  archive.metadata.user = a.user;
  archive.metadata.device = a.device;
  archive.metadata.config = session_config_to_json(config);
  archive.metadata.generator = generator;
  archive.imu = imu;
  if (run.record) {
    archive.trials.push_back(*run.record);
    if (!run.record->samples.empty()) archive.summaries.push_back(summarize(*run.record));
  }

  if (!a.out.empty()) record_archive(archive, a.out);
  if (!a.dump_stream.empty()) write_file(a.dump_stream, serialize_imu_stream(imu));
  if (archive.summaries.empty()) {
    out << "no trial samples recorded\n";
  } else {
    print_summary(out, archive.summaries.front());
  }
  return kExitOk;
}

// -- replay ---------------------------------------------------------------------

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err) {
  const SessionArchive archive = load_archive(path);
  if (archive.metadata.input_source != to_string(InputSource::imusim)) {
    throw BadInput("replay: only imusim archives carry a replayable stream");
  }
  const SessionConfig config = session_config_from_json(archive.metadata.config);
  const SessionRun run = run_session(config, archive.imu, archive.metadata.duration);

  std::vector<TrialRecord> trials;
  if (run.record) trials.push_back(*run.record);
  if (trials != archive.trials) {
    err << "replay: recomputed trial differs from the archive\n";
    return kExitReplayMismatch;
  }
  if (!trials.empty() && !trials.front().samples.empty()) {
    const TrialSummary s = summarize(trials.front());
    if (archive.summaries.empty() ||
        s.completion_time != archive.summaries.front().completion_time ||
        s.mean_position_error != archive.summaries.front().mean_position_error ||
        s.mean_orientation_error != archive.summaries.front().mean_orientation_error ||
        s.non_collision_pct != archive.summaries.front().non_collision_pct) {
      err << "replay: recomputed summary differs from the archive\n";
      return kExitReplayMismatch;
    }
    print_summary(out, s);
  }
  out << "replay ok: " << (trials.empty() ? 0 : trials.front().samples.size())
      << " samples identical\n";
  return kExitOk;
}

// -- report ---------------------------------------------------------------------

int cmd_report(const std::vector<std::string>& paths, bool csv, std::ostream& out) {
  std::vector<ReportEntry> entries;
  for (const auto& path : paths) {
    const SessionArchive archive = load_archive(path);
    for (const auto& s : archive.summaries) {
      entries.push_back({task_label(archive.metadata.wire_id), archive.metadata.device,
                         archive.metadata.user, s});
    }
  }
  if (entries.empty()) throw BadInput("report: the archives hold no trial summaries");
  const Report report = make_report(entries);
  out << (csv ? report_csv(report) : render_report(report));
  return kExitOk;
}

// -- serve ----------------------------------------------------------------------

struct ServeArgs {
  std::string config;
  std::string wire;
  std::string source;
  std::string bind;
  std::string static_dir;
  int udp_port = -1;
  int ui_port = -1;
  double loop_rate = -1.0;
  double scale = -1.0;
  double upper = -1.0;
  double forearm = -1.0;
  double duration = -1.0;
};

struct ServePlan {
  ServerConfig server;
  double duration = 0.0;  ///< seconds; 0 runs until signaled
};

/// Config file keys mirror the flags: wire, source, bind, static_dir,
/// udp_port, ui_port, loop_rate, scale, upper, forearm, duration. Flags win.
ServePlan serve_plan_from(const ServeArgs& a) {
  json file = json::object();
  std::string path = a.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) path = env;
  }
  if (!path.empty()) {
    try {
      file = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw BadInput("serve: bad config " + path + ": " + e.what());
    }
  }
  const auto str = [&](const std::string& flag, const char* key, const std::string& def) {
    return !flag.empty() ? flag : file.value(key, def);
  };
  const auto num = [&](double flag, const char* key, double def) {
    return flag >= 0.0 ? flag : file.value(key, def);
  };

  ServePlan plan;
  ServerConfig& sc = plan.server;
  SessionConfig& c = sc.session;
  c.source = input_source_from_string(str(a.source, "source", "datagram"));
  c.wire = select_wire(str(a.wire, "wire", "straight"));
  c.arm = ArmModel(num(a.upper, "upper", 0.30), num(a.forearm, "forearm", 0.25));
  c.mapping = c.source == InputSource::datagram ? Mapping{} : default_arm_mapping();
  c.mapping.scale = num(a.scale, "scale", 1.0);
  c.loop_rate = num(a.loop_rate, "loop_rate", 50.0);
  validate(c);
  sc.bind_address = str(a.bind, "bind", "127.0.0.1");
  sc.static_dir = str(a.static_dir, "static_dir", "");
  const double udp = num(a.udp_port, "udp_port", 9870);
  const double ui = num(a.ui_port, "ui_port", 9871);
  if (udp > 65535 || ui > 65535) throw BadInput("serve: port out of range");
  sc.udp_port = static_cast<std::uint16_t>(udp);
  sc.ui_port = static_cast<std::uint16_t>(ui);
  plan.duration = num(a.duration, "duration", 0.0);
  return plan;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  const ServePlan plan = serve_plan_from(a);
  const ServerConfig& sc = plan.server;
  boost::asio::io_context io;
  Server server(io, sc);
  server.start();
  out << "serving: udp " << sc.bind_address << ":" << server.udp_port() << ", ui ws://"
      << sc.bind_address << ":" << server.ui_port() << "/\n"
      << std::flush;

  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  boost::asio::steady_timer deadline(io);
  signals.async_wait([&](const boost::system::error_code& ec, int) {
    if (!ec) {
      server.stop();
      deadline.cancel();
    }
  });
  if (plan.duration > 0.0) {
    deadline.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(plan.duration)));
    deadline.async_wait([&](const boost::system::error_code& ec) {
      if (!ec) {
        server.stop();
        signals.cancel();
      }
    });
  }
  io.run();
  const auto trials = server.finished_trials();
  out << "finished trials: " << trials.size() << "\n";
  for (const auto& t : trials) {
    if (!t.samples.empty()) print_summary(out, summarize(t));
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IMU teleoperation console: calibration, simulation, replay, reports, live serving"};
  app.require_subcommand(1);

  CalibrateArgs cal;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Estimate upper-arm and forearm lengths");
  calibrate_cmd->add_option("--samples", cal.samples, "Touch samples file");
  calibrate_cmd->add_option("--grid", cal.grid, "Grid file (default: standard 3x3 grid)");
  calibrate_cmd->add_flag("--synthetic", cal.synthetic, "Run the synthetic noise study");
  calibrate_cmd->add_option("--seed", cal.seed, "Study seed");
  calibrate_cmd->add_option("--trials", cal.trials, "Study trials")->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--points", cal.points, "Touches per trial")->check(CLI::Range(4, 9));
  calibrate_cmd->add_option("--noise-deg", cal.noise_deg, "RMS orientation noise, degrees")
      ->check(CLI::NonNegativeNumber);
  calibrate_cmd->add_option("--true-upper", cal.true_upper, "Synthetic upper arm, m");
  calibrate_cmd->add_option("--true-forearm", cal.true_forearm, "Synthetic forearm, m");
  calibrate_cmd->add_flag("--csv", cal.csv, "Machine-readable rows");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a simulated IMU session and archive it");
  simulate_cmd->add_option("--wire", sim.wire, "straight, s-shaped, or a wire JSON file");
  simulate_cmd->add_option("--trajectory", sim.trajectory, "Joint trajectory file (default: autopilot)");
  simulate_cmd->add_option("-o,--out", sim.out, "Archive path");
  simulate_cmd->add_option("--dump-stream", sim.dump_stream, "Write the IMU stream here");
  simulate_cmd->add_option("--drift", sim.drift, "none or default");
  simulate_cmd->add_option("--seed", sim.seed, "Drift seed");
  simulate_cmd->add_option("--bias-rw", sim.bias_rw, "Bias random walk, rad/s/sqrt(s)");
  simulate_cmd->add_option("--noise", sim.noise, "Orientation noise, rad");
  simulate_cmd->add_option("--initial-bias", sim.initial_bias, "Initial bias per axis, rad/s");
  simulate_cmd->add_option("--gain", sim.gain, "Visual feedback gain, 1/s")->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--traverse", sim.traverse, "Autopilot traverse time, s")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--hold", sim.hold, "Autopilot hold at start, s")->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--duration", sim.duration, "Session length, s");
  simulate_cmd->add_option("--rate", sim.rate, "Sensor rate, Hz")
      ->check(CLI::Range(kMinStreamRate, kMaxStreamRate));
  simulate_cmd->add_option("--loop-rate", sim.loop_rate, "Session tick rate, Hz")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--upper", sim.upper, "Upper arm length, m");
  simulate_cmd->add_option("--forearm", sim.forearm, "Forearm length, m");
  simulate_cmd->add_option("--scale", sim.scale, "Mapping translation scale");
  simulate_cmd->add_option("--user", sim.user, "Report label");
  simulate_cmd->add_option("--device", sim.device, "Report label");
  simulate_cmd->add_option("--created-at", sim.created_at, "Archive timestamp (default: now, UTC)");

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute an archived trial and compare");
  replay_cmd->add_option("archive", replay_path, "Archive path")->required();

  std::vector<std::string> report_paths;
  bool report_csv_flag = false;
  auto* report_cmd = app.add_subcommand("report", "Tabulate archived trial summaries");
  report_cmd->add_option("archives", report_paths, "Archive paths")->required();
  report_cmd->add_flag("--csv", report_csv_flag, "Machine-readable rows");

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "Run the live session with UDP and UI bridges");
  serve_cmd->add_option("--config", srv.config,
                        std::string("JSON config (default: $") + kConfigEnvVar + ")");
  serve_cmd->add_option("--wire", srv.wire, "straight, s-shaped, or a wire JSON file");
  serve_cmd->add_option("--source", srv.source, "datagram, ui or imusim");
  serve_cmd->add_option("--bind", srv.bind, "Bind address");
  serve_cmd->add_option("--static-dir", srv.static_dir, "UI assets directory");
  serve_cmd->add_option("--udp-port", srv.udp_port, "Pose datagram port (0: any)");
  serve_cmd->add_option("--ui-port", srv.ui_port, "WebSocket/HTTP port (0: any)");
  serve_cmd->add_option("--loop-rate", srv.loop_rate, "Tick rate, Hz");
  serve_cmd->add_option("--scale", srv.scale, "Mapping translation scale");
  serve_cmd->add_option("--upper", srv.upper, "Upper arm length, m");
  serve_cmd->add_option("--forearm", srv.forearm, "Forearm length, m");
  serve_cmd->add_option("--duration", srv.duration, "Stop after this many seconds (0: run until signaled)");

  std::vector<const char*> argv{"imuteleop"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*calibrate_cmd) return cmd_calibrate(cal, out, err);
    if (*simulate_cmd) return cmd_simulate(sim, out);
    if (*replay_cmd) return cmd_replay(replay_path, out, err);
    if (*report_cmd) return cmd_report(report_paths, report_csv_flag, out);
    if (*serve_cmd) return cmd_serve(srv, out);
  } catch (const std::exception& e) {
    // Bad files, bad values, archive errors, too few calibration samples.
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace imuteleop
