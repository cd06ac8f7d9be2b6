#include "beamnet/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "beamnet/control.hpp"
#include "beamnet/csv.hpp"
#include "beamnet/geb.hpp"
#include "beamnet/planner.hpp"
#include "beamnet/solver.hpp"

namespace beamnet {

namespace {

namespace fs = std::filesystem;

int log_level() {
  const char* v = std::getenv("BEAMNET_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "quiet") return 0;
  if (s == "debug") return 2;
  return 1;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / path).string();
}

std::vector<DiagonalizedBeam> diagonalize_all(const NetworkSpec& net, int nx) {
  std::vector<DiagonalizedBeam> dbs;
  dbs.reserve(net.beams.size());
  for (const BeamSpec& b : net.beams) dbs.push_back(diagonalize(b, nx + 1));
  return dbs;
}

void apply_overrides(RunConfig* cfg, const CliArgs& args) {
  if (args.nx > 0) cfg->simulation.nx = args.nx;
  if (args.cfl > 0.0) cfg->simulation.cfl = args.cfl;
  if (!args.out_dir.empty()) cfg->out_dir = args.out_dir;
}

int do_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto dbs = diagonalize_all(cfg.network, cfg.simulation.nx);
  std::vector<int> nxs(cfg.network.beams.size(), cfg.simulation.nx);
  const Grid grid = make_grid(dbs, nxs, cfg.simulation.cfl, cfg.simulation.horizon);
  std::vector<Series6> q;
  for (const NodeRecord& n : cfg.network.nodes) q.push_back(n.data);
  const Trajectory traj = solve_forward(cfg.network, dbs, cfg.initial, q, grid);
  fs::create_directories(cfg.out_dir);
  write_trajectory_csv((fs::path(cfg.out_dir) / "trajectory.csv").string(), traj,
                       cfg.precision);
  for (const auto& w : traj.warnings) out << w << "\n";
  if (log_level() > 0)
    out << "simulate: " << grid.n_t << " steps, dt " << format_double(grid.dt)
        << ", wrote trajectory.csv\n";
  return 0;
}

int do_control(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.control) throw ParseError("config has no 'control' section");
  if (cfg.control->profile_files.size() != 2)
    throw ParseError("control.profiles must list two files (one per profiled beam)");

  ControlProblem prob;
  prob.network = &cfg.network;
  prob.y0 = cfg.initial;
  prob.q1 = cfg.network.nodes[0].data;
  prob.q2 = cfg.network.nodes[1].data;
  prob.q3 = cfg.network.nodes[2].data;
  prob.profile1 =
      read_series_csv<12>(resolve(cfg.config_dir, cfg.control->profile_files[0]));
  prob.profile2 =
      read_series_csv<12>(resolve(cfg.config_dir, cfg.control->profile_files[1]));
  prob.t_star = cfg.control->t_star;
  prob.t_final = cfg.control->t_final;

  ControlResult res = synthesize(prob, cfg.simulation.nx, cfg.simulation.cfl);
  fs::create_directories(cfg.out_dir);
  write_series_csv<6>((fs::path(cfg.out_dir) / "control_q4.csv").string(), res.q4,
                      cfg.precision);
  write_series_csv<6>((fs::path(cfg.out_dir) / "control_q5.csv").string(), res.q5,
                      cfg.precision);
  write_trajectory_csv((fs::path(cfg.out_dir) / "trajectory.csv").string(), res.trajectory,
                       cfg.precision);
  std::ofstream rep(fs::path(cfg.out_dir) / "verification.txt");
  rep << res.report();
  if (log_level() > 0) out << res.report();
  return 0;
}

int do_reconstruct(const RunConfig& cfg, const CliArgs& args, std::ostream& out) {
  if (args.trajectory_path.empty())
    throw ParseError("reconstruct needs --trajectory <csv>");
  TrajectoryCsv input = read_trajectory_csv(args.trajectory_path);
  if (input.beams.size() != cfg.network.beams.size())
    throw ValidationError("trajectory beam count does not match the config");

  Trajectory traj;
  traj.beams = std::move(input.beams);
  std::vector<BeamAnchor> anchors;
  const auto& infos_nodes = cfg.network.nodes;
  for (std::size_t i = 0; i < traj.beams.size(); ++i) {
    // Anchor at the lowest-index node touching this beam.
    BeamAnchor a;
    for (const NodeRecord& n : infos_nodes) {
      bool found = false;
      for (const NodeIncidence& inc : n.incident)
        if (inc.beam == int(i)) {
          a.ix = inc.at_end ? traj.beams[i].nx : 0;
          found = true;
        }
      if (found) break;
    }
    const double xa = traj.beams[i].dx * a.ix;
    a.R0 = cfg.network.beams[i].rotation_at(xa);
    a.p0 = cfg.reconstruct ? cfg.reconstruct->anchor_positions[i] : Vec3::Zero();
    anchors.push_back(a);
  }
  ReconstructOptions opt;
  if (args.tol > 0.0) opt.compat_tol = args.tol;
  ReconstructReport report;
  const auto fields = reconstruct(traj, cfg.network.beams, anchors, opt, &report);

  fs::create_directories(cfg.out_dir);
  write_centerline_csv((fs::path(cfg.out_dir) / "centerline.csv").string(), fields,
                       cfg.precision);
  std::ofstream rep(fs::path(cfg.out_dir) / "reconstruction.txt");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    double rmax = 0.0;
    for (double v : geb_residual(fields[i], cfg.network.beams[i])) rmax = std::max(rmax, v);
    rep << "beam " << i + 1
        << " balance residual: " << format_double(rmax)
        << " transport identity: " << format_double(report.strain_identity_residual[i])
        << " rotation drift: " << format_double(report.rotation_drift[i]) << "\n";
  }
  for (const auto& w : report.warnings) rep << w << "\n";
  if (log_level() > 0) out << "reconstruct: wrote centerline.csv\n";
  return 0;
}

int do_plan(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.plan) throw ParseError("config has no 'plan' section");
  const PlanInput input = PlanInput::from_network(cfg.network, cfg.plan->charged,
                                                  cfg.plan->controlled, cfg.plan->path_edges);
  const ConditionReport cond = check_sufficient_conditions(input);
  if (!cond.ok()) {
    out << "conditions: FAIL\n" << cond.to_string();
    return int(ErrorCode::Validation);
  }
  out << "conditions: ok\n" << build_plan(input).to_string();
  return 0;
}

int do_check(const RunConfig& cfg, std::ostream& out) {
  const auto dbs = diagonalize_all(cfg.network, cfg.simulation.nx);
  std::vector<Series6> q;
  for (const NodeRecord& n : cfg.network.nodes) q.push_back(n.data);
  const CompatReport rep = check_first_order_compat(cfg.network, dbs, cfg.initial, q);
  out << rep.to_string();
  out << "max residual: " << format_double(rep.max_residual) << "\n";
  return 0;
}

}  // namespace

int run_command(const CliArgs& args, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_config(args.config_path);
    apply_overrides(&cfg, args);
    if (args.subcommand == "simulate") return do_simulate(cfg, out);
    if (args.subcommand == "control") return do_control(cfg, out);
    if (args.subcommand == "reconstruct") return do_reconstruct(cfg, args, out);
    if (args.subcommand == "plan") return do_plan(cfg, out);
    if (args.subcommand == "check") return do_check(cfg, out);
    err << "error[parse]: unknown subcommand '" << args.subcommand << "'\n";
    return int(ErrorCode::Parse);
  } catch (const Error& e) {
    const char* tag = e.code() == ErrorCode::Parse        ? "parse"
                      : e.code() == ErrorCode::Validation ? "validation"
                                                          : "runtime";
    err << "error[" << tag << "]: " << e.what() << "\n";
    return int(e.code());
  } catch (const std::exception& e) {
    err << "error[runtime]: " << e.what() << "\n";
    return int(ErrorCode::Runtime);
  }
}

}  // namespace beamnet
