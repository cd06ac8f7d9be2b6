#include "beamnet/control.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"

using namespace beamnet;
using namespace beamnet::testing;

namespace {

std::vector<DiagonalizedBeam> diag_all(const NetworkSpec& net, int nx) {
  std::vector<DiagonalizedBeam> dbs;
  for (const BeamSpec& b : net.beams) dbs.push_back(diagonalize(b, nx + 1));
  return dbs;
}

// Smooth compatible profiles for the A-shaped unit network: shared
// velocities, opposite forces, zero node load.
std::pair<Series12, Series12> smooth_profiles(double amp, double t_star, double t_final,
                                              unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 2 * M_PI);
  std::uniform_real_distribution<double> am(0.5, 1.0);
  const int n = 201;
  const double dt = (t_final - t_star) / (n - 1);
  std::vector<Vec12> p1(static_cast<std::size_t>(n)), p2(static_cast<std::size_t>(n));
  std::array<double, 12> a{}, b{};
  for (int k = 0; k < 12; ++k) {
    a[std::size_t(k)] = am(rng);
    b[std::size_t(k)] = ph(rng);
  }
  for (int m = 0; m < n; ++m) {
    const double t = t_star + dt * m;
    Vec12 v;
    for (int k = 0; k < 12; ++k)
      v[k] = amp * a[std::size_t(k)] * std::sin(2.0 * t + b[std::size_t(k)]) +
             0.3 * amp * std::cos(1.3 * t + 0.7 * b[std::size_t(k)]);
    p1[std::size_t(m)] = v;
    Vec12 w = v;
    w.tail<6>() = -v.tail<6>();
    p2[std::size_t(m)] = w;
  }
  return {Series12::from_samples(t_star, dt, std::move(p1)),
          Series12::from_samples(t_star, dt, std::move(p2))};
}

double tracking_error(const NetworkSpec& net, const ControlResult& res,
                      const ControlProblem& prob, int nx) {
  const auto dbs = diag_all(net, nx);
  std::vector<int> nxs(net.beams.size(), nx);
  const Grid grid = make_grid(dbs, nxs, 0.9, prob.t_final);
  std::vector<Series6> q = {prob.q1, prob.q2, prob.q3, res.q4, res.q5};
  const Trajectory resim = solve_forward(net, dbs, prob.y0, q, grid);
  double err = 0.0;
  for (int m = 0; m <= grid.n_t; ++m) {
    const double t = grid.dt * m;
    if (t < prob.t_star - 1e-12) continue;
    err = std::max(err, (Vec12(resim.beams[0].at(0, m)) - prob.profile1.at(t))
                            .cwiseAbs()
                            .maxCoeff());
    err = std::max(err, (Vec12(resim.beams[1].at(0, m)) - prob.profile2.at(t))
                            .cwiseAbs()
                            .maxCoeff());
  }
  return err;
}

}  // namespace

TEST_CASE("transmission time") {
  BeamSpec unit;
  CHECK(transmission_time(diagonalize(unit, 51)) == doctest::Approx(1.0));

  BeamSpec soft;
  soft.length = 2.0;
  soft.flexibility = XFieldMat6::constant(4.0 * Mat6::Identity());
  CHECK(transmission_time(diagonalize(soft, 51)) == doctest::Approx(4.0));

  // Varying flexibility between the two: quadrature against a refined grid.
  BeamSpec vary;
  const int n = 41;
  std::vector<Mat6> flex;
  for (int k = 0; k < n; ++k)
    flex.push_back(Mat6((1.0 + 3.0 * k / double(n - 1)) * Mat6::Identity()));
  vary.flexibility = XFieldMat6::from_samples(0.0, 1.0 / (n - 1), std::move(flex));
  const double coarse = transmission_time(diagonalize(vary, 501));
  const double fine = transmission_time(diagonalize(vary, 5001));
  CHECK(coarse > 1.0);
  CHECK(coarse < 4.0);
  CHECK(std::abs(coarse - fine) < 1e-6);
}

TEST_CASE("controllability horizon") {
  std::vector<double> t = {1, 1, 1, 1, 1};
  CHECK(controllability_time(t) == doctest::Approx(2.0));
  t = {1, 3, 10, 2, 1};
  CHECK(controllability_time(t) == doctest::Approx(5.0));
  t[2] = 100.0;  // the crossbar does not enter
  CHECK(controllability_time(t) == doctest::Approx(5.0));
}

TEST_CASE("cubic bridge") {
  const auto zero = hermite_bridge<6>(0, 1, Vec6::Zero(), Vec6::Zero(), Vec6::Zero(),
                                      Vec6::Zero(), 11);
  for (const Vec6& v : zero.samples()) CHECK(v.norm() == 0.0);

  const Vec6 one = Vec6::Ones();
  const auto flat = hermite_bridge<6>(0, 1, one, Vec6::Zero(), one, Vec6::Zero(), 11);
  for (const Vec6& v : flat.samples()) CHECK((v - one).norm() < 1e-15);

  // Values (0,1) with slopes (1,0): the interior value follows the basis
  // polynomials evaluated directly.
  const auto h = hermite_bridge<1>(0, 1, Eigen::Matrix<double, 1, 1>(0),
                                   Eigen::Matrix<double, 1, 1>(1),
                                   Eigen::Matrix<double, 1, 1>(1),
                                   Eigen::Matrix<double, 1, 1>(0), 3);
  const double u = 0.5;
  const double want = (u * u * u - 2 * u * u + u) * 1.0 + (-2 * u * u * u + 3 * u * u) * 1.0;
  CHECK(h.samples()[1][0] == doctest::Approx(want));
  CHECK(h.samples()[0][0] == doctest::Approx(0.0));
  CHECK(h.samples()[2][0] == doctest::Approx(1.0));
}

TEST_CASE("synthesis on the zero problem") {
  NetworkSpec net = unit_a_network();
  ControlProblem prob;
  prob.network = &net;
  prob.y0.assign(5, XField12::constant(Vec12::Zero()));
  prob.profile1 = Series12::constant(Vec12::Zero());
  prob.profile2 = Series12::constant(Vec12::Zero());
  prob.t_star = 2.5;
  prob.t_final = 3.0;
  const ControlResult res = synthesize(prob, 24, 0.9);
  CHECK(res.t_bar == doctest::Approx(2.0));
  for (const Vec6& v : res.q4.samples()) CHECK(v.norm() < 1e-13);
  for (const Vec6& v : res.q5.samples()) CHECK(v.norm() < 1e-13);
  for (const BeamField& f : res.trajectory.beams)
    for (double v : f.y) CHECK(std::abs(v) < 1e-13);
  for (double d : res.recovery_deviation) CHECK(d < 1e-13);
}

TEST_CASE("synthesis keeps a rigid translation in equilibrium") {
  NetworkSpec net = unit_a_network();
  Vec12 y = Vec12::Zero();
  y.head<3>() = Vec3(0.01, 0, 0);
  ControlProblem prob;
  prob.network = &net;
  prob.y0.assign(5, XField12::constant(y));
  prob.profile1 = Series12::constant(y);
  prob.profile2 = Series12::constant(y);
  prob.t_star = 2.5;
  prob.t_final = 3.0;
  const ControlResult res = synthesize(prob, 24, 0.9);
  for (const Vec6& v : res.q4.samples()) CHECK(v.norm() < 1e-9);
  for (const Vec6& v : res.q5.samples()) CHECK(v.norm() < 1e-9);
  for (double d : res.recovery_deviation) CHECK(d < 1e-9);
  for (double e : res.profile_trace_error) CHECK(e < 1e-9);
}

TEST_CASE("closed-loop tracking of smooth random profiles") {
  NetworkSpec net = unit_a_network();
  ControlProblem prob;
  prob.network = &net;
  prob.y0.assign(5, XField12::constant(Vec12::Zero()));
  std::tie(prob.profile1, prob.profile2) = smooth_profiles(1e-3, 2.5, 3.5, 99);
  prob.t_star = 2.5;
  prob.t_final = 3.5;

  const ControlResult coarse = synthesize(prob, 50, 0.9);
  const double e50 = tracking_error(net, coarse, prob, 50);
  CHECK(e50 < 2e-4);

  const ControlResult fine = synthesize(prob, 100, 0.9);
  const double e100 = tracking_error(net, fine, prob, 100);
  CHECK(e50 / e100 > 1.4);

  // The constructed solution carries the profiles on its own traces.
  for (double e : coarse.profile_trace_error) CHECK(e < 1e-12);
  // Construction matches the preliminary solution on the recovery domains
  // at scheme accuracy.
  for (double d : coarse.recovery_deviation) CHECK(d < 5e-4);
  for (std::size_t i = 0; i < fine.recovery_deviation.size(); ++i)
    CHECK(fine.recovery_deviation[i] < std::max(coarse.recovery_deviation[i], 1e-12));
}

TEST_CASE("synthesis rejections") {
  NetworkSpec net = unit_a_network();
  ControlProblem prob;
  prob.network = &net;
  prob.y0.assign(5, XField12::constant(Vec12::Zero()));
  prob.profile1 = Series12::constant(Vec12::Zero());
  prob.profile2 = Series12::constant(Vec12::Zero());

  SUBCASE("profile window must start after the controllability time") {
    prob.t_star = 1.5;
    prob.t_final = 3.0;
    CHECK_THROWS_AS(synthesize(prob, 16, 0.9), ValidationError);
  }

  SUBCASE("profiles must balance at the profiled node") {
    prob.t_star = 2.5;
    prob.t_final = 3.0;
    Vec12 bad = Vec12::Zero();
    bad[7] = 1e-3;  // force component of beam 1 only
    prob.profile1 = Series12::constant(bad);
    CHECK_THROWS_AS(synthesize(prob, 16, 0.9), ProfileIncompatible);
  }

  SUBCASE("wrong topology is refused") {
    NetworkSpec single = single_beam_network();
    prob.network = &single;
    prob.t_star = 2.5;
    prob.t_final = 3.0;
    CHECK_THROWS_AS(synthesize(prob, 16, 0.9), ValidationError);
  }
}

TEST_CASE("general execution: path layouts and a star") {
  SUBCASE("two-beam path, both edges forward-oriented") {
    NetworkSpec net;
    for (int i = 0; i < 2; ++i) {
      BeamSpec b;
      b.id = i;
      net.beams.push_back(b);
    }
    net.nodes = {
        make_node(0, NodeKind::SimpleNeumann, {{0, false}}),
        make_node(1, NodeKind::MultipleKirchhoff, {{0, true}, {1, false}}),
        make_node(2, NodeKind::SimpleNeumann, {{1, true}}),
    };
    const int nx = 40;
    const auto dbs = diag_all(net, nx);
    std::vector<int> nxs(2, nx);
    const Grid grid = make_grid(dbs, nxs, 0.9, 3.0);

    GeneralControlProblem gp;
    gp.network = &net;
    gp.dbs = dbs;
    gp.y0.assign(2, XField12::constant(Vec12::Zero()));
    gp.node_data.assign(3, Series6::constant(Vec6::Zero()));
    gp.charged = {0};
    gp.controlled = {2};
    gp.t_star = 2.5;
    gp.t_final = 3.0;

    // Velocity-only profile; the force half is pinned by the zero load at
    // the profiled simple node.
    const int n = 101;
    std::vector<Vec12> pv(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      const double t = 2.5 + 0.5 * m / double(n - 1);
      Vec12 v = Vec12::Zero();
      v[0] = 1e-3 * std::sin(2 * t);
      v[4] = 1e-3 * std::cos(1.5 * t);
      pv[std::size_t(m)] = v;
    }
    gp.profiles = {{Series12::from_samples(2.5, 0.5 / (n - 1), std::move(pv))}};

    const Plan plan = build_plan(PlanInput::from_network(net, {0}, {2}, {0, 1}));
    const ExecutionResult res = execute_plan(plan, gp, grid);
    CHECK(res.t_bar == doctest::Approx(2.0));

    // Closed loop: drive the network with the extracted control.
    std::vector<Series6> q = {Series6::constant(Vec6::Zero()),
                              Series6::constant(Vec6::Zero()), res.controls[0]};
    const Trajectory resim = solve_forward(net, dbs, gp.y0, q, grid);
    double err = 0.0;
    for (int m = 0; m <= grid.n_t; ++m) {
      const double t = grid.dt * m;
      if (t < 2.5) continue;
      err = std::max(err, (Vec12(resim.beams[0].at(0, m)) - gp.profiles[0][0].at(t))
                              .cwiseAbs()
                              .maxCoeff());
    }
    CHECK(err < 3e-4);
  }

  SUBCASE("path with a reversed second edge uses a leftward sweep") {
    NetworkSpec net;
    for (int i = 0; i < 2; ++i) {
      BeamSpec b;
      b.id = i;
      net.beams.push_back(b);
    }
    net.nodes = {
        make_node(0, NodeKind::SimpleNeumann, {{0, false}}),
        make_node(1, NodeKind::MultipleKirchhoff, {{0, true}, {1, true}}),
        make_node(2, NodeKind::SimpleNeumann, {{1, false}}),
    };
    const int nx = 30;
    const auto dbs = diag_all(net, nx);
    std::vector<int> nxs(2, nx);
    const Grid grid = make_grid(dbs, nxs, 0.9, 3.0);

    GeneralControlProblem gp;
    gp.network = &net;
    gp.dbs = dbs;
    gp.y0.assign(2, XField12::constant(Vec12::Zero()));
    gp.node_data.assign(3, Series6::constant(Vec6::Zero()));
    gp.charged = {0};
    gp.controlled = {2};
    gp.profiles = {{Series12::constant(Vec12::Zero())}};
    gp.t_star = 2.5;
    gp.t_final = 3.0;

    const Plan plan = build_plan(PlanInput::from_network(net, {0}, {2}, {0, 1}));
    const ExecutionResult res = execute_plan(plan, gp, grid);
    for (const Vec6& v : res.controls[0].samples()) CHECK(v.norm() < 1e-13);
    for (const BeamField& f : res.trajectory.beams)
      for (double v : f.y) CHECK(std::abs(v) < 1e-13);
  }

  SUBCASE("charged star center with a rigid translation") {
    NetworkSpec net;
    for (int i = 0; i < 3; ++i) {
      BeamSpec b;
      b.id = i;
      net.beams.push_back(b);
    }
    net.nodes = {
        make_node(0, NodeKind::MultipleKirchhoff, {{0, false}, {1, false}, {2, false}}),
        make_node(1, NodeKind::SimpleNeumann, {{0, true}}),
        make_node(2, NodeKind::SimpleNeumann, {{1, true}}),
        make_node(3, NodeKind::SimpleNeumann, {{2, true}}),
    };
    const int nx = 24;
    const auto dbs = diag_all(net, nx);
    std::vector<int> nxs(3, nx);
    const Grid grid = make_grid(dbs, nxs, 0.9, 2.0);

    Vec12 y = Vec12::Zero();
    y.head<3>() = Vec3(0.01, 0, 0);
    GeneralControlProblem gp;
    gp.network = &net;
    gp.dbs = dbs;
    gp.y0.assign(3, XField12::constant(y));
    gp.node_data.assign(4, Series6::constant(Vec6::Zero()));
    gp.charged = {0};
    gp.controlled = {1, 2, 3};
    gp.profiles = {{Series12::constant(y), Series12::constant(y), Series12::constant(y)}};
    gp.t_star = 1.5;
    gp.t_final = 2.0;

    const Plan plan = build_plan(PlanInput::from_network(net, {0}, {1, 2, 3}, {0, 1, 2}));
    const ExecutionResult res = execute_plan(plan, gp, grid);
    CHECK(res.t_bar == doctest::Approx(1.0));
    for (const Series6& c : res.controls)
      for (const Vec6& v : c.samples()) CHECK(v.norm() < 1e-9);
  }
}

TEST_CASE("synthesis and direct plan execution share their arithmetic") {
  NetworkSpec net = unit_a_network();
  ControlProblem prob;
  prob.network = &net;
  prob.y0.assign(5, XField12::constant(Vec12::Zero()));
  std::tie(prob.profile1, prob.profile2) = smooth_profiles(1e-3, 2.5, 3.2, 5);
  prob.t_star = 2.5;
  prob.t_final = 3.2;
  const int nx = 30;
  const ControlResult res = synthesize(prob, nx, 0.9);

  const auto dbs = diag_all(net, nx);
  std::vector<int> nxs(5, nx);
  const Grid grid = make_grid(dbs, nxs, 0.9, prob.t_final);
  GeneralControlProblem gp;
  gp.network = &net;
  gp.dbs = dbs;
  gp.y0 = prob.y0;
  gp.node_data = {prob.q1, prob.q2, prob.q3, Series6::constant(Vec6::Zero()),
                  Series6::constant(Vec6::Zero())};
  gp.charged = {0};
  gp.controlled = {3, 4};
  gp.profiles = {{prob.profile1, prob.profile2}};
  gp.t_star = prob.t_star;
  gp.t_final = prob.t_final;
  const Plan plan = build_plan(PlanInput::from_network(net, {0}, {3, 4}, {0, 1, 3, 4}));
  const ExecutionResult er = execute_plan(plan, gp, grid);

  REQUIRE(er.controls[0].size() == res.q4.size());
  for (std::size_t m = 0; m < res.q4.size(); ++m) {
    CHECK((er.controls[0].samples()[m] - res.q4.samples()[m]).norm() == 0.0);
    CHECK((er.controls[1].samples()[m] - res.q5.samples()[m]).norm() == 0.0);
  }
}

TEST_CASE("synthesized trajectory satisfies the node conditions at stored times") {
  NetworkSpec net = unit_a_network();
  ControlProblem prob;
  prob.network = &net;
  prob.y0.assign(5, XField12::constant(Vec12::Zero()));
  std::tie(prob.profile1, prob.profile2) = smooth_profiles(1e-3, 2.5, 3.2, 77);
  prob.t_star = 2.5;
  prob.t_final = 3.2;
  const int nx = 40;
  const ControlResult res = synthesize(prob, nx, 0.9);
  const Trajectory& traj = res.trajectory;
  const int n_t = traj.beams[0].n_t;

  std::vector<Series6> data = {prob.q1, prob.q2, prob.q3, res.q4, res.q5};
  double worst = 0.0;
  for (int n = 0; n < 5; ++n) {
    const NodeRecord& node = net.nodes[std::size_t(n)];
    for (int m = 0; m <= n_t; ++m) {
      const double t = traj.beams[0].dt * m;
      const Vec6 q = data[std::size_t(n)].at(t);
      if (node.kind == NodeKind::MultipleKirchhoff) {
        Vec6 ref = Vec6::Zero(), bal = Vec6::Zero();
        for (std::size_t a = 0; a < node.incident.size(); ++a) {
          const NodeIncidence& inc = node.incident[a];
          const std::size_t b = std::size_t(inc.beam);
          const int ix = inc.at_end ? nx : 0;
          const Vec12 y = traj.beams[b].at(ix, m);
          if (a == 0)
            ref = y.head<6>();
          else
            worst = std::max(worst, (y.head<6>() - ref).cwiseAbs().maxCoeff());
          bal += double(inc.tau) * y.tail<6>();
        }
        worst = std::max(worst, (bal - q).cwiseAbs().maxCoeff());
      } else {
        const NodeIncidence& inc = node.incident[0];
        const Vec12 y = traj.beams[std::size_t(inc.beam)].at(inc.at_end ? nx : 0, m);
        worst = std::max(worst, (double(inc.tau) * y.tail<6>() - q).cwiseAbs().maxCoeff());
      }
    }
  }
  CHECK(worst < 1e-9);
}
