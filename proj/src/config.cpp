#include "beamnet/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "beamnet/kinematics.hpp"

namespace beamnet {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ParseError(what); }

Mat6 mat6_from(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != 36) bad(where + ": expected 36 numbers");
  Mat6 m;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = arr[std::size_t(6 * i + j)].get<double>();
  return m;
}

Vec3 vec3_from(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != 3) bad(where + ": expected 3 numbers");
  return Vec3(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

XFieldMat6 mat6_field(const json& j, double length, const std::string& where) {
  if (j.contains("constant")) return XFieldMat6::constant(mat6_from(j["constant"], where));
  if (j.contains("samples")) {
    const json& rows = j["samples"];
    if (!rows.is_array() || rows.size() < 2) bad(where + ": need at least 2 sample rows");
    std::vector<Mat6> vals;
    for (const auto& r : rows) vals.push_back(mat6_from(r, where));
    return XFieldMat6::from_samples(0.0, length / double(vals.size() - 1), std::move(vals));
  }
  bad(where + ": expected 'constant' or 'samples'");
}

XFieldMat3 rotation_field(const json& j, double length, const std::string& where) {
  if (j.contains("identity") && j["identity"].get<bool>())
    return XFieldMat3::constant(Mat3::Identity());
  if (j.contains("constant_axis_angle")) {
    const Vec3 aa = vec3_from(j["constant_axis_angle"], where);
    return XFieldMat3::constant(quat_to_rot(UnitQuaternion::from_rotation_vector(aa)));
  }
  if (j.contains("axis_angle_samples")) {
    const json& rows = j["axis_angle_samples"];
    if (!rows.is_array() || rows.size() < 3) bad(where + ": need at least 3 sample rows");
    std::vector<Mat3> vals;
    for (const auto& r : rows)
      vals.push_back(quat_to_rot(UnitQuaternion::from_rotation_vector(vec3_from(r, where))));
    return XFieldMat3::from_samples(0.0, length / double(vals.size() - 1), std::move(vals));
  }
  bad(where + ": expected 'identity', 'constant_axis_angle' or 'axis_angle_samples'");
}

template <int N>
Sampled<Eigen::Matrix<double, N, 1>> series_from(const json& j, const std::string& where) {
  using V = Eigen::Matrix<double, N, 1>;
  auto vecN = [&](const json& arr) {
    if (!arr.is_array() || arr.size() != N)
      bad(where + ": expected " + std::to_string(N) + " numbers");
    V v;
    for (int k = 0; k < N; ++k) v[k] = arr[std::size_t(k)].get<double>();
    return v;
  };
  if (j.contains("constant")) return Sampled<V>::constant(vecN(j["constant"]));
  if (j.contains("series")) {
    const json& s = j["series"];
    if (!s.contains("start") || !s.contains("step") || !s.contains("values"))
      bad(where + ": series needs start, step, values");
    std::vector<V> vals;
    for (const auto& r : s["values"]) vals.push_back(vecN(r));
    if (vals.size() < 2) bad(where + ": series needs at least 2 values");
    return Sampled<V>::from_samples(s["start"].get<double>(), s["step"].get<double>(),
                                    std::move(vals));
  }
  bad(where + ": expected 'constant' or 'series'");
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config: " + path);
  json root;
  try {
    root = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  RunConfig cfg;
  cfg.config_dir = std::filesystem::path(path).parent_path().string();
  try {
    if (!root.contains("beams") || !root.contains("nodes"))
      bad(path + ": config needs 'beams' and 'nodes'");

    int beam_id = 0;
    for (const auto& jb : root["beams"]) {
      BeamSpec b;
      b.id = beam_id++;
      b.length = jb.at("length").get<double>();
      const std::string where = "beam " + std::to_string(b.id + 1);
      if (jb.contains("mass")) b.mass = mat6_field(jb["mass"], b.length, where + " mass");
      if (jb.contains("flexibility"))
        b.flexibility = mat6_field(jb["flexibility"], b.length, where + " flexibility");
      if (jb.contains("rotation"))
        b.undeformed_rotation = rotation_field(jb["rotation"], b.length, where + " rotation");
      cfg.network.beams.push_back(std::move(b));
    }

    int node_id = 0;
    for (const auto& jn : root["nodes"]) {
      NodeRecord n;
      n.id = node_id++;
      const std::string kind = jn.at("kind").get<std::string>();
      if (kind == "multiple")
        n.kind = NodeKind::MultipleKirchhoff;
      else if (kind == "neumann")
        n.kind = NodeKind::SimpleNeumann;
      else if (kind == "dirichlet")
        n.kind = NodeKind::SimpleDirichlet;
      else
        bad(path + ": node kind '" + kind + "'");
      for (const auto& ji : jn.at("incidences")) {
        NodeIncidence inc;
        inc.beam = ji.at("beam").get<int>() - 1;
        const std::string end = ji.at("end").get<std::string>();
        if (end == "start")
          inc.at_end = false;
        else if (end == "end")
          inc.at_end = true;
        else
          bad(path + ": incidence end '" + end + "'");
        inc.tau = inc.at_end ? +1 : -1;
        n.incident.push_back(inc);
        n.ending_count += inc.at_end ? 1 : 0;
      }
      std::sort(n.incident.begin(), n.incident.end(),
                [](const NodeIncidence& a, const NodeIncidence& b) { return a.beam < b.beam; });
      if (jn.contains("data"))
        n.data = series_from<6>(jn["data"], path + " node " + std::to_string(n.id + 1));
      cfg.network.nodes.push_back(std::move(n));
    }

    // Initial state.
    const std::size_t nb = cfg.network.beams.size();
    cfg.initial.assign(nb, XField12::constant(Vec12::Zero()));
    if (root.contains("initial")) {
      const json& ji = root["initial"];
      if (ji.contains("zero") && ji["zero"].get<bool>()) {
        // keep zeros
      } else if (ji.contains("constant")) {
        const json& rows = ji["constant"];
        if (rows.size() != nb) bad(path + ": initial.constant needs one row per beam");
        for (std::size_t i = 0; i < nb; ++i) {
          Vec12 v;
          for (int k = 0; k < 12; ++k) v[k] = rows[i][std::size_t(k)].get<double>();
          cfg.initial[i] = XField12::constant(v);
        }
      } else if (ji.contains("samples")) {
        const json& per_beam = ji["samples"];
        if (per_beam.size() != nb) bad(path + ": initial.samples needs one table per beam");
        for (std::size_t i = 0; i < nb; ++i) {
          std::vector<Vec12> vals;
          for (const auto& row : per_beam[i]) {
            Vec12 v;
            for (int k = 0; k < 12; ++k) v[k] = row[std::size_t(k)].get<double>();
            vals.push_back(v);
          }
          if (vals.size() < 2) bad(path + ": initial sample table too short");
          cfg.initial[i] = XField12::from_samples(
              0.0, cfg.network.beams[i].length / double(vals.size() - 1), std::move(vals));
        }
      } else {
        bad(path + ": initial needs 'zero', 'constant' or 'samples'");
      }
    }

    if (root.contains("simulation")) {
      const json& js = root["simulation"];
      if (js.contains("nx")) cfg.simulation.nx = js["nx"].get<int>();
      if (js.contains("cfl")) cfg.simulation.cfl = js["cfl"].get<double>();
      if (js.contains("horizon")) cfg.simulation.horizon = js["horizon"].get<double>();
      if (cfg.simulation.nx < 2) bad(path + ": simulation.nx must be at least 2");
      if (!(cfg.simulation.cfl > 0.0 && cfg.simulation.cfl <= 1.0))
        bad(path + ": simulation.cfl must lie in (0, 1]");
    }

    if (root.contains("control")) {
      const json& jc = root["control"];
      ControlConfig cc;
      cc.t_star = jc.at("t_star").get<double>();
      cc.t_final = jc.at("t_final").get<double>();
      for (const auto& f : jc.at("profiles")) cc.profile_files.push_back(f.get<std::string>());
      cfg.control = std::move(cc);
    }

    if (root.contains("plan")) {
      const json& jp = root["plan"];
      PlanConfig pc;
      for (const auto& v : jp.at("charged")) pc.charged.push_back(v.get<int>() - 1);
      for (const auto& v : jp.at("controlled")) pc.controlled.push_back(v.get<int>() - 1);
      for (const auto& v : jp.at("path_edges")) pc.path_edges.push_back(v.get<int>() - 1);
      cfg.plan = std::move(pc);
    }

    if (root.contains("reconstruct")) {
      ReconstructConfig rc;
      for (const auto& row : root["reconstruct"].at("anchor_positions"))
        rc.anchor_positions.push_back(vec3_from(row, path + " anchor"));
      if (rc.anchor_positions.size() != nb)
        bad(path + ": reconstruct.anchor_positions needs one entry per beam");
      cfg.reconstruct = std::move(rc);
    }

    if (root.contains("io")) {
      const json& jo = root["io"];
      if (jo.contains("out_dir")) cfg.out_dir = jo["out_dir"].get<std::string>();
      if (jo.contains("precision")) cfg.precision = jo["precision"].get<int>();
      if (cfg.precision < 1 || cfg.precision > 17)
        bad(path + ": io.precision must lie in [1, 17]");
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  const ValidationReport rep = validate(cfg.network);
  if (!rep.ok()) throw ValidationError(path + ":\n" + rep.to_string());
  return cfg;
}

}  // namespace beamnet
