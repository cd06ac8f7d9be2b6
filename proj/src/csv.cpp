#include "beamnet/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace beamnet {

std::string format_double(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  return os;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ": bad number '" + s + "'");
  }
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int digits) {
  auto os = open_out(path);
  os << "beam,x,t";
  for (int k = 1; k <= 6; ++k) os << ",v" << k;
  for (int k = 1; k <= 6; ++k) os << ",z" << k;
  os << "\n";
  for (std::size_t b = 0; b < traj.beams.size(); ++b) {
    const BeamField& f = traj.beams[b];
    for (int it = 0; it <= f.n_t; ++it) {
      for (int ix = 0; ix <= f.nx; ++ix) {
        os << b + 1 << "," << format_double(f.dx * ix, digits) << ","
           << format_double(f.dt * it, digits);
        const Vec12 y = f.at(ix, it);
        for (int k = 0; k < 12; ++k) os << "," << format_double(y[k], digits);
        os << "\n";
      }
    }
  }
}

template <int N>
void write_series_csv(const std::string& path, const Sampled<Eigen::Matrix<double, N, 1>>& s,
                      int digits) {
  auto os = open_out(path);
  os << "t";
  for (int k = 1; k <= N; ++k) os << ",c" << k;
  os << "\n";
  for (std::size_t m = 0; m < s.size(); ++m) {
    const double t = s.start() + s.step() * double(m);
    os << format_double(t, digits);
    const auto v = s.samples()[m];
    for (int k = 0; k < N; ++k) os << "," << format_double(v[k], digits);
    os << "\n";
  }
}

template <int N>
Sampled<Eigen::Matrix<double, N, 1>> read_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path + ": empty file");
  std::vector<double> times;
  std::vector<Eigen::Matrix<double, N, 1>> values;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split_line(line);
    if (int(parts.size()) != N + 1)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(N + 1) + " columns");
    times.push_back(parse_double(parts[0], path));
    Eigen::Matrix<double, N, 1> v;
    for (int k = 0; k < N; ++k) v[k] = parse_double(parts[std::size_t(k + 1)], path);
    values.push_back(v);
  }
  if (values.size() < 2) throw ParseError(path + ": need at least two samples");
  const double step = times[1] - times[0];
  for (std::size_t m = 1; m < times.size(); ++m)
    if (std::abs(times[m] - times[m - 1] - step) > 1e-9 * (1.0 + std::abs(step)))
      throw ParseError(path + ": time samples not uniform");
  return Sampled<Eigen::Matrix<double, N, 1>>::from_samples(times[0], step, std::move(values));
}

template void write_series_csv<6>(const std::string&, const Sampled<Vec6>&, int);
template void write_series_csv<12>(const std::string&, const Sampled<Vec12>&, int);
template Sampled<Vec6> read_series_csv<6>(const std::string&);
template Sampled<Vec12> read_series_csv<12>(const std::string&);

TrajectoryCsv read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path + ": empty file");

  struct Row {
    double x, t;
    Vec12 y;
  };
  std::map<int, std::vector<Row>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split_line(line);
    if (parts.size() != 15)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 15 columns");
    const int beam = int(parse_double(parts[0], path));
    Row r;
    r.x = parse_double(parts[1], path);
    r.t = parse_double(parts[2], path);
    for (int k = 0; k < 12; ++k) r.y[k] = parse_double(parts[std::size_t(k + 3)], path);
    rows[beam].push_back(r);
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  TrajectoryCsv out;
  int expected = 1;
  for (auto& [beam, rs] : rows) {
    if (beam != expected)
      throw ParseError(path + ": beam ids must be 1..N without gaps");
    ++expected;
    std::set<double> xs, ts;
    for (const Row& r : rs) {
      xs.insert(r.x);
      ts.insert(r.t);
    }
    const int nx = int(xs.size()) - 1;
    const int nt = int(ts.size()) - 1;
    if (nx < 1 || nt < 0 || rs.size() != xs.size() * ts.size())
      throw ParseError(path + ": beam " + std::to_string(beam) + " grid incomplete");
    const double dx = (*xs.rbegin() - *xs.begin()) / nx;
    const double dt = nt > 0 ? (*ts.rbegin() - *ts.begin()) / nt : 1.0;
    BeamField f;
    f.allocate(nx, nt, dx, dt);
    for (const Row& r : rs) {
      const int ix = int(std::lround(r.x / dx));
      const int it = nt > 0 ? int(std::lround(r.t / dt)) : 0;
      if (ix < 0 || ix > nx || it < 0 || it > nt ||
          std::abs(r.x - ix * dx) > 1e-9 * (1.0 + dx) ||
          std::abs(r.t - it * dt) > 1e-9 * (1.0 + dt))
        throw ParseError(path + ": sample off the uniform grid");
      f.at(ix, it) = r.y;
    }
    out.beams.push_back(std::move(f));
  }
  return out;
}

void write_centerline_csv(const std::string& path, const std::vector<GebField>& fields,
                          int digits) {
  auto os = open_out(path);
  os << "beam,x,t,p1,p2,p3,r11,r12,r13,r21,r22,r23,r31,r32,r33\n";
  for (std::size_t b = 0; b < fields.size(); ++b) {
    const GebField& f = fields[b];
    for (int it = 0; it <= f.n_t; ++it) {
      for (int ix = 0; ix <= f.nx; ++ix) {
        os << b + 1 << "," << format_double(f.dx * ix, digits) << ","
           << format_double(f.dt * it, digits);
        const Vec3& p = f.p_at(ix, it);
        for (int k = 0; k < 3; ++k) os << "," << format_double(p[k], digits);
        const Mat3& r = f.R_at(ix, it);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) os << "," << format_double(r(i, j), digits);
        os << "\n";
      }
    }
  }
}

}  // namespace beamnet
