// SPDX-License-Identifier: Apache-2.0
#include "cohten/io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cohten/errors.hpp"

namespace cohten {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
  throw io_error(path.string() + ": " + what);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

void flush_or_fail(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) fail(path, "write failed");
}

// Reads the next line, tolerating CRLF endings.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

// Parses a line of exactly `n` doubles; trailing non-space content is an
// error.
void parse_doubles(const std::filesystem::path& path, const std::string& line,
                   double* out, int n) {
  std::istringstream iss(line);
  for (int i = 0; i < n; ++i) {
    if (!(iss >> out[i])) fail(path, "expected " + std::to_string(n) +
                                         " numbers in line '" + line + "'");
  }
  std::string rest;
  if (iss >> rest) fail(path, "trailing content in line '" + line + "'");
}

void parse_ints(const std::filesystem::path& path, const std::string& line,
                long long* out, int n) {
  std::istringstream iss(line);
  for (int i = 0; i < n; ++i) {
    if (!(iss >> out[i])) fail(path, "expected " + std::to_string(n) +
                                         " integers in line '" + line + "'");
  }
  std::string rest;
  if (iss >> rest) fail(path, "trailing content in line '" + line + "'");
}

void expect_magic(const std::filesystem::path& path, std::istream& in,
                  const std::string& magic) {
  std::string line;
  if (!next_line(in, line)) fail(path, "empty file");
  if (line != magic) fail(path, "expected header '" + magic + "', got '" +
                                    line + "'");
}

cx read_entry(const std::filesystem::path& path, std::istream& in) {
  std::string line;
  if (!next_line(in, line)) fail(path, "unexpected end of file");
  double parts[2];
  parse_doubles(path, line, parts, 2);
  if (!std::isfinite(parts[0]) || !std::isfinite(parts[1]))
    fail(path, "non-finite value in line '" + line + "'");
  return cx(parts[0], parts[1]);
}

void check_no_trailing(const std::filesystem::path& path, std::istream& in) {
  std::string line;
  while (next_line(in, line)) {
    if (!line.empty() &&
        line.find_first_not_of(" \t") != std::string::npos)
      fail(path, "trailing content after data: '" + line + "'");
  }
}

// JSON helpers. All extraction errors become io_error with the field name.

const json& field(const std::filesystem::path& path, const json& j,
                  const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field \"" + key + "\"");
  return *it;
}

double num(const std::filesystem::path& path, const json& j,
           const std::string& where) {
  if (!j.is_number()) fail(path, where + " must be a number");
  double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, where + " must be finite");
  return x;
}

long long integer(const std::filesystem::path& path, const json& j,
                  const std::string& where) {
  if (!j.is_number_integer()) fail(path, where + " must be an integer");
  return j.get<long long>();
}

cx complex_pair(const std::filesystem::path& path, const json& j,
                const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    fail(path, where + " must be a [re, im] pair");
  return cx(num(path, j[0], where + "[0]"), num(path, j[1], where + "[1]"));
}

Eigen::Vector3d vec3(const std::filesystem::path& path, const json& j,
                     const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    fail(path, where + " must be an [x, y, z] triple");
  return Eigen::Vector3d(num(path, j[0], where + "[0]"),
                         num(path, j[1], where + "[1]"),
                         num(path, j[2], where + "[2]"));
}

Eigen::VectorXcd complex_vector(const std::filesystem::path& path,
                                const json& j, const std::string& where) {
  if (!j.is_array()) fail(path, where + " must be an array");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        complex_pair(path, j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

// Column-major flat list of [re, im] pairs -> rows x cols matrix.
Eigen::MatrixXcd complex_matrix(const std::filesystem::path& path,
                                const json& j, Eigen::Index rows,
                                Eigen::Index cols, const std::string& where) {
  if (!j.is_array() ||
      j.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    fail(path, where + " must hold " + std::to_string(rows * cols) +
                   " [re, im] pairs");
  Eigen::MatrixXcd m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      m(r, c) = complex_pair(path, j[idx],
                             where + "[" + std::to_string(idx) + "]");
      ++idx;
    }
  }
  return m;
}

json pair_list(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back({v(i).real(), v(i).imag()});
  return a;
}

json pair_list_col_major(const Eigen::MatrixXcd& m) {
  json a = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      a.push_back({m(r, c).real(), m(r, c).imag()});
  return a;
}

json parse_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(path, std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) fail(path, "top-level JSON value must be an object");
  return j;
}

void dump_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  flush_or_fail(out, path);
}

std::string crc_hex(std::uint32_t crc) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc);
  return buf;
}

}  // namespace

Tensor3 read_tensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(path, in, "CT3 1");
  std::string line;
  if (!next_line(in, line)) fail(path, "missing dimension line");
  long long dims[3];
  parse_ints(path, line, dims, 3);
  for (long long d : dims)
    if (d < 1) fail(path, "dimensions must be >= 1");
  long long count = dims[0] * dims[1] * dims[2];
  if (count > (1LL << 28)) fail(path, "tensor too large");
  std::vector<cx> data;
  data.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) data.push_back(read_entry(path, in));
  check_no_trailing(path, in);
  return Tensor3(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                 static_cast<int>(dims[2]), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
  auto out = open_out(path);
  out << "CT3 1\n" << t.dim0() << ' ' << t.dim1() << ' ' << t.dim2() << '\n';
  for (const cx& z : t.data())
    out << fmt(z.real()) << ' ' << fmt(z.imag()) << '\n';
  flush_or_fail(out, path);
}

Eigen::MatrixXcd read_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(path, in, "CMX 1");
  std::string line;
  if (!next_line(in, line)) fail(path, "missing dimension line");
  long long dims[2];
  parse_ints(path, line, dims, 2);
  if (dims[0] < 1 || dims[1] < 1) fail(path, "dimensions must be >= 1");
  if (dims[0] * dims[1] > (1LL << 26)) fail(path, "matrix too large");
  Eigen::MatrixXcd m(dims[0], dims[1]);
  for (long long c = 0; c < dims[1]; ++c)
    for (long long r = 0; r < dims[0]; ++r) m(r, c) = read_entry(path, in);
  check_no_trailing(path, in);
  return m;
}

void write_matrix(const std::filesystem::path& path,
                  const Eigen::MatrixXcd& m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw dimension_error("write_matrix: matrix must be non-empty");
  auto out = open_out(path);
  out << "CMX 1\n" << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      out << fmt(m(r, c).real()) << ' ' << fmt(m(r, c).imag()) << '\n';
  flush_or_fail(out, path);
}

CpModel read_model(const std::filesystem::path& path) {
  json j = parse_json(path);
  long long r = integer(path, field(path, j, "r"), "r");
  const json& dims = field(path, j, "dims");
  if (!dims.is_array() || dims.size() != 3)
    fail(path, "dims must be a [l, m, n] triple");
  long long l = integer(path, dims[0], "dims[0]");
  long long m = integer(path, dims[1], "dims[1]");
  long long n = integer(path, dims[2], "dims[2]");
  if (r < 1 || l < 1 || m < 1 || n < 1)
    fail(path, "r and dims must be >= 1");
  if (r > (1 << 20) || l > (1 << 20) || m > (1 << 20) || n > (1 << 20))
    fail(path, "model too large");
  Eigen::VectorXcd lambda =
      complex_vector(path, field(path, j, "lambda"), "lambda");
  if (lambda.size() != r) fail(path, "lambda must hold r entries");
  Eigen::MatrixXcd u = complex_matrix(path, field(path, j, "U"), l, r, "U");
  Eigen::MatrixXcd v = complex_matrix(path, field(path, j, "V"), m, r, "V");
  Eigen::MatrixXcd w = complex_matrix(path, field(path, j, "W"), n, r, "W");
  try {
    return CpModel(std::move(lambda), std::move(u), std::move(v),
                   std::move(w));
  } catch (const error& e) {
    fail(path, e.what());
  }
}

void write_model(const std::filesystem::path& path, const CpModel& m) {
  json j;
  j["r"] = m.rank();
  j["dims"] = {m.dim0(), m.dim1(), m.dim2()};
  j["lambda"] = pair_list(m.lambda());
  j["U"] = pair_list_col_major(m.u());
  j["V"] = pair_list_col_major(m.v());
  j["W"] = pair_list_col_major(m.w());
  dump_json(path, j);
}

ArrayScenario read_scenario(const std::filesystem::path& path) {
  json j = parse_json(path);
  ArrayScenario scn;

  const json& sensors = field(path, j, "sensors");
  if (!sensors.is_array() || sensors.empty())
    fail(path, "sensors must be a non-empty array of [x, y, z] triples");
  for (std::size_t i = 0; i < sensors.size(); ++i)
    scn.sensors.push_back(
        vec3(path, sensors[i], "sensors[" + std::to_string(i) + "]"));

  const json& translations = field(path, j, "translations");
  if (!translations.is_array() || translations.empty())
    fail(path, "translations must be a non-empty array of [x, y, z] triples");
  for (std::size_t i = 0; i < translations.size(); ++i)
    scn.translations.push_back(vec3(
        path, translations[i], "translations[" + std::to_string(i) + "]"));

  scn.omega = num(path, field(path, j, "omega"), "omega");
  scn.celerity = num(path, field(path, j, "celerity"), "celerity");

  long long snapshots =
      integer(path, field(path, j, "snapshots"), "snapshots");
  if (snapshots < 1 || snapshots > (1 << 20))
    fail(path, "snapshots must be in [1, 2^20]");
  scn.snapshots = static_cast<int>(snapshots);

  const json& sources = field(path, j, "sources");
  if (!sources.is_array() || sources.empty())
    fail(path, "sources must be a non-empty array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string where = "sources[" + std::to_string(i) + "]";
    const json& sj = sources[i];
    if (!sj.is_object()) fail(path, where + " must be an object");
    Source src;

    Eigen::Vector3d dir =
        vec3(path, field(path, sj, "direction"), where + ".direction");
    double norm = dir.norm();
    if (norm < 1e-300) fail(path, where + ".direction must be nonzero");
    src.direction = dir / norm;

    if (auto it = sj.find("range"); it != sj.end()) {
      if (it->is_string()) {
        if (it->get<std::string>() != "farfield")
          fail(path, where + ".range must be a number or \"farfield\"");
        src.range = kFarField;
      } else {
        src.range = num(path, *it, where + ".range");
      }
    }

    const json& ej = field(path, sj, "envelope");
    if (!ej.is_object()) fail(path, where + ".envelope must be an object");
    const json& kj = field(path, ej, "kind");
    if (!kj.is_string()) fail(path, where + ".envelope.kind must be a string");
    const std::string kind = kj.get<std::string>();
    if (kind == "gaussian") {
      src.envelope.kind = EnvelopeSpec::Kind::gaussian;
    } else if (kind == "sinusoid") {
      src.envelope.kind = EnvelopeSpec::Kind::sinusoid;
      src.envelope.freq =
          num(path, field(path, ej, "freq"), where + ".envelope.freq");
      if (auto it = ej.find("phase"); it != ej.end())
        src.envelope.phase = num(path, *it, where + ".envelope.phase");
      if (auto it = ej.find("amplitude"); it != ej.end())
        src.envelope.amplitude =
            num(path, *it, where + ".envelope.amplitude");
    } else if (kind == "explicit") {
      src.envelope.kind = EnvelopeSpec::Kind::explicit_values;
      Eigen::VectorXcd vals = complex_vector(
          path, field(path, ej, "values"), where + ".envelope.values");
      src.envelope.values.assign(vals.data(), vals.data() + vals.size());
    } else {
      fail(path, where + ".envelope.kind must be \"gaussian\", \"sinusoid\","
                         " or \"explicit\"");
    }
    scn.sources.push_back(std::move(src));
  }
  return scn;
}

void write_trace_csv(const std::filesystem::path& path,
                     const SolveTrace& trace) {
  auto out = open_out(path);
  out << "iter,residual,lambda_max,mu_u,mu_v,mu_w\n";
  for (const IterRecord& r : trace.iterations)
    out << r.iter << ',' << fmt(r.residual) << ',' << fmt(r.lambda_max) << ','
        << fmt(r.mu_u) << ',' << fmt(r.mu_v) << ',' << fmt(r.mu_w) << '\n';
  flush_or_fail(out, path);
}

void write_demo_csv(const std::filesystem::path& path,
                    const std::vector<DegeneracyRow>& rows) {
  auto out = open_out(path);
  out << "n,dist_to_limit,lambda_max_explicit,mu_u,mu_v,mu_w\n";
  for (const DegeneracyRow& r : rows)
    out << r.n << ',' << fmt(r.dist_to_limit) << ','
        << fmt(r.lambda_max_explicit) << ',' << fmt(r.mu_u) << ','
        << fmt(r.mu_v) << ',' << fmt(r.mu_w) << '\n';
  flush_or_fail(out, path);
}

void write_report_json(const std::filesystem::path& path,
                       const RecoveryResult& result) {
  json j;
  j["permutation"] = result.permutation;
  json sources = json::array();
  for (const SourceRecovery& s : result.sources) {
    json sj;
    if (s.direction) {
      sj["direction"] = {(*s.direction)(0), (*s.direction)(1),
                         (*s.direction)(2)};
    } else {
      sj["direction"] = nullptr;
    }
    if (s.direction_error_deg)
      sj["direction_error_deg"] = *s.direction_error_deg;
    else
      sj["direction_error_deg"] = nullptr;
    if (s.rho)
      sj["rho"] = *s.rho;
    else
      sj["rho"] = nullptr;
    json flags = json::array();
    for (RecoveryFlag f : s.flags) flags.push_back(to_string(f));
    sj["flags"] = flags;
    sj["waveform"] = pair_list(s.waveform);
    sources.push_back(std::move(sj));
  }
  j["sources"] = std::move(sources);
  dump_json(path, j);
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  json opts = json::object();
  for (const auto& [key, value] : m.options) opts[key] = value;
  j["options"] = std::move(opts);
  if (m.has_seed) j["seed"] = m.seed;
  auto artifact_list = [](const std::vector<ManifestArtifact>& items) {
    json a = json::array();
    for (const ManifestArtifact& it : items)
      a.push_back({{"path", it.path}, {"crc32", crc_hex(it.crc32)}});
    return a;
  };
  j["inputs"] = artifact_list(m.inputs);
  j["outputs"] = artifact_list(m.outputs);
  j["wall_time_s"] = m.wall_time_s;
  dump_json(path, j);
}

std::uint32_t crc32_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for checksum");
  uLong crc = crc32(0L, Z_NULL, 0);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                static_cast<uInt>(in.gcount()));
    if (in.eof()) break;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace cohten
