#include "fbms/export.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "fbms/error.hpp"

namespace fbms::io {
namespace {

constexpr double kPi = std::numbers::pi;

void require_nonempty(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "nothing to write: empty sample set");
}

std::string join_row(std::initializer_list<double> values) {
  std::string line;
  bool first = true;
  for (double v : values) {
    if (!first) line += ',';
    line += format_double(v);
    first = false;
  }
  line += '\n';
  return line;
}

void dump(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      // nlohmann::json objects are std::map-backed, so iteration is sorted
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        dump(v, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        dump(v, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "cannot serialise a non-finite value");
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(len)};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV

void write_profile_csv(std::span<const equivariant::CurveNode> nodes, const fs::path& path) {
  require_nonempty(nodes.size());
  std::string text = "t,x,y,r,phi,theta\n";
  for (const auto& c : nodes) text += join_row({c.t, c.x, c.y, c.r, c.phi, c.theta});
  write_text(path, text);
}

void write_profile_csv(std::span<const catenoid::ProfileSample> samples, const fs::path& path) {
  require_nonempty(samples.size());
  std::string text = "z,r,rdot\n";
  for (const auto& s : samples) text += join_row({s.z, s.r, s.rdot});
  write_text(path, text);
}

void write_csv(const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows, const fs::path& path) {
  require_nonempty(rows.size());
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
  text += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw Error(ErrorKind::InvalidArgument, "row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      if (std::isfinite(row[i])) text += format_double(row[i]);
    }
    text += '\n';
  }
  write_text(path, text);
}

CsvTable read_csv(const fs::path& path) {
  const std::string text = read_text(path);
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::IoError, "empty csv: " + path.string());
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (;;) {
      if (p == end || *p == ',') {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        if (p == end) break;
        ++p;
        continue;
      }
      double v = 0.0;
      auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw Error(ErrorKind::IoError, "bad number in " + path.string());
      row.push_back(v);
      if (q == end) break;
      if (*q != ',') throw Error(ErrorKind::IoError, "bad separator in " + path.string());
      p = q + 1;
    }
    if (row.size() != t.header.size()) {
      throw Error(ErrorKind::IoError, "ragged row in " + path.string());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// OBJ

Mesh revolve(std::span<const catenoid::ProfileSample> profile, int segments, int n) {
  if (n != 2) {
    throw Error(ErrorKind::DimensionUnsupported,
                "surface of revolution lives in R^" + std::to_string(n + 1) + ", not R^3");
  }
  if (segments < 8) throw Error(ErrorKind::InvalidArgument, "segments must be at least 8");
  if (profile.size() < 2) throw Error(ErrorKind::InvalidArgument, "profile needs at least 2 samples");
  Mesh m;
  const auto S = static_cast<std::size_t>(segments);
  m.vertices.reserve(profile.size() * S);
  for (const auto& p : profile) {
    for (std::size_t j = 0; j < S; ++j) {
      const double b = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(S);
      m.vertices.push_back({p.r * std::cos(b), p.r * std::sin(b), p.z});
    }
  }
  for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      const std::size_t v00 = i * S + j, v01 = i * S + (j + 1) % S;
      const std::size_t v10 = v00 + S, v11 = v01 + S;
      m.faces.push_back({v00, v01, v11});
      m.faces.push_back({v00, v11, v10});
    }
  }
  return m;
}

void write_obj(const Mesh& mesh, const fs::path& path) {
  std::string text;
  text.reserve(mesh.vertices.size() * 64 + mesh.faces.size() * 24);
  for (const auto& v : mesh.vertices) {
    text += "v " + format_double(v[0]) + ' ' + format_double(v[1]) + ' ' + format_double(v[2]) + '\n';
  }
  for (const auto& f : mesh.faces) {
    text += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
            std::to_string(f[2] + 1) + '\n';
  }
  write_text(path, text);
}

Mesh read_obj(const fs::path& path) {
  std::istringstream in(read_text(path));
  Mesh m;
  std::string tag;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::array<double, 3> v{};
      ls >> v[0] >> v[1] >> v[2];
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<std::size_t, 3> f{};
      ls >> f[0] >> f[1] >> f[2];
      for (auto& i : f) {
        if (i == 0 || i > m.vertices.size()) throw Error(ErrorKind::IoError, "bad face index");
        --i;
      }
      m.faces.push_back(f);
    }
    if (!ls && !ls.eof()) throw Error(ErrorKind::IoError, "malformed OBJ line: " + line);
  }
  return m;
}

Mesh revolve_to_obj(std::span<const catenoid::ProfileSample> profile, int segments,
                    const fs::path& path, int n) {
  Mesh m = revolve(profile, segments, n);
  write_obj(m, path);
  return m;
}

MeshCheck check_mesh(const Mesh& mesh) {
  MeshCheck c;
  // directed edge -> count
  std::map<std::pair<std::size_t, std::size_t>, int> directed;
  for (const auto& f : mesh.faces) {
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) c.manifold = false;
    for (int k = 0; k < 3; ++k) ++directed[{f[k], f[(k + 1) % 3]}];
  }
  std::size_t undirected = 0;
  for (const auto& [e, count] : directed) {
    if (count > 1) c.oriented = false;
    const auto rev = directed.find({e.second, e.first});
    const int back = rev == directed.end() ? 0 : rev->second;
    if (count + back > 2) c.manifold = false;
    if (back == 0) {
      ++c.boundary_edges;
      ++undirected;
    } else if (e.first < e.second) {
      ++undirected;
    }
  }
  c.euler_characteristic = static_cast<long>(mesh.vertices.size()) - static_cast<long>(undirected) +
                           static_cast<long>(mesh.faces.size());
  for (const auto& v : mesh.vertices) {
    c.max_vertex_norm = std::max(c.max_vertex_norm, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON

std::string canonical_json(const Json& j) {
  std::string out;
  dump(j, out);
  return out;
}

InvariantCheck InvariantCheck::make(std::string name, double measured, std::string relation,
                                    double tolerance) {
  InvariantCheck c{std::move(name), measured, tolerance, std::move(relation), false};
  if (c.relation == "<") {
    c.passed = measured < tolerance;
  } else if (c.relation == "<=") {
    c.passed = measured <= tolerance;
  } else if (c.relation == ">") {
    c.passed = measured > tolerance;
  } else if (c.relation == ">=") {
    c.passed = measured >= tolerance;
  } else if (c.relation == "==") {
    c.passed = measured == tolerance;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown relation '" + c.relation + "'");
  }
  return c;
}

bool ReportDocument::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

Json ReportDocument::to_json() const {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = kind;
  j["parameters"] = parameters;
  j["results"] = results;
  Json arr = Json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"measured", c.measured},
                   {"tolerance", c.tolerance},
                   {"relation", c.relation},
                   {"passed", c.passed}});
  }
  j["checks"] = std::move(arr);
  j["passed"] = all_passed();
  return j;
}

ReportDocument ReportDocument::from_json(const Json& j) {
  try {
    if (j.at("schema").get<int>() != kSchemaVersion) {
      throw Error(ErrorKind::InvalidArgument, "unsupported report schema");
    }
    ReportDocument d;
    d.kind = j.at("kind").get<std::string>();
    d.parameters = j.at("parameters");
    d.results = j.at("results");
    for (const auto& c : j.at("checks")) {
      d.checks.push_back({c.at("name").get<std::string>(), c.at("measured").get<double>(),
                          c.at("tolerance").get<double>(), c.at("relation").get<std::string>(),
                          c.at("passed").get<bool>()});
    }
    return d;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed report: ") + e.what());
  }
}

void write_report(const ReportDocument& doc, const fs::path& path) {
  write_text(path, canonical_json(doc.to_json()) + '\n');
}

ReportDocument read_report(const fs::path& path) {
  try {
    return ReportDocument::from_json(Json::parse(read_text(path)));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::IoError, std::string("cannot parse report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifest

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  const std::string text = read_text(path);
  return sha256_hex({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

RunManifest RunManifest::build(std::string tool_version, Json configuration, const fs::path& dir,
                               const std::vector<std::string>& files, double duration_seconds) {
  RunManifest m;
  m.tool_version = std::move(tool_version);
  m.configuration = std::move(configuration);
  const std::string canon = canonical_json(m.configuration);
  m.input_hash = sha256_hex({reinterpret_cast<const unsigned char*>(canon.data()), canon.size()});
  for (const auto& f : files) {
    const auto p = dir / f;
    m.outputs.push_back({f, sha256_file(p), fs::file_size(p)});
  }
  m.duration_seconds = duration_seconds;
  return m;
}

Json RunManifest::to_json() const {
  Json outs = Json::array();
  for (const auto& e : outputs) outs.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  return {{"schema", kSchemaVersion},
          {"tool_version", tool_version},
          {"configuration", configuration},
          {"input_hash", input_hash},
          {"outputs", std::move(outs)},
          {"duration_seconds", duration_seconds}};
}

bool RunManifest::verify(const fs::path& dir) const {
  for (const auto& e : outputs) {
    const auto p = dir / e.path;
    if (!fs::exists(p) || sha256_file(p) != e.sha256) return false;
  }
  return true;
}

void write_manifest(const RunManifest& manifest, const fs::path& path) {
  write_text(path, canonical_json(manifest.to_json()) + '\n');
}

}  // namespace fbms::io
