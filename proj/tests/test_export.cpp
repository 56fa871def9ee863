#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "fbms/error.hpp"
#include "fbms/export.hpp"

using namespace fbms;
using namespace fbms::io;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no fbms::Error thrown");
  return ErrorKind::InvalidArgument;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("fbms_export_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

double tau_oracle() {
  double a = 1.0, b = 2.0;
  while (b - a > 1e-15) {
    const double m = 0.5 * (a + b);
    ((1.0 / std::tanh(m) - m) > 0.0 ? a : b) = m;
  }
  const double s = 0.5 * (a + b);
  return s * std::cosh(s);
}

std::vector<catenoid::ProfileSample> critical_profile(int samples) {
  const auto cc = catenoid::critical_catenoid();
  const double h = cc.boundary_height();
  std::vector<catenoid::ProfileSample> out;
  for (int i = 0; i < samples; ++i) {
    const double z = -h + 2.0 * h * i / (samples - 1);
    out.push_back({z, cc.radius(z), cc.slope(z)});
  }
  out[static_cast<std::size_t>(samples / 2)].z = 0.0;
  return out;
}

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(kind_of([] { (void)format_double(NAN); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("cone-line CSV") {
  TempDir dir;
  const auto p = equivariant::OrbitParams::make(2, 5);
  const double a = p.alpha();
  const auto traj = equivariant::integrate_angular(p, equivariant::AngularState::from(1.0, a, a), 5.0);
  std::vector<equivariant::CurveNode> nodes;
  for (std::size_t i = 0; i < traj.size(); ++i) nodes.push_back(traj.curve_node(i));
  REQUIRE(nodes.size() > 2);
  const auto path = dir.path / "cone.csv";
  write_profile_csv(nodes, path);
  const auto t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"t", "x", "y", "r", "phi", "theta"});
  REQUIRE(t.rows.size() == nodes.size());
  for (const auto& row : t.rows) CHECK(std::abs(row[2] - std::sqrt(4.0) * row[1]) < 1e-12);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    CHECK(t.rows[i][0] == nodes[i].t);
    CHECK(t.rows[i][3] == nodes[i].r);
    CHECK(t.rows[i][5] == nodes[i].theta);
  }
  const auto text = read_text(path);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');
}

TEST_CASE("catenoid CSV") {
  TempDir dir;
  const auto prof = critical_profile(201);
  const auto path = dir.path / "cc.csv";
  write_profile_csv(prof, path);
  const auto t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"z", "r", "rdot"});
  bool found = false;
  for (const auto& row : t.rows) {
    if (row[0] == 0.0) {
      found = true;
      CHECK(std::abs(row[1] - 1.0 / tau_oracle()) < 1e-14);
      CHECK(std::abs(row[1] - 0.46049) < 1e-5);
    }
  }
  CHECK(found);
  for (std::size_t i = 0; i < prof.size(); ++i) {
    CHECK(t.rows[i][0] == prof[i].z);
    CHECK(t.rows[i][1] == prof[i].r);
    CHECK(t.rows[i][2] == prof[i].rdot);
  }
}

TEST_CASE("empty input writes nothing") {
  TempDir dir;
  const auto path = dir.path / "empty.csv";
  CHECK(kind_of([&] { write_profile_csv(std::span<const equivariant::CurveNode>{}, path); }) ==
        ErrorKind::InvalidArgument);
  CHECK_FALSE(fs::exists(path));
  const auto prof = critical_profile(5);
  CHECK(kind_of([&] { write_profile_csv(prof, dir.path / "missing" / "x.csv"); }) ==
        ErrorKind::IoError);
}

TEST_CASE("cylinder mesh") {
  std::vector<catenoid::ProfileSample> cyl{{0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}};
  const auto m = revolve(cyl, 64);
  CHECK(m.vertices.size() == 128);
  CHECK(m.faces.size() == 128);
  const auto c = check_mesh(m);
  CHECK(c.euler_characteristic == 0);
  CHECK(c.boundary_edges == 128);
  CHECK(c.manifold);
  CHECK(c.oriented);

  // face normal points away from the axis
  const auto& f = m.faces[0];
  const auto& A = m.vertices[f[0]];
  const auto& B = m.vertices[f[1]];
  const auto& C = m.vertices[f[2]];
  const double ux = B[0] - A[0], uy = B[1] - A[1], uz = B[2] - A[2];
  const double vx = C[0] - A[0], vy = C[1] - A[1], vz = C[2] - A[2];
  const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz;
  CHECK(nx * (A[0] + B[0] + C[0]) + ny * (A[1] + B[1] + C[1]) > 0.0);
}

TEST_CASE("critical catenoid mesh") {
  TempDir dir;
  const auto prof = critical_profile(65);
  const auto path = dir.path / "cc.obj";
  const auto m = revolve_to_obj(prof, 128, path);
  const auto c = check_mesh(m);
  CHECK(c.max_vertex_norm <= 1.0 + 1e-6);
  CHECK(c.manifold);
  CHECK(c.oriented);
  CHECK(c.euler_characteristic == 0);

  const auto back = read_obj(path);
  REQUIRE(back.vertices.size() == m.vertices.size());
  CHECK(back.faces == m.faces);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK(back.vertices[i] == m.vertices[i]);
  const auto text = read_text(path);
  CHECK(text.rfind("v ", 0) == 0);
  CHECK(text.find("\nf 1 2 130\n") != std::string::npos);
}

TEST_CASE("mesh validation") {
  const auto prof = critical_profile(9);
  CHECK(kind_of([&] { (void)revolve(prof, 4); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { (void)revolve(prof, 7); }) == ErrorKind::InvalidArgument);
  CHECK_NOTHROW((void)revolve(prof, 8));
  CHECK(kind_of([&] { (void)revolve(prof, 16, 3); }) == ErrorKind::DimensionUnsupported);

  // a flipped face breaks orientation, a fin breaks manifoldness
  auto m = revolve(prof, 8);
  auto flipped = m;
  std::swap(flipped.faces[3][1], flipped.faces[3][2]);
  CHECK_FALSE(check_mesh(flipped).oriented);
  auto fin = m;
  fin.vertices.push_back({5.0, 5.0, 5.0});
  fin.faces.push_back({m.faces[0][0], m.faces[0][2], fin.vertices.size() - 1});
  CHECK_FALSE(check_mesh(fin).manifold);
}

TEST_CASE("canonical json") {
  Json j = {{"b", 1.5}, {"a", {{"z", 0.1}, {"y", "s"}}}, {"c", Json::array({1, 2.0, true})}};
  CHECK(canonical_json(j) == R"({"a":{"y":"s","z":0.10000000000000001},"b":1.5,"c":[1,2,true]})");
  CHECK(canonical_json(Json(INFINITY)) == "null");
}

TEST_CASE("classification report") {
  TempDir dir;
  const auto p = equivariant::OrbitParams::make(2, 2);
  const auto s = equivariant::singular_points(p);
  ReportDocument d;
  d.kind = "classification";
  d.parameters = {{"m", 2}, {"n", 2}};
  d.results = {{"classification", "focal"},
               {"eigenvalues", Json::array({{{"re", s.eigenvalues[0].real()}, {"im", s.eigenvalues[0].imag()}},
                                            {{"re", s.eigenvalues[1].real()}, {"im", s.eigenvalues[1].imag()}}})}};
  d.checks.push_back(InvariantCheck::make("field_residual", s.max_field_residual, "<", 1e-12));
  const auto path = dir.path / "report.json";
  write_report(d, path);
  const auto text = read_text(path);
  CHECK(text.find(R"("classification":"focal")") != std::string::npos);
  CHECK(text.find(R"("schema":1)") != std::string::npos);
  CHECK(text.find(' ') == std::string::npos);

  const auto back = read_report(path);
  CHECK(back.kind == d.kind);
  CHECK(back.parameters == d.parameters);
  CHECK(back.results == d.results);
  REQUIRE(back.checks.size() == 1);
  CHECK(back.checks[0].measured == d.checks[0].measured);
  CHECK(back.checks[0].passed);
  CHECK(canonical_json(back.to_json()) == canonical_json(d.to_json()));
}

TEST_CASE("annulus report holds eps_bar") {
  TempDir dir;
  const auto sol = equivariant::solve_annulus(equivariant::OrbitParams::make(4, 4));
  ReportDocument d;
  d.kind = "annulus";
  d.results = {{"eps_bar", sol.eps_bar}, {"gap", sol.gap}};
  const auto path = dir.path / "a.json";
  write_report(d, path);
  const auto back = read_report(path);
  const double e = back.results.at("eps_bar").get<double>();
  CHECK(e == sol.eps_bar);
  CHECK(std::abs(e - std::numbers::pi / 2) < 1e-8);
}

TEST_CASE("invariant checks and malformed reports") {
  CHECK(InvariantCheck::make("a", 1.0, "<", 2.0).passed);
  CHECK_FALSE(InvariantCheck::make("a", 2.0, "<", 2.0).passed);
  CHECK(InvariantCheck::make("a", 2.0, "<=", 2.0).passed);
  CHECK(InvariantCheck::make("a", 3.0, ">", 2.0).passed);
  CHECK(InvariantCheck::make("a", 2.0, ">=", 2.0).passed);
  CHECK(InvariantCheck::make("a", 1.0, "==", 1.0).passed);
  CHECK(kind_of([] { (void)InvariantCheck::make("a", 1.0, "~", 1.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)ReportDocument::from_json(Json{{"schema", 2}}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)ReportDocument::from_json(Json{{"schema", 1}}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("byte determinism and manifest") {
  TempDir dir;
  const auto prof = critical_profile(33);
  for (const char* sub : {"a", "b"}) {
    fs::create_directories(dir.path / sub);
    write_profile_csv(prof, dir.path / sub / "p.csv");
    (void)revolve_to_obj(prof, 16, dir.path / sub / "p.obj");
    ReportDocument d;
    d.kind = "catenoid";
    d.results = {{"tau", catenoid::critical_catenoid().tau}};
    write_report(d, dir.path / sub / "report.json");
  }
  for (const char* f : {"p.csv", "p.obj", "report.json"}) {
    CHECK(read_text(dir.path / "a" / f) == read_text(dir.path / "b" / f));
  }

  const auto m = RunManifest::build("1.0", {{"n", 2}}, dir.path / "a", {"p.csv", "p.obj", "report.json"}, 0.5);
  CHECK(m.outputs.size() == 3);
  CHECK(m.outputs[0].bytes == fs::file_size(dir.path / "a" / "p.csv"));
  CHECK(m.verify(dir.path / "a"));
  CHECK(m.verify(dir.path / "b"));
  write_text(dir.path / "b" / "p.csv", "tampered\n");
  CHECK_FALSE(m.verify(dir.path / "b"));
  write_manifest(m, dir.path / "a" / "manifest.json");
  const auto j = Json::parse(read_text(dir.path / "a" / "manifest.json"));
  CHECK(j.at("outputs").size() == 3);
  CHECK(j.at("input_hash").get<std::string>().size() == 64);
}

TEST_CASE("sha256 known answers") {
  const std::string abc = "abc";
  CHECK(sha256_hex({reinterpret_cast<const unsigned char*>(abc.data()), abc.size()}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("generic CSV with empty cells") {
  TempDir dir;
  const auto path = dir.path / "g.csv";
  write_csv({"a", "b", "c"}, {{1.0, NAN, 3.0}, {NAN, 0.5, NAN}}, path);
  CHECK(read_text(path) == "a,b,c\n1,,3\n,0.5,\n");
  const auto t = read_csv(path);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == 1.0);
  CHECK(std::isnan(t.rows[0][1]));
  CHECK(std::isnan(t.rows[1][2]));
  CHECK(kind_of([&] { write_csv({"a"}, {{1.0, 2.0}}, path); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { write_csv({"a"}, {}, dir.path / "none.csv"); }) == ErrorKind::InvalidArgument);
  CHECK_FALSE(fs::exists(dir.path / "none.csv"));
}
