#pragma once

/// CSV profile tables, OBJ meshes of surfaces of revolution, canonical JSON
/// reports and run manifests. Every floating-point value is written with 17
/// significant digits so files round-trip exactly.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fbms/catenoid.hpp"
#include "fbms/equivariant.hpp"
#include "json.hpp"

namespace fbms::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// printf("%.17g"); non-finite values are rejected.
[[nodiscard]] std::string format_double(double v);

/// Header `t,x,y,r,phi,theta`.
void write_profile_csv(std::span<const equivariant::CurveNode> nodes, const fs::path& path);
/// Header `z,r,rdot`.
void write_profile_csv(std::span<const catenoid::ProfileSample> samples, const fs::path& path);

/// Generic table; non-finite cells are written empty.
void write_csv(const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows, const fs::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Empty cells read back as NaN.
[[nodiscard]] CsvTable read_csv(const fs::path& path);

struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<std::size_t, 3>> faces;  // 0-based
};

/// Revolves (z, r) about the z-axis. Rings share no seam vertex; winding is
/// outward when z increases along the samples. `n` is the surface dimension:
/// only n = 2 embeds in R^3 (DimensionUnsupported otherwise).
[[nodiscard]] Mesh revolve(std::span<const catenoid::ProfileSample> profile, int segments,
                           int n = 2);
void write_obj(const Mesh& mesh, const fs::path& path);
[[nodiscard]] Mesh read_obj(const fs::path& path);
Mesh revolve_to_obj(std::span<const catenoid::ProfileSample> profile, int segments,
                    const fs::path& path, int n = 2);

struct MeshCheck {
  long euler_characteristic = 0;
  std::size_t boundary_edges = 0;
  bool manifold = true;   // no edge in more than two faces, no degenerate face
  bool oriented = true;   // interior edges traversed in opposite directions
  double max_vertex_norm = 0.0;
};

[[nodiscard]] MeshCheck check_mesh(const Mesh& mesh);

/// Sorted keys, no whitespace, numbers via format_double.
[[nodiscard]] std::string canonical_json(const Json& j);

struct InvariantCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string relation = "<";  // measured <relation> tolerance
  bool passed = false;

  /// Evaluates `passed` from the relation.
  [[nodiscard]] static InvariantCheck make(std::string name, double measured,
                                           std::string relation, double tolerance);
};

struct ReportDocument {
  std::string kind;  // classification | family | annulus | catenoid | balancing | verification
  Json parameters = Json::object();
  Json results = Json::object();
  std::vector<InvariantCheck> checks;

  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] Json to_json() const;
  /// Throws InvalidArgument on a malformed document or wrong schema.
  [[nodiscard]] static ReportDocument from_json(const Json& j);
};

inline constexpr int kSchemaVersion = 1;

void write_report(const ReportDocument& doc, const fs::path& path);
[[nodiscard]] ReportDocument read_report(const fs::path& path);

[[nodiscard]] std::string sha256_hex(std::span<const unsigned char> bytes);
[[nodiscard]] std::string sha256_file(const fs::path& path);

struct ManifestEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool_version;
  Json configuration = Json::object();
  std::string input_hash;  // SHA-256 of the canonical configuration
  std::vector<ManifestEntry> outputs;
  double duration_seconds = 0.0;

  /// Hashes the listed files (relative to `dir`) and the configuration.
  [[nodiscard]] static RunManifest build(std::string tool_version, Json configuration,
                                         const fs::path& dir,
                                         const std::vector<std::string>& files,
                                         double duration_seconds);
  [[nodiscard]] Json to_json() const;
  /// True when every listed file exists under `dir` with the recorded checksum.
  [[nodiscard]] bool verify(const fs::path& dir) const;
};

void write_manifest(const RunManifest& manifest, const fs::path& path);

/// Writes `text` to `path` (binary, so LF stays LF); throws IoError.
void write_text(const fs::path& path, const std::string& text);
[[nodiscard]] std::string read_text(const fs::path& path);

}  // namespace fbms::io
