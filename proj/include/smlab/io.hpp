#pragma once

// Field snapshots and run manifests.
//
// Container layout: "SMLF" magic, little-endian uint32 header length, JSON
// header, then the raw little-endian complex128 payload (re, im pairs) in
// the field's native order. Sphere fields store three float64 per point.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smlab/field.hpp"

namespace smlab {

static_assert(std::endian::native == std::endian::little, "payload is written in native order");

inline constexpr char field_magic[4] = {'S', 'M', 'L', 'F'};

struct FieldFile {
  std::string kind;  // "spatial", "spacetime", "sphere"
  GridSpec grid;
  Domain domain = Domain::physical;
  std::vector<cplx> data;
  std::vector<std::array<double, 3>> sphere;
  nlohmann::json meta = nlohmann::json::object();
};

namespace detail {

inline void write_blob(const std::filesystem::path& path, const nlohmann::json& header, const void* payload,
                       std::size_t bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string() + " for writing");
  const std::string h = header.dump();
  const auto len = static_cast<std::uint32_t>(h.size());
  os.write(field_magic, 4);
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  os.write(static_cast<const char*>(payload), static_cast<std::streamsize>(bytes));
  require(static_cast<bool>(os), ErrorCode::io, "write failed: " + path.string());
}

inline nlohmann::json header_for(const std::string& kind, const GridSpec& g, const std::string& domain,
                                 const std::string& dtype, std::size_t count, const nlohmann::json& meta) {
  return {{"format", "smlab-field"}, {"version", 1},  {"kind", kind},     {"grid", g},
          {"domain", domain},        {"dtype", dtype}, {"count", count}, {"endianness", "little"},
          {"meta", meta}};
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const SpatialField& f, const nlohmann::json& meta = {}) {
  detail::write_blob(path,
                     detail::header_for("spatial", f.grid, to_string(f.domain), "complex128", f.data.size(),
                                        meta.is_null() ? nlohmann::json::object() : meta),
                     f.data.data(), f.data.size() * sizeof(cplx));
}

inline void write_field(const std::filesystem::path& path, const SpaceTimeField& f, const nlohmann::json& meta = {}) {
  detail::write_blob(path,
                     detail::header_for("spacetime", f.grid, to_string(f.domain), "complex128", f.data.size(),
                                        meta.is_null() ? nlohmann::json::object() : meta),
                     f.data.data(), f.data.size() * sizeof(cplx));
}

inline void write_field(const std::filesystem::path& path, const SphereField& f, const nlohmann::json& meta = {}) {
  detail::write_blob(path,
                     detail::header_for("sphere", f.grid, "physical", "float64x3", f.data.size(),
                                        meta.is_null() ? nlohmann::json::object() : meta),
                     f.data.data(), f.data.size() * sizeof(std::array<double, 3>));
}

inline FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  char magic[4];
  std::uint32_t len = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  require(is && std::memcmp(magic, field_magic, 4) == 0, ErrorCode::io, path.string() + ": not a field container");
  std::string h(len, '\0');
  is.read(h.data(), len);
  require(static_cast<bool>(is), ErrorCode::io, path.string() + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(h);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, path.string() + ": bad header: " + e.what());
  }
  FieldFile f;
  try {
    require(header.at("endianness") == "little", ErrorCode::io, path.string() + ": unsupported endianness");
    f.kind = header.at("kind").get<std::string>();
    f.grid = header.at("grid").get<GridSpec>();
    f.domain = domain_from_string(header.at("domain").get<std::string>());
    f.meta = header.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, path.string() + ": bad header: " + e.what());
  }
  f.grid.validate();
  const std::size_t count = header.at("count").get<std::size_t>();
  std::size_t expect = 0;
  if (f.kind == "spatial" || f.kind == "sphere")
    expect = f.grid.spatial_size();
  else if (f.kind == "spacetime")
    expect = f.grid.size();
  else
    throw Error(ErrorCode::io, path.string() + ": unknown kind '" + f.kind + "'");
  require(count == expect, ErrorCode::io, path.string() + ": sample count does not match grid");
  if (f.kind == "sphere") {
    f.sphere.resize(count);
    is.read(reinterpret_cast<char*>(f.sphere.data()), static_cast<std::streamsize>(count * sizeof(std::array<double, 3>)));
  } else {
    f.data.resize(count);
    is.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(count * sizeof(cplx)));
  }
  require(static_cast<bool>(is), ErrorCode::io, path.string() + ": truncated payload");
  return f;
}

inline SpatialField as_spatial(const FieldFile& f) {
  require(f.kind == "spatial", ErrorCode::io, "expected a spatial field, got " + f.kind);
  return SpatialField{f.grid, f.domain, f.data};
}

inline SpaceTimeField as_spacetime(const FieldFile& f) {
  require(f.kind == "spacetime", ErrorCode::io, "expected a space-time field, got " + f.kind);
  return SpaceTimeField{f.grid, f.domain, f.data};
}

inline SphereField as_sphere(const FieldFile& f) {
  require(f.kind == "sphere", ErrorCode::io, "expected a sphere field, got " + f.kind);
  return SphereField{f.grid, f.sphere};
}

// ---- text outputs ------------------------------------------------------------------

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string() + " for writing");
  os << text;
  require(static_cast<bool>(os), ErrorCode::io, "write failed: " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, path.string() + ": " + e.what());
  }
}

// ---- manifests ---------------------------------------------------------------------------

inline constexpr const char* code_version = "smlab 1.0.0";

struct RunManifest {
  std::string command;
  nlohmann::json config;
  GridSpec grid;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;  // relative to the run directory
  double wall_seconds = 0.0;
  std::string started_at;  // ISO 8601, UTC
  int exit_code = 0;
};

inline nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},    {"config", m.config},         {"code_version", code_version},
          {"grid", m.grid},          {"seed", m.seed},             {"outputs", m.outputs},
          {"wall_seconds", m.wall_seconds}, {"started_at", m.started_at}, {"exit_code", m.exit_code}};
}

// Structural check of a manifest and of the files it references.
inline std::vector<std::string> validate_manifest(const nlohmann::json& j, const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  for (const char* key : {"command", "config", "code_version", "grid", "seed", "outputs", "wall_seconds", "started_at",
                          "exit_code"})
    if (!j.contains(key)) problems.push_back(std::string("missing key '") + key + "'");
  if (j.contains("outputs") && j["outputs"].is_array()) {
    std::set<std::string> seen;
    for (const auto& o : j["outputs"]) {
      const std::string s = o.get<std::string>();
      if (!seen.insert(s).second) problems.push_back("output listed twice: " + s);
      if (!std::filesystem::exists(dir / s)) problems.push_back("missing output: " + s);
    }
  }
  return problems;
}

// manifest.json for the run plus one line appended to manifests.jsonl in the
// output root; earlier lines are never rewritten
inline void write_manifest(const std::filesystem::path& run_dir, const RunManifest& m) {
  const nlohmann::json j = to_json(m);
  write_json(run_dir / "manifest.json", j);
  const auto log = run_dir / "manifests.jsonl";
  std::ofstream os(log, std::ios::app | std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot append to " + log.string());
  os << j.dump() << "\n";
}

}  // namespace smlab
