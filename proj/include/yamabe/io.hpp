#pragma once
// CSV and JSON serialization: profiles and field slices as CSV columns,
// reports and run manifests as JSON.  Everything written here is
// deterministic — no timestamps, no machine identifiers — so a manifest
// plus the same build reproduces a run bit for bit.

#include <json.hpp>

#include <string>

#include "yamabe/barriers.hpp"
#include "yamabe/evolution.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/profiles.hpp"

namespace yamabe::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "yamabe-ancients";
inline constexpr const char* kToolVersion = "1.0.0";

json tool_info();

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

// Traveling wave: CSV `y,psi,v` sampled on the profile grid, plus the JSON
// sidecar {lambda, p, n, gamma, C, ygrid:{min,max,dy}, closed_form}.
void write_wave_csv(const std::string& path, const WaveProfile& w);
json wave_sidecar(const WaveProfile& w);

// Certification report round trip.
json to_json(const CertificationReport& r);
CertificationReport certification_from_json(const json& j);

// One field slice as CSV `x,u,phi`.
void write_snapshot_csv(const std::string& path, const Eigen::ArrayXd& x,
                        const Eigen::ArrayXd& phi, const ModelParams& mp);

struct SnapshotData {
  Eigen::ArrayXd x, u, phi;
};
SnapshotData read_snapshot_csv(const std::string& path);

// Evolution run directory: manifest.json plus snapshot_NNN.csv per stored
// time.  `invocation` is echoed verbatim into the manifest.  Returns the
// manifest.  read_run rebuilds the field (grid, snapshots, diagnostics)
// from such a directory.
json write_run(const std::string& dir, const SpaceTimeField& f,
               const json& invocation);
SpaceTimeField read_run(const std::string& dir);

// Curvature slice as CSV `x,Rtilde,Krad,Ktan`.
void write_curvature_csv(const std::string& path, const CurvatureSlice& s);

// Curvature report for a stored run: per-snapshot sup norms and the type-I
// verdict.  When `dir` is nonempty, per-snapshot profile CSVs are written
// there and referenced from the report.
json curvature_report(const SpaceTimeField& f, double phi_floor,
                      const std::string& dir = "");

}  // namespace yamabe::io
