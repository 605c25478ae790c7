#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "osmoflow/evolution.hpp"

namespace osmoflow {

inline constexpr int kSnapshotSchemaVersion = 1;

// Diagnostics CSV: fixed column order, 17 significant digits, LF endings.
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& rec);

class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(const std::string& path);
  void write(const DiagnosticsRecord& rec);

 private:
  std::ofstream out_;
};

// Snapshots are JSON with every floating-point value encoded as a C hexfloat
// string, so write -> read -> write is byte identical and restarts resume
// from the exact binary state.
struct Snapshot {
  SimState state;
  DiagnosticsRecord record;
  std::string derivative_scheme = "fd4";
  std::string config_text;
};

void write_snapshot(const Snapshot& snap, const std::string& path);
Snapshot read_snapshot(const std::string& path);  // SchemaError on version/shape mismatch

// One boundary outline with a banded fill of the concentration; the byte
// stream depends only on the state.
void write_svg_frame(const SimState& state, const std::string& path);

struct RunManifest {
  bool completed = false;
  std::string error;
  double final_time = 0.0;
  int n_records = 0;
  std::vector<std::string> snapshots;  // file names, in order of emission
};

void write_manifest(const RunManifest& man, const std::string& path);

std::string hexfloat(double x);
double from_hexfloat(const std::string& s);

}  // namespace osmoflow
