#include "osmoflow/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "json.hpp"
#include "osmoflow/errors.hpp"

namespace osmoflow {

namespace {

using json = nlohmann::ordered_json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json record_to_json(const DiagnosticsRecord& r) {
  json j;
  j["t"] = hexfloat(r.t);
  j["area"] = hexfloat(r.area);
  j["perimeter"] = hexfloat(r.perimeter);
  j["mass"] = hexfloat(r.mass);
  j["energy"] = hexfloat(r.energy);
  j["diss_solute"] = hexfloat(r.diss_solute);
  j["diss_viscous"] = hexfloat(r.diss_viscous);
  j["diss_membrane"] = hexfloat(r.diss_membrane);
  j["diss_total"] = hexfloat(r.diss_total);
  j["var_residual"] = hexfloat(r.var_residual);
  j["min_c"] = hexfloat(r.min_c);
  j["max_c"] = hexfloat(r.max_c);
  j["min_r"] = hexfloat(r.min_r);
  j["dt_used"] = hexfloat(r.dt_used);
  return j;
}

DiagnosticsRecord record_from_json(const json& j) {
  DiagnosticsRecord r;
  r.t = from_hexfloat(j.at("t"));
  r.area = from_hexfloat(j.at("area"));
  r.perimeter = from_hexfloat(j.at("perimeter"));
  r.mass = from_hexfloat(j.at("mass"));
  r.energy = from_hexfloat(j.at("energy"));
  r.diss_solute = from_hexfloat(j.at("diss_solute"));
  r.diss_viscous = from_hexfloat(j.at("diss_viscous"));
  r.diss_membrane = from_hexfloat(j.at("diss_membrane"));
  r.diss_total = from_hexfloat(j.at("diss_total"));
  r.var_residual = from_hexfloat(j.at("var_residual"));
  r.min_c = from_hexfloat(j.at("min_c"));
  r.max_c = from_hexfloat(j.at("max_c"));
  r.min_r = from_hexfloat(j.at("min_r"));
  r.dt_used = from_hexfloat(j.at("dt_used"));
  return r;
}

}  // namespace

std::string hexfloat(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double from_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw SchemaError("bad hexfloat value '" + s + "'");
  return x;
}

std::string csv_header() {
  return "t,area,perimeter,mass,energy,diss_solute,diss_viscous,diss_membrane,"
         "diss_total,var_residual,min_c,max_c,min_r,dt_used\n";
}

std::string csv_row(const DiagnosticsRecord& r) {
  std::string out;
  const double cols[] = {r.t,           r.area,        r.perimeter, r.mass,
                         r.energy,      r.diss_solute, r.diss_viscous,
                         r.diss_membrane, r.diss_total, r.var_residual,
                         r.min_c,       r.max_c,       r.min_r,     r.dt_used};
  for (size_t k = 0; k < std::size(cols); ++k) {
    if (k) out += ',';
    out += fmt17(cols[k]);
  }
  out += '\n';
  return out;
}

DiagnosticsWriter::DiagnosticsWriter(const std::string& path)
    : out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot open diagnostics file '" + path + "'");
  out_ << csv_header();
}

void DiagnosticsWriter::write(const DiagnosticsRecord& rec) {
  out_ << csv_row(rec);
  out_.flush();
  if (!out_) throw IoError("writing diagnostics failed");
}

void write_snapshot(const Snapshot& snap, const std::string& path) {
  const int n_phi = snap.state.curve.n();
  const int n_s = int(snap.state.xi.rows());
  json j;
  j["schema_version"] = kSnapshotSchemaVersion;
  j["mode"] = mode_to_string(snap.state.mode);
  j["t"] = hexfloat(snap.state.t);
  j["kappa"] = hexfloat(snap.state.kappa);
  j["n_phi"] = n_phi;
  j["n_s"] = n_s;
  j["derivative_scheme"] = snap.derivative_scheme;
  json r = json::array();
  for (int k = 0; k < n_phi; ++k) r.push_back(hexfloat(snap.state.curve.r[k]));
  j["r"] = std::move(r);
  json xi = json::array();
  for (int i = 0; i < n_s; ++i)
    for (int k = 0; k < n_phi; ++k) xi.push_back(hexfloat(snap.state.xi(i, k)));
  j["xi"] = std::move(xi);
  j["record"] = record_to_json(snap.record);
  j["config"] = snap.config_text;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open snapshot file '" + path + "'");
  out << j.dump(1) << '\n';
  if (!out) throw IoError("writing snapshot failed");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("snapshot is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kSnapshotSchemaVersion)
      throw SchemaError("unsupported snapshot schema version");
    Snapshot snap;
    snap.state.mode = mode_from_string(j.at("mode").get<std::string>());
    snap.state.t = from_hexfloat(j.at("t"));
    snap.state.kappa = from_hexfloat(j.at("kappa"));
    const int n_phi = j.at("n_phi").get<int>();
    const int n_s = j.at("n_s").get<int>();
    snap.derivative_scheme = j.at("derivative_scheme").get<std::string>();
    const auto& r = j.at("r");
    const auto& xi = j.at("xi");
    if (n_phi < 8 || n_s < 3 || int(r.size()) != n_phi ||
        long(xi.size()) != long(n_s) * n_phi)
      throw SchemaError("snapshot array shapes are inconsistent");
    snap.state.curve.r.resize(n_phi);
    for (int k = 0; k < n_phi; ++k) snap.state.curve.r[k] = from_hexfloat(r[k]);
    snap.state.xi.resize(n_s, n_phi);
    for (int i = 0; i < n_s; ++i)
      for (int k = 0; k < n_phi; ++k)
        snap.state.xi(i, k) = from_hexfloat(xi[i * n_phi + k]);
    snap.record = record_from_json(j.at("record"));
    snap.config_text = j.at("config").get<std::string>();
    return snap;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("snapshot is missing fields: ") + e.what());
  }
}

void write_svg_frame(const SimState& state, const std::string& path) {
  const int n_phi = state.curve.n();
  const int n_s = int(state.xi.rows());
  const double rmax = state.curve.r.maxCoeff();
  const double m = 1.1 * rmax;
  const double cmax = std::max(state.xi.maxCoeff(), 1e-300);

  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" "
         "viewBox=\"" + coord(-m) + " " + coord(-m) + " " + coord(2 * m) + " " +
         coord(2 * m) + "\">\n";
  svg += "<g transform=\"scale(1,-1)\">\n";
  // Ring bands painted outside in; the fill encodes the ring-mean concentration.
  for (int i = n_s - 1; i >= 1; --i) {
    double mean = 0.0;
    for (int j = 0; j < n_phi; ++j) mean += state.xi(i, j);
    mean /= n_phi;
    const int level = int(std::lround(255.0 * std::min(1.0, mean / cmax)));
    const double s = double(i) / (n_s - 1);
    svg += "<polygon points=\"";
    for (int j = 0; j < n_phi; ++j) {
      const double p = 2.0 * M_PI * j / n_phi;
      if (j) svg += ' ';
      svg += coord(s * state.curve.r[j] * std::cos(p)) + "," +
             coord(s * state.curve.r[j] * std::sin(p));
    }
    char color[64];
    std::snprintf(color, sizeof color, "rgb(%d,%d,255)", 255 - level, 255 - level);
    svg += std::string("\" fill=\"") + color + "\" stroke=\"none\"/>\n";
  }
  // Boundary outline.
  svg += "<polygon points=\"";
  for (int j = 0; j < n_phi; ++j) {
    const double p = 2.0 * M_PI * j / n_phi;
    if (j) svg += ' ';
    svg += coord(state.curve.r[j] * std::cos(p)) + "," +
           coord(state.curve.r[j] * std::sin(p));
  }
  svg += "\" fill=\"none\" stroke=\"black\" stroke-width=\"";
  svg += coord(0.01 * rmax) + "\"/>\n</g>\n</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open svg file '" + path + "'");
  out << svg;
  if (!out) throw IoError("writing svg failed");
}

void write_manifest(const RunManifest& man, const std::string& path) {
  json j;
  j["completed"] = man.completed;
  j["error"] = man.error;
  j["final_time"] = hexfloat(man.final_time);
  j["n_records"] = man.n_records;
  j["snapshots"] = man.snapshots;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open manifest file '" + path + "'");
  out << j.dump(1) << '\n';
  if (!out) throw IoError("writing manifest failed");
}

}  // namespace osmoflow
