#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "osmoflow/config.hpp"
#include "osmoflow/output.hpp"

using namespace osmoflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

const char* kGoodConfig =
    "[run]\n"
    "mode = osmosis\n"
    "kappa = 0.5\n"
    "n_phi = 32\n"
    "n_s = 9\n"
    "t_final = 0.01\n"
    "\n"
    "[initial]\n"
    "shape = circle\n"
    "radius = 1.0\n"
    "concentration = uniform\n"
    "value = 0.0\n";

}  // namespace

TEST_CASE("config parsing") {
  RunConfig cfg = parse_config_text(kGoodConfig);
  CHECK(cfg.mode == "osmosis");
  CHECK(cfg.kappa == 0.5);
  CHECK(cfg.n_phi == 32);
  CHECK(cfg.n_s == 9);
  CHECK(cfg.t_final == 0.01);
  CHECK(cfg.value == 0.0);
  CHECK(cfg.source_text == kGoodConfig);

  SUBCASE("comments, blank lines and defaults") {
    RunConfig c = parse_config_text("# comment\n[run]\nkappa = 2.0  # trailing\n");
    CHECK(c.kappa == 2.0);
    CHECK(c.n_phi == 128);
    CHECK(c.mode == "full");
  }

  SUBCASE("fourier coefficient lists") {
    RunConfig c = parse_config_text(
        "[initial]\nshape = fourier\nbase = 1.0\ncos_coeffs = 0.1, 0.0, 0.05\n"
        "sin_coeffs = 0.0, 0.08\n");
    REQUIRE(c.cos_coeffs.size() == 3);
    CHECK(c.cos_coeffs[2] == 0.05);
    REQUIRE(c.sin_coeffs.size() == 2);
    CHECK(c.sin_coeffs[1] == 0.08);
  }

  SUBCASE("malformed input is a parse error") {
    CHECK_THROWS_AS(parse_config_text("[run]\nkappa 1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[run\nkappa = 1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[run]\nkappa = abc\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("kappa = 1.0\n"), ParseError);  // key before section
  }

  SUBCASE("unknown keys and sections are validation errors") {
    CHECK_THROWS_AS(parse_config_text("[run]\nkapa = 1.0\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("[extras]\nx = 1\n"), ValidationError);
  }

  SUBCASE("range validation") {
    CHECK_THROWS_AS(parse_config_text("[run]\nkappa = -1.0\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("[run]\nn_phi = 31\n"), ValidationError);  // odd
    CHECK_THROWS_AS(parse_config_text("[run]\nn_phi = 6\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("[run]\nmode = sideways\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("[tolerances]\ni2_policy = maybe\n"), ValidationError);
    CHECK_THROWS_AS(
        parse_config_text("[run]\nmode = osmosis\n[initial]\nshape = ellipse\n"
                          "concentration = equilibrium\n"),
        ValidationError);  // equilibrium preset needs a circle
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/definitely/missing.ini"), ConfigError);
  }
}

TEST_CASE("initial data preparation and the compatibility policy") {
  SUBCASE("equilibrium preset is compatible as sampled") {
    RunConfig cfg = parse_config_text(
        "[run]\nn_phi = 64\nn_s = 33\n[initial]\nshape = circle\nradius = 1.0\n"
        "concentration = equilibrium\n");
    InitialData init = prepare_initial(cfg);
    CHECK_FALSE(init.projected);
    CHECK(init.i2_residual_raw < 1e-10);
    CHECK((init.xi.array() - cfg.kappa).abs().maxCoeff() < 1e-12);
  }

  SUBCASE("uniform data is projected under the default policy") {
    RunConfig cfg = parse_config_text(
        "[run]\nn_phi = 64\nn_s = 33\n[initial]\nconcentration = uniform\nvalue = 0.8\n");
    InitialData init = prepare_initial(cfg);
    CHECK(init.projected);
    CHECK(init.i2_residual_raw > 0.1);
    CHECK(init.i2_residual_final < cfg.i2_tol * 2.0);
  }

  SUBCASE("policy reject raises") {
    RunConfig cfg = parse_config_text(
        "[run]\nn_phi = 64\nn_s = 33\n[initial]\nconcentration = uniform\nvalue = 0.8\n"
        "[tolerances]\ni2_policy = reject\n");
    CHECK_THROWS_AS(prepare_initial(cfg), I2Error);
  }

  SUBCASE("zero concentration needs no projection") {
    RunConfig cfg = parse_config_text(
        "[run]\nmode = osmosis\n[initial]\nconcentration = uniform\nvalue = 0.0\n");
    InitialData init = prepare_initial(cfg);
    CHECK_FALSE(init.projected);
    CHECK(init.xi.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("csv formatting") {
  DiagnosticsRecord r;
  r.t = 1.0 / 3.0;
  r.area = M_PI;
  r.dt_used = 1e-3;
  const std::string head = csv_header();
  CHECK(head ==
        "t,area,perimeter,mass,energy,diss_solute,diss_viscous,diss_membrane,"
        "diss_total,var_residual,min_c,max_c,min_r,dt_used\n");
  const std::string row = csv_row(r);
  // 17 significant digits round-trip doubles exactly
  CHECK(row.find("0.33333333333333331") != std::string::npos);
  CHECK(row.find("3.1415926535897931") != std::string::npos);
  CHECK(row.back() == '\n');
  CHECK(std::count(row.begin(), row.end(), ',') == 13);
}

TEST_CASE("hexfloat round trip") {
  for (double x : {0.0, 1.0, -1.0 / 3.0, 6.02e23, 5e-324, -1.7976931348623157e308}) {
    CHECK(from_hexfloat(hexfloat(x)) == x);
  }
  CHECK_THROWS(from_hexfloat("not a float"));
}

TEST_CASE("snapshot write-read-write is byte identical") {
  Snapshot snap;
  snap.state.t = 0.12345;
  snap.state.kappa = 0.7;
  snap.state.mode = Mode::Full;
  snap.state.curve = PolarCurve::ellipse(1.2, 0.9, 32);
  snap.state.xi = (InteriorScalar::Random(9, 32).array() + 2.0).matrix();
  snap.record.t = snap.state.t;
  snap.record.energy = -1.0 / 7.0;
  snap.config_text = kGoodConfig;

  const fs::path p1 = temp_file("osmo_snap1.json");
  const fs::path p2 = temp_file("osmo_snap2.json");
  write_snapshot(snap, p1.string());
  Snapshot back = read_snapshot(p1.string());
  CHECK(back.state.t == snap.state.t);
  CHECK(back.state.mode == Mode::Full);
  CHECK((back.state.curve.r == snap.state.curve.r).all());
  CHECK(back.state.xi == snap.state.xi);
  CHECK(back.record.energy == snap.record.energy);
  CHECK(back.config_text == snap.config_text);
  write_snapshot(back, p2.string());
  CHECK(slurp(p1) == slurp(p2));
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("snapshot schema errors") {
  const fs::path p = temp_file("osmo_bad.json");
  {
    std::ofstream out(p);
    out << "{\"schema_version\": 999}\n";
  }
  CHECK_THROWS_AS(read_snapshot(p.string()), SchemaError);
  {
    std::ofstream out(p);
    out << "this is not json\n";
  }
  CHECK_THROWS_AS(read_snapshot(p.string()), SchemaError);
  fs::remove(p);
  CHECK_THROWS_AS(read_snapshot((fs::temp_directory_path() / "osmo_absent.json").string()),
                  IoError);
}

TEST_CASE("svg frames are deterministic and well formed") {
  SimState st;
  st.curve = PolarCurve::circle(1.0, 32);
  st.xi = InteriorScalar::Constant(9, 32, 0.5);
  const fs::path p1 = temp_file("osmo_f1.svg");
  const fs::path p2 = temp_file("osmo_f2.svg");
  write_svg_frame(st, p1.string());
  write_svg_frame(st, p2.string());
  const std::string s = slurp(p1);
  CHECK(s == slurp(p2));
  CHECK(s.find("<svg") != std::string::npos);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("polygon") != std::string::npos);
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("manifest") {
  RunManifest man;
  man.completed = true;
  man.final_time = 0.5;
  man.n_records = 42;
  man.snapshots = {"snapshot_0000.json", "final.json"};
  const fs::path p = temp_file("osmo_manifest.json");
  write_manifest(man, p.string());
  const std::string s = slurp(p);
  CHECK(s.find("snapshot_0000.json") != std::string::npos);
  CHECK(s.find("\"completed\"") != std::string::npos);
  fs::remove(p);
}
