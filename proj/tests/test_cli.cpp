#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "stabmor/io.hpp"

using namespace stabmor;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run stabmor_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stabmor_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Rows after the version line and the header.
std::vector<std::vector<std::string>> csv_rows(const fs::path& p, std::vector<std::string>* header = nullptr) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "# stabmor-v1");
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (first && header) *header = cells;
    if (!first) rows.push_back(cells);
    first = false;
  }
  return rows;
}

}  // namespace

TEST_CASE("order lists") {
  CHECK(cli::parse_r_list("1,2,5") == std::vector<long>{1, 2, 5});
  CHECK(cli::parse_r_list("1:4") == std::vector<long>{1, 2, 3, 4});
  CHECK(cli::parse_r_list("2:9:3,12") == std::vector<long>{2, 5, 8, 12});
  CHECK_THROWS(cli::parse_r_list("1,,2"));
  CHECK_THROWS(cli::parse_r_list("4:1"));
  CHECK_THROWS(cli::parse_r_list("x"));
}

TEST_CASE("generate msd and convection-diffusion") {
  const fs::path dir = scratch("gen");
  Run r = stabmor_run({"generate", "msd", "--masses", "4", "--out", (dir / "msd").string()});
  REQUIRE(r.code == 0);
  const Json m = read_manifest(dir / "msd");
  CHECK(m["n"] == 8);
  CHECK(m["n_in"] == 1);
  CHECK(m["n_out"] == 1);
  CHECK(fs::exists(dir / "msd" / "report.json"));

  r = stabmor_run({"generate", "convdiff", "--n", "400", "--grade", "8", "--out", (dir / "cd").string()});
  REQUIRE(r.code == 0);
  const Json rep = Json::parse(slurp(dir / "cd" / "report.json"));
  CHECK(rep["stability"]["k"].get<long>() >= 1);
  CHECK(rep["stability"]["alpha"].get<double>() < 0.0);
  fs::remove_all(dir);
}

TEST_CASE("invalid generator specs exit 2 without output") {
  const fs::path dir = scratch("bad");
  CHECK(stabmor_run({"generate", "msd", "--masses", "0", "--out", dir.string()}).code == 2);
  CHECK_FALSE(fs::exists(dir));
  CHECK(stabmor_run({"generate", "nonsense", "--out", dir.string()}).code == 2);
  CHECK(stabmor_run({"generate", "msd"}).code == 2);
  CHECK(stabmor_run({}).code == 2);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("reduce sweeps") {
  const fs::path dir = scratch("reduce");
  REQUIRE(stabmor_run({"generate", "crafted", "--out", (dir / "crafted").string()}).code == 0);
  REQUIRE(stabmor_run({"generate", "msd", "--masses", "6", "--out", (dir / "msd").string()}).code == 0);

  SUBCASE("conventional crafted sweep has an unstable ROM with NA error") {
    REQUIRE(stabmor_run({"reduce", "--system", (dir / "crafted").string(), "--out", (dir / "c").string(), "--r", "1:2"})
                .code == 0);
    std::vector<std::string> header;
    const auto rows = csv_rows(dir / "c" / "error_sweep.csv", &header);
    CHECK(header == std::vector<std::string>{"r", "spectral_abscissa_conventional", "spectral_abscissa_stabilized",
                                             "h2_error", "max_output_error"});
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[0][1]) > 0.0);
    CHECK(rows[0][3] == "NA");
    CHECK(rows[0][2] == "NA");
    CHECK(std::stod(rows[1][1]) < 0.0);
  }

  SUBCASE("stabilized sweep is stable everywhere") {
    REQUIRE(stabmor_run({"reduce", "--system", (dir / "msd").string(), "--out", (dir / "s").string(), "--r", "1:12",
                         "--stabilize", "--horizon", "5"})
                .code == 0);
    const auto rows = csv_rows(dir / "s" / "error_sweep.csv");
    REQUIRE(rows.size() == 12);
    for (const auto& row : rows) {
      CHECK(std::stod(row[2]) < 0.0);
      CHECK(row[3] != "NA");
      CHECK(std::stod(row[4]) >= 0.0);
    }
    CHECK(fs::exists(dir / "s" / "stabilizer" / "Z.mtx"));
    CHECK(fs::exists(dir / "s" / "stabilizer" / "U_tilde.mtx"));
    const Json st = Json::parse(slurp(dir / "s" / "stabilizer" / "stabilizer.json"));
    for (const char* key : {"delta", "k", "mu_max", "q", "adi_steps", "residual_history"}) CHECK(st.contains(key));
    CHECK(fs::exists(dir / "s" / "bases" / "V_r3.mtx"));
    CHECK(fs::exists(dir / "s" / "bases" / "V_r3.json"));
    CHECK(fs::exists(dir / "s" / "roms" / "stabilized_r3" / "manifest.json"));
    // A written ROM can be analyzed against its full model.
    const Run a = stabmor_run({"analyze", "--system", (dir / "msd").string(), "--rom",
                               (dir / "s" / "roms" / "stabilized_r12").string(), "--out", (dir / "a").string()});
    CHECK(a.code == 0);
    const Json rep = Json::parse(slurp(dir / "a" / "report.json"));
    CHECK(rep["h2_error"]["value"].get<double>() < 1e-6);
  }

  SUBCASE("orders above n are usage errors") {
    CHECK(stabmor_run({"reduce", "--system", (dir / "msd").string(), "--out", (dir / "x").string(), "--r", "13"})
              .code == 2);
    CHECK(stabmor_run({"reduce", "--system", (dir / "msd").string(), "--out", (dir / "x").string(), "--r", "1",
                       "--stabilize", "--delta", "0"})
              .code == 2);
    CHECK(stabmor_run({"reduce", "--system", (dir / "nope").string(), "--out", (dir / "x").string(), "--r", "1"})
              .code == 2);
  }

  SUBCASE("POD sweep") {
    REQUIRE(stabmor_run({"reduce", "--system", (dir / "msd").string(), "--out", (dir / "p").string(), "--r", "2,4",
                         "--method", "pod", "--stabilize", "--horizon", "5"})
                .code == 0);
    const auto rows = csv_rows(dir / "p" / "error_sweep.csv");
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][2]) < 0.0);
    const Json side = Json::parse(slurp(dir / "p" / "bases" / "V_r2.json"));
    CHECK(side["method"] == "pod");
  }
  fs::remove_all(dir);
}

TEST_CASE("simulate") {
  const fs::path dir = scratch("sim");
  REQUIRE(stabmor_run({"generate", "msd", "--masses", "3", "--out", (dir / "msd").string()}).code == 0);

  SUBCASE("row count follows the step count") {
    REQUIRE(stabmor_run({"simulate", "--system", (dir / "msd").string(), "--out", (dir / "t").string(), "--input",
                         "sine", "--period", "1e-5", "--horizon", "1e-3", "--steps", "1000"})
                .code == 0);
    std::vector<std::string> header;
    const auto rows = csv_rows(dir / "t" / "trajectory.csv", &header);
    CHECK(header == std::vector<std::string>{"t", "y_1"});
    CHECK(rows.size() == 1001);
    CHECK(std::stod(rows.back()[0]) == doctest::Approx(1e-3));
  }

  SUBCASE("zero input keeps the output at zero") {
    for (const char* integ : {"trapezoid", "adaptive"}) {
      REQUIRE(stabmor_run({"simulate", "--system", (dir / "msd").string(), "--out", (dir / "z").string(), "--input",
                           "zero", "--integrator", integ, "--samples", "20"})
                  .code == 0);
      for (const auto& row : csv_rows(dir / "z" / "trajectory.csv")) CHECK(std::stod(row[1]) == 0.0);
    }
  }

  SUBCASE("adaptive agrees with the trapezoidal rule") {
    REQUIRE(stabmor_run({"simulate", "--system", (dir / "msd").string(), "--out", (dir / "tr").string(), "--input",
                         "step", "--horizon", "4", "--steps", "4000"})
                .code == 0);
    REQUIRE(stabmor_run({"simulate", "--system", (dir / "msd").string(), "--out", (dir / "ad").string(), "--input",
                         "step", "--horizon", "4", "--integrator", "adaptive", "--samples", "4000", "--rtol", "1e-9",
                         "--atol", "1e-12"})
                .code == 0);
    const auto tr = csv_rows(dir / "tr" / "trajectory.csv");
    const auto ad = csv_rows(dir / "ad" / "trajectory.csv");
    REQUIRE(tr.size() == ad.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) worst = std::max(worst, std::abs(std::stod(tr[i][1]) - std::stod(ad[i][1])));
    CHECK(worst < 1e-5);
  }

  SUBCASE("nonlinear runs need a nonlinear bundle and the adaptive integrator") {
    CHECK(stabmor_run({"simulate", "--system", (dir / "msd").string(), "--out", (dir / "n").string(), "--nonlinear",
                       "--integrator", "adaptive"})
              .code == 2);
    REQUIRE(stabmor_run({"generate", "cubic-msd", "--masses", "3", "--out", (dir / "cub").string()}).code == 0);
    CHECK(stabmor_run({"simulate", "--system", (dir / "cub").string(), "--out", (dir / "n").string(), "--nonlinear"})
              .code == 2);
    CHECK(stabmor_run({"simulate", "--system", (dir / "cub").string(), "--out", (dir / "n").string(), "--nonlinear",
                       "--integrator", "adaptive", "--samples", "10", "--input", "step"})
              .code == 0);
    CHECK(csv_rows(dir / "n" / "trajectory.csv").size() == 11);
  }
  fs::remove_all(dir);
}

TEST_CASE("nonlinear reduce") {
  const fs::path dir = scratch("nl");
  REQUIRE(stabmor_run({"generate", "crafted-cubic", "--out", (dir / "cc").string()}).code == 0);
  REQUIRE(stabmor_run({"reduce", "--system", (dir / "cc").string(), "--out", (dir / "r").string(), "--r", "1",
                       "--nonlinear", "--stabilize", "--horizon", "2"})
              .code == 0);
  const auto rows = csv_rows(dir / "r" / "error_sweep.csv");
  REQUIRE(rows.size() == 1);
  CHECK(std::stod(rows[0][1]) > 0.0);
  CHECK(std::stod(rows[0][2]) < 0.0);
  CHECK(rows[0][3] == "NA");
  fs::remove_all(dir);
}

TEST_CASE("analyze writes Bode data") {
  const fs::path dir = scratch("an");
  REQUIRE(stabmor_run({"generate", "msd", "--masses", "2", "--out", (dir / "msd").string()}).code == 0);
  REQUIRE(stabmor_run({"analyze", "--system", (dir / "msd").string(), "--out", (dir / "a").string(), "--omega-min",
                       "0.01", "--omega-max", "100", "--points", "50"})
              .code == 0);
  std::vector<std::string> header;
  const auto rows = csv_rows(dir / "a" / "bode.csv", &header);
  CHECK(header == std::vector<std::string>{"omega", "mag_db", "phase_deg"});
  REQUIRE(rows.size() == 50);
  CHECK(std::stod(rows.front()[0]) == doctest::Approx(0.01));
  CHECK(std::stod(rows.back()[0]) == doctest::Approx(100.0));
  // Force on the wall-side mass of a fixed-free chain: unit static gain at the free end.
  CHECK(std::abs(std::stod(rows.front()[1])) < 1e-2);
  fs::remove_all(dir);
}

TEST_CASE("sweeps are reproducible byte for byte") {
  const fs::path dir = scratch("rep");
  REQUIRE(stabmor_run({"generate", "nonnormal", "--n", "40", "--seed", "7", "--out", (dir / "nn").string()}).code == 0);
  for (const char* out : {"a", "b"})
    REQUIRE(stabmor_run({"reduce", "--system", (dir / "nn").string(), "--out", (dir / out).string(), "--r", "1:8",
                         "--stabilize", "--horizon", "2"})
                .code == 0);
  CHECK(slurp(dir / "a" / "error_sweep.csv") == slurp(dir / "b" / "error_sweep.csv"));
  fs::remove_all(dir);
}
