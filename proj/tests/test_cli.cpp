#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(DDBH_TEST_WORKDIR) / "cli";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" + std::string(DDBH_CLI) + "\" " + args + " > \"" +
                          (kWork / "stdout.txt").string() + "\" 2> \"" +
                          (kWork / "stderr.txt").string() + "\"";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << body;
  return p;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("missing required key exits nonzero without output") {
  fs::remove_all(kWork);
  const fs::path cfg = write_config("bad.ini", "[chain]\nN = 10\nepsilon_base = 1\n[output]\ndirectory = " +
                                                   (kWork / "bad_out").string() + "\n");
  CHECK(run("-c \"" + cfg.string() + "\" simulate") == 2);
  CHECK(slurp(kWork / "stderr.txt").find("chain.delta_base") != std::string::npos);
  CHECK(!fs::exists(kWork / "bad_out"));
}

TEST_CASE("sweep on a 2x2 grid") {
  const fs::path out = kWork / "sweep";
  const fs::path cfg = write_config(
      "sweep.ini",
      "[chain]\nN = 10\nN0 = 2\nphi = pi/3\nU = -2e-4\ndelta_base = 0.5\nepsilon_base = 20\n"
      "[integrator]\nt_max = 100\n"
      "[sweep]\ndelta_min = 0\ndelta_max = 0.5\ndelta_points = 2\n"
      "epsilon_min = 10\nepsilon_max = 20\nepsilon_points = 2\n");
  CHECK(run("-c \"" + cfg.string() + "\" -o \"" + out.string() + "\" sweep", "DDBH_WORKERS=2") == 0);
  const std::string csv = slurp(out / "phase_diagram.csv");
  CHECK(csv.rfind("delta,epsilon,phase,mean_density,max_fluct,outcome\n", 0) == 0);
  CHECK(count_lines(csv) == 5);
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"workers\": 2") != std::string::npos);
  CHECK(manifest.find("phase_diagram.csv") != std::string::npos);
}

TEST_CASE("oracle over four interaction strengths") {
  const fs::path out = kWork / "oracle";
  const fs::path cfg = write_config(
      "oracle.ini",
      "[chain]\nN = 1\nJ = 0\nprofile = homogeneous\ndelta_base = 1\nepsilon_base = 1\n"
      "[oracle]\nu_values = 0, -1e-3, -1e-2, -2e-2\n");
  CHECK(run("-c \"" + cfg.string() + "\" -o \"" + out.string() + "\" oracle") == 0);
  std::istringstream csv(slurp(out / "oracle.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "U,err_gaussian,err_meanfield");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string u, g, m;
    std::getline(fields, u, ',');
    std::getline(fields, g, ',');
    std::getline(fields, m, ',');
    if (rows > 1) CHECK(std::stod(g) <= std::stod(m));
  }
  CHECK(rows == 4);
}

TEST_CASE("winding without pairing is trivial everywhere") {
  const fs::path out = kWork / "winding";
  const fs::path cfg = write_config(
      "winding.ini",
      "[chain]\nN = 12\nN0 = 2\nphi = pi/3\nU = 0\ndelta_base = 0.5\nepsilon_base = 5\n");
  CHECK(run("-c \"" + cfg.string() + "\" -o \"" + out.string() + "\" winding") == 0);
  std::istringstream csv(slurp(out / "winding_profiles.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "delta,epsilon,j,nu_j");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 12);
  CHECK(fs::exists(out / "svd.json"));
}

TEST_CASE("simulate writes trajectory, state and report") {
  const fs::path out = kWork / "simulate";
  const fs::path cfg = write_config(
      "simulate.ini",
      "[chain]\nN = 1\nJ = 0\nprofile = homogeneous\ndelta_base = 1\nepsilon_base = 1\n"
      "[integrator]\nsample_dt = 0.5\n");
  CHECK(run("-c \"" + cfg.string() + "\" -o \"" + out.string() + "\" simulate") == 0);
  CHECK(slurp(out / "trajectory.csv").rfind("t,j,re_alpha,im_alpha,G_jj\n", 0) == 0);
  CHECK(slurp(out / "report.json").find("\"outcome\": \"converged\"") != std::string::npos);
  CHECK(fs::exists(out / "final_state.json"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(run("-c \"" + cfg.string() + "\" -o \"" + out.string() + "\" green") == 0);
  CHECK(slurp(out / "green.csv").rfind("row,col,re,im\n", 0) == 0);
}

TEST_CASE("usage errors") {
  CHECK(run("") != 0);
  CHECK(run("-c /nonexistent.ini simulate") == 2);
  const fs::path cfg = write_config("ok.ini", "[chain]\nN = 1\nJ = 0\nprofile = homogeneous\ndelta_base = 1\nepsilon_base = 1\n");
  CHECK(run("-c \"" + cfg.string() + "\" --set chain.kappa=-1 simulate") == 2);
  CHECK(run("-c \"" + cfg.string() + "\" bogus") != 0);
}
