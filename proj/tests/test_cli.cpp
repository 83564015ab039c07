// End-to-end CLI checks: exit codes, printed argmax triples, byte-level
// reproducibility of output files, CSV schemas, and scenario presets. The
// binary under test is passed as the first program argument.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace {

std::string g_binary;
std::filesystem::path g_scratch;

struct RunResult {
  int exit_code = -1;
  std::string output; // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::filesystem::path capture =
      g_scratch / ("capture_" + std::to_string(counter++) + ".txt");
  const std::string cmd = "'" + g_binary + "' " + args + " > '" +
                          capture.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::ostringstream text;
  text << in.rdbuf();
  result.output = text.str();
  return result;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

} // namespace

TEST_CASE("argmax prints the optimal triple") {
  const RunResult r = run_cli("analyze --argmax 10 --workers 8");
  CHECK(r.exit_code == 0);
  CHECK(first_line(r.output) == "(6,5,0)");
  CHECK(r.output.find("sum rate") != std::string::npos);
}

TEST_CASE("usage and config mistakes exit with code 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);

  const RunResult unknown = run_cli("scenario nope");
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.output.find("fig2") != std::string::npos);

  write_file(g_scratch / "empty.conf", "");
  CHECK(run_cli("simulate --config '" + (g_scratch / "empty.conf").string() +
                "'")
            .exit_code == 2);

  // No operating point anywhere.
  CHECK(run_cli("simulate --realizations 2").exit_code == 2);

  CHECK(run_cli("simulate --mode sideways").exit_code == 2);

  // Violated antenna budget identity.
  CHECK(run_cli("simulate --set antennas=5 --set multiplexing=3 "
                "--set diversity=2 --set nulling=9 --realizations 2")
            .exit_code == 2);
}

TEST_CASE("simulate output files are reproducible byte for byte") {
  const std::string op = "--set antennas=5 --set multiplexing=3 "
                         "--set diversity=2 --set nulling=1 ";
  const std::string base = "simulate " + op + "--realizations 10 ";

  const auto out_a = g_scratch / "sim_a";
  const auto out_b = g_scratch / "sim_b";
  const auto out_c = g_scratch / "sim_c";
  CHECK(run_cli(base + "--seed 7 --workers 4 --output '" + out_a.string() +
                "'")
            .exit_code == 0);
  CHECK(run_cli(base + "--seed 7 --workers 2 --output '" + out_b.string() +
                "'")
            .exit_code == 0);
  CHECK(run_cli(base + "--seed 8 --workers 4 --output '" + out_c.string() +
                "'")
            .exit_code == 0);

  const std::string cdf_a = read_file(out_a / "simulate_cdf.csv");
  CHECK(cdf_a == read_file(out_b / "simulate_cdf.csv"));
  CHECK(cdf_a != read_file(out_c / "simulate_cdf.csv"));
  CHECK(first_line(cdf_a) == "rate_bps_hz,cdf");
}

TEST_CASE("sweep emits the documented schema") {
  const auto out = g_scratch / "sweep_out";
  const RunResult r =
      run_cli("sweep --M 5 --K-list 2,3 --max-O 1 --realizations 4 "
              "--workers 8 --output '" +
              out.string() + "'");
  CHECK(r.exit_code == 0);
  const std::string csv = read_file(out / "sweep.csv");
  CHECK(first_line(csv) ==
        "K,zeta,O,mode,sum_rate_bps_hz,sum_rate_ci,p10_bps_hz,p10_ci,"
        "samples");
  int lines = 0;
  for (char c : csv) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 5); // header + (2,4,0), (2,3,1), (3,3,0), (3,2,1)
}

TEST_CASE("validate reports the bound check and exits clean") {
  write_file(g_scratch / "val.conf",
             "users_per_cell = 21\nantennas = 15\nmultiplexing = 3\n"
             "diversity = 4\nnulling = 9\n");
  const auto out = g_scratch / "val_out";
  const RunResult r =
      run_cli("validate --config '" + (g_scratch / "val.conf").string() +
              "' --realizations 60 --probes 10 --points 8 --workers 8 "
              "--output '" +
              out.string() + "'");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("VIOLATED") == std::string::npos);

  const std::string report = read_file(out / "validate_report.csv");
  std::istringstream lines(report);
  std::string header, first_row;
  std::getline(lines, header);
  std::getline(lines, first_row);
  CHECK(header == "kappa_bps_hz,bound_ccdf,empirical_ccdf,ci,holds");
  // Zero threshold: certain event on both sides.
  CHECK(first_row == "0,1,1,0,1");
}

TEST_CASE("scenario presets write their documented files") {
  const auto out = g_scratch / "fig7_out";
  const RunResult r = run_cli("scenario fig7 --realizations 3 --workers 8 "
                              "--output '" +
                              out.string() + "'");
  CHECK(r.exit_code == 0);
  for (const char* name :
       {"fig7_cdf_fixed_sum_opt.csv", "fig7_cdf_adaptive_sum_opt.csv",
        "fig7_cdf_fixed_edge_opt.csv", "fig7_cdf_adaptive_edge_opt.csv"}) {
    CAPTURE(name);
    CHECK(first_line(read_file(out / name)) == "rate_bps_hz,cdf");
  }
  const std::string preset = read_file(out / "fig7_sum_opt.conf");
  CHECK(preset.find("# realizations = 3") != std::string::npos);
  CHECK(preset.find("multiplexing = 8") != std::string::npos);
  CHECK(preset.find("nulling = 2") != std::string::npos);
}

TEST_CASE("table2 prints both optima and their gap") {
  const auto out = g_scratch / "table2_out";
  const RunResult r = run_cli("scenario table2 --M 5 --realizations 4 "
                              "--workers 8 --output '" +
                              out.string() + "'");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("analytic optimum (3,3,0)") != std::string::npos);
  CHECK(r.output.find("simulated optimum (") != std::string::npos);
  CHECK(r.output.find("gap") != std::string::npos);
  CHECK(std::filesystem::exists(out / "table2_sweep.csv"));
  CHECK(std::filesystem::exists(out / "table2_analytic.csv"));
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
    return 1;
  }
  g_binary = argv[1];
  g_scratch = std::filesystem::temp_directory_path() /
              ("lsmimo_cli_test_" + std::to_string(::getpid()));
  std::filesystem::remove_all(g_scratch);
  std::filesystem::create_directories(g_scratch);

  doctest::Context ctx;
  ctx.applyCommandLine(1, argv);
  const int rc = ctx.run();
  std::filesystem::remove_all(g_scratch);
  return rc;
}
