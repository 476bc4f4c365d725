#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "irsp/pipeline.hpp"

using namespace irsp;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

bool has_code(const std::function<void()>& f, ErrorCode code) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::current_path() / "pipeline_runs" / name;
  fs::remove_all(p);
  return p;
}

ExperimentConfig small(const std::string& root) {
  ExperimentConfig c;
  c.set("grid.n", "32");
  c.set("sweep.q", "5");
  c.set("output", fresh(root).string());
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::size_t count_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IRSP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config round trip over random key subsets", "[cli]") {
  const std::map<std::string, std::vector<std::string>> choices{
      {"model", {"acoustic2", "acoustic3", "elastic2", "elastic3"}},
      {"grid.n", {"auto", "16", "48"}},
      {"sweep.q", {"20", "150", "37.5"}},
      {"sweep.step", {"0.1", "0.25"}},
      {"bumps", {"auto", "0,0,1,1", "0.5,0,0.5,2; -0.5,0,0.5,1"}},
      {"inversion.nonneg", {"true", "false"}},
      {"seed", {"0", "18446744073709551615"}},
  };
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    ExperimentConfig a;
    for (const auto& [key, vals] : choices) {
      if (rng() % 2 == 0) a.set(key, vals[rng() % vals.size()]);
    }
    const ExperimentConfig b = ExperimentConfig::parse(a.serialize());
    CHECK(b == a);
    CHECK(b.serialize() == a.serialize());
    CHECK(b.hash() == a.hash());
  }
}

TEST_CASE("config parsing, hashing and errors", "[cli]") {
  const ExperimentConfig c = ExperimentConfig::parse("# comment\n\nmodel = elastic3\n  seed=9  \n");
  CHECK(c.get("model") == "elastic3");
  CHECK(c.seed() == 9);
  CHECK(c.dimension() == 3);
  CHECK(c.field_spec().grid.n == 32);
  CHECK(ExperimentConfig().field_spec().grid.n == 64);
  CHECK(c.hash_hex().size() == 16);

  ExperimentConfig d = c;
  d.set("output", "other");
  d.set("threads", "4");
  CHECK(d.hash() == c.hash());
  d.set("sweep.q", "100");
  CHECK(d.hash() != c.hash());
  CHECK(run_directory(c) == (fs::path("runs") / c.hash_hex()).string());

  CHECK(has_code([] { ExperimentConfig::parse("colour = blue\n"); }, ErrorCode::Config));
  CHECK(has_code([] { ExperimentConfig::parse("no equals sign\n"); }, ErrorCode::Config));
  CHECK(has_code([] { ExperimentConfig::parse("model = acoustic2\nmodel = acoustic3\n"); },
                 ErrorCode::Config));
  CHECK(has_code([] { ExperimentConfig::parse("sweep.q = many\n").validate(); }, ErrorCode::Config));
  CHECK(has_code([] { ExperimentConfig::parse("model = acoustic3\nbumps = 0,0,1,1\n").validate(); },
                 ErrorCode::Config));
  // The weight exponent follows from the model and order; it is not a key.
  CHECK(has_code([] { ExperimentConfig::parse("sweep.p = 3\n"); }, ErrorCode::Config));
  CHECK(ExperimentConfig::parse("model = acoustic3\norder = 3.2\n").sweep().weight_exponent == 3.2);
  CHECK(ExperimentConfig::parse("order = 2.2\n").sweep().weight_exponent == Catch::Approx(3.2));

  const auto& schema = config_schema();
  CHECK(std::any_of(schema.begin(), schema.end(),
                    [](const ConfigKey& k) { return std::string(k.name) == "delta_star"; }));
}

TEST_CASE("sample: zero amplitude, determinism and diagnostics", "[cli]") {
  ExperimentConfig zero = small("zero");
  zero.set("bumps", "0,0,1,0");
  const CommandResult z = cmd_sample(zero);
  const FieldSample s = read_sample((fs::path(z.run_dir) / "sample").string());
  for (double v : s.values[0]) CHECK(v == 0.0);

  const ExperimentConfig a = small("det_a");
  ExperimentConfig b = small("det_b");
  const CommandResult ra = cmd_sample(a);
  const CommandResult rb = cmd_sample(b);
  CHECK(fs::path(ra.run_dir).filename() == fs::path(rb.run_dir).filename());
  for (const char* f : {"sample.json", "sample.bin", "diagnostics.json"}) {
    CHECK(slurp(fs::path(ra.run_dir) / f) == slurp(fs::path(rb.run_dir) / f));
  }
  const json diag = json::parse(slurp(fs::path(ra.run_dir) / "diagnostics.json"));
  CHECK(diag.at("expected_slope") == -2.0);
  CHECK(diag.at("spectral_slope").get<double>() == Catch::Approx(-2.0).margin(0.3));
  CHECK(fs::exists(fs::path(ra.run_dir) / "manifest_sample.json"));
  const json manifest = json::parse(slurp(fs::path(ra.run_dir) / "manifest_sample.json"));
  CHECK(manifest.at("config_hash") == a.hash_hex());
  CHECK(manifest.at("version") == version_string());

  ExperimentConfig bad = small("bad");
  bad.set("order", "2.6");
  CHECK(has_code([&] { cmd_sample(bad); }, ErrorCode::Spec));
}

TEST_CASE("sweep: missing input, minimal band and row counts", "[cli]") {
  ExperimentConfig c = small("sweep");
  CHECK(has_code([&] { cmd_sweep(c, false); }, ErrorCode::MissingInput));

  c.set("sweep.q", "1.2");
  c.set("sweep.step", "0.2");
  const CommandResult r = cmd_sweep(c, true);
  CHECK(count_lines(fs::path(r.run_dir) / "sweep.csv") == 1 + 2 * 8);

  ExperimentConfig doubled = c;
  doubled.set("points", "circle:16:3");
  const CommandResult r2 = cmd_sweep(doubled, true);
  CHECK(count_lines(fs::path(r2.run_dir) / "sweep.csv") == 1 + 2 * 16);

  const json prof = json::parse(slurp(fs::path(r.run_dir) / "profile.json"));
  CHECK(prof.at("estimate").size() == 8);
  CHECK(prof.at("constants").contains("sign_discrepancy"));

  c.set("points", "1.5,0");
  CHECK(has_code([&] { cmd_sweep(c, true); }, ErrorCode::Geometry));
}

TEST_CASE("invert: zero data and closed loop files", "[cli]") {
  ExperimentConfig c = small("invert");
  c.set("inversion.source", "analytic");
  c.set("inversion.grid_n", "12");
  c.set("bumps", "0,0,1,0");
  const CommandResult z = cmd_invert(c);
  std::istringstream rows(slurp(fs::path(z.run_dir) / "reconstruction.csv"));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "index,x,y,phi_corner,phi_best,phi_true");
  while (std::getline(rows, line)) {
    const auto cols = line.substr(line.find(',', line.find(',', line.find(',') + 1) + 1) + 1);
    CHECK(cols == "0,0,0");
  }
  CHECK(fs::exists(fs::path(z.run_dir) / "lcurve.csv"));

  ExperimentConfig profile = small("invert_profile");
  CHECK(has_code([&] { cmd_invert(profile); }, ErrorCode::MissingInput));
}

TEST_CASE("validate suites report machine-readable verdicts", "[cli]") {
  const ExperimentConfig c = small("validate");
  for (const char* suite : {"specialfn", "greens", "inversion"}) {
    const CommandResult r = cmd_validate(c, suite);
    CHECK(r.passed);
    const json rep = json::parse(r.report);
    CHECK(rep.at("passed") == true);
    CHECK(fs::exists(fs::path(r.run_dir) / (std::string("validate_") + suite + ".json")));
  }
  CHECK(has_code([&] { cmd_validate(c, "nonsense"); }, ErrorCode::Config));
}

TEST_CASE("command line exit codes", "[cli]") {
  const std::string out = fresh("cli").string();
  CHECK(run_cli("schema") == 0);
  CHECK(run_cli("--out " + out + " sweep") == 3);
  CHECK(run_cli("sample --out " + out) == 0);
  CHECK(run_cli("sweep --out " + out) == 0);

  const fs::path cfg = fs::path(out) / "bad.txt";
  std::ofstream(cfg) << "order = 5\n";
  CHECK(run_cli("sample --config " + cfg.string() + " --out " + out) == 2);
  std::ofstream(cfg) << "points = 0.2,0\n";
  CHECK(run_cli("sweep --seed 1 --config " + cfg.string() + " --out " + out) == 4);
  std::ofstream(cfg) << "inversion.source = analytic\npoints = 0.2,0\n";
  CHECK(run_cli("invert --config " + cfg.string() + " --out " + out) == 4);
  CHECK(run_cli("validate specialfn --out " + out) == 0);
}
