#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "waveinform/checks.hpp"
#include "waveinform/experiments.hpp"
#include "waveinform/io.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>

using namespace waveinform;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("waveinform_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Cheap TC1 run: short fit, coarse reconstruction, small scan.
ExperimentConfig small_config() {
    ExperimentConfig cfg = preset(1);
    cfg.n_mult = 2;
    cfg.fit_options.max_evals = 60;
    cfg.dx_grid = 0.05;
    cfg.pointsource.scan_nodes = 10;
    return cfg;
}

void run_pipeline(const ExperimentConfig& cfg, const fs::path& out) {
    cmd::simulate(cfg, out);
    cmd::sample(cfg, out);
    cmd::fit(cfg, out);
    cmd::reconstruct(cfg, out);
    cmd::errors(cfg, out);
    cmd::pointsource_scan(cfg, out);
}

}  // namespace

TEST_CASE("17 significant digits round-trip every double") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(mant(rng), expo(rng));
        CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
    }
    CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("sensor CSV round trip is exact") {
    const fs::path dir = scratch("csv");
    SensorDataset d;
    d.positions = {Vec3(0.1, 0.2, 0.3), Vec3(1.0 / 3, 2.0 / 3, 0.7)};
    d.times = {0.0, 0.02, 0.04};
    d.values = {1e-300, -2.5, std::acos(-1.0), 0.0, 1.0 / 7, -1e17};
    io::write_sensor_csv(d, dir / "s.csv");
    const std::string text = io::read_file(dir / "s.csv");
    CHECK(text.rfind("sensor_id,x,y,z,t,value\n", 0) == 0);
    const SensorDataset back = io::read_sensor_csv(dir / "s.csv");
    CHECK(back.positions == d.positions);
    CHECK(back.times == d.times);
    CHECK(back.values == d.values);

    io::write_atomic(dir / "bad.csv", "id,x,y,z,t,value\n0,0,0,0,0,1\n");
    CHECK_THROWS((void)io::read_sensor_csv(dir / "bad.csv"));
}

TEST_CASE("atomic writes replace the target and leave no temporaries") {
    const fs::path dir = scratch("atomic");
    io::write_atomic(dir / "a.txt", "first");
    io::write_atomic(dir / "a.txt", "second");
    CHECK(io::read_file(dir / "a.txt") == "second");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("sha256 matches the standard test vectors") {
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config JSON round trip and master seed") {
    ExperimentConfig cfg = preset(3);
    cfg.sensors.count = 17;
    cfg.fit_options.max_evals = 321;
    cfg.error_norms = {1.0, kInfinityNorm};
    cfg.recon_from_fit = true;
    const std::string text = config_json(cfg);
    CHECK(config_json(parse_config(text)) == text);

    ExperimentConfig a = preset(1), b = preset(1);
    apply_master_seed(a, 99);
    apply_master_seed(b, 99);
    CHECK(config_json(a) == config_json(b));
    const std::set<std::uint64_t> seeds{a.sensors.seed, a.noise_seed, a.fit_seed, a.pointsource.seed};
    CHECK(seeds.size() == 4);
    apply_master_seed(b, 100);
    CHECK(a.noise_seed != b.noise_seed);

    CHECK_THROWS((void)parse_config(R"({"test_case": 7})"));
    CHECK_THROWS((void)parse_config(R"({"sim": {"dx": -0.1}})"));
    CHECK_THROWS((void)parse_config(R"({"reconstruct": {"theta": "guess"}})"));
}

TEST_CASE("reference layout gives 30 sensors x 75 samples") {
    const ExperimentConfig cfg = preset(1);
    FieldHistory h;
    const SensorDataset d = generate_dataset(cfg, &h);
    CHECK(d.sensors() == 30);
    CHECK(d.samples() == 75);
    CHECK(d.size() == 2250);
    for (const auto& x : d.positions) {
        CHECK((x.array() >= 0.2).all());
        CHECK((x.array() <= 0.8).all());
    }

    const fs::path dir = scratch("history");
    save_history(h, dir / "h");
    const FieldHistory back = load_history(dir / "h");
    CHECK(back.grid == h.grid);
    CHECK(back.times == h.times);
    CHECK(back.snapshots == h.snapshots);
}

TEST_CASE("zero initial conditions give zero data and zero reconstructions") {
    ExperimentConfig cfg = preset(1);
    cfg.u0 = InitialCondition::zero();
    cfg.noise_sigma = 0.0;
    const SensorDataset d = generate_dataset(cfg);
    for (double v : d.values) REQUIRE(v == 0.0);
    const auto r = reconstruct(first_sensors(d, 5), cfg.truth, GridSpec::cube(0.0, 1.0, 0.1), cfg.dt_v);
    for (double v : r.u0.values) CHECK(v == 0.0);
    for (double v : r.v0.values) CHECK(v == 0.0);
}

TEST_CASE("n_mult = 0 passes the true parameters through") {
    const fs::path dir = scratch("passthrough");
    ExperimentConfig cfg = preset(2);
    cfg.n_mult = 0;
    cmd::simulate(cfg, dir);
    cmd::fit(cfg, dir);
    CHECK(io::read_file(dir / "theta.json") == hyperparams_json(cfg.truth));
    const HyperParams back = parse_hyperparams(io::read_file(dir / "theta.json"));
    CHECK(back.c == cfg.truth.c);
    CHECK(back.v->rho == cfg.truth.v->rho);
    CHECK_FALSE(back.u.has_value());
}

TEST_CASE("identical seeds give byte-identical outputs and a complete manifest") {
    const ExperimentConfig cfg = small_config();
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    run_pipeline(cfg, a);
    run_pipeline(cfg, b);

    const auto manifest = nlohmann::json::parse(io::read_file(a / "manifest.json"));
    int listed = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        const std::string name = e.path().filename().string();
        if (name == "manifest.json") continue;
        INFO(name);
        REQUIRE(manifest["files"].contains(name));
        const std::string content = io::read_file(e.path());
        CHECK(manifest["files"][name]["sha256"] == io::sha256_hex(content));
        CHECK(manifest["files"][name]["bytes"] == content.size());
        CHECK(content == io::read_file(b / name));
        ++listed;
    }
    CHECK(listed == static_cast<int>(manifest["files"].size()));

    ExperimentConfig other = cfg;
    apply_master_seed(other, 5);
    const fs::path c = scratch("det_c");
    cmd::simulate(other, c);
    CHECK(io::read_file(c / "sensors.csv") != io::read_file(a / "sensors.csv"));
}

TEST_CASE("verify reports mutations as failures instead of crashing") {
    CheckOptions o;
    o.criteria = {};
    o.tamper_sign = true;
    auto results = run_checks(o);
    REQUIRE(results.size() == 1);
    CHECK(results[0].id == 0);
    CHECK_FALSE(results[0].pass);

    o = parse_check_options(R"({"criteria": [1], "invariants": false, "quadrature_order": 4})");
    results = run_checks(o);
    REQUIRE(results.size() == 1);
    CHECK(results[0].id == 1);
    CHECK_FALSE(results[0].pass);
    CHECK(results[0].measured > results[0].tolerance);

    const fs::path dir = scratch("verify");
    o = parse_check_options(R"({"criteria": [4], "seed": 5})");
    CHECK(o.seed == 5);
    CHECK(cmd::verify(o, dir));
    const auto report = nlohmann::json::parse(io::read_file(dir / "verify.json"));
    CHECK(report["all_pass"] == true);
    CHECK(report["checks"].size() == 2);
    const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
    CHECK(manifest["files"].contains("verify.json"));

    CHECK_THROWS((void)parse_check_options(R"({"quadrature_order": 0})"));
    CHECK_THROWS((void)parse_check_options("[1, 2]"));
    o.criteria = {12};
    CHECK_THROWS((void)run_checks(o));
}
