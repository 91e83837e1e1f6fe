#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ergolab/harness.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace ergolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "ergolab_harness_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json sweep_config() {
    return json{{"kind", "sweep"},
                {"window", {{"type", "tree"}, {"degree", 4}, {"radius", 4}}},
                {"pGrid", {{"from", 0.1}, {"to", 0.5}, {"step", 0.1}}},
                {"seeds", {1, 2}}};
}

}  // namespace

TEST_CASE("stable hashing and number formatting") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
    CHECK(hex64(0) == "0000000000000000");
    CHECK(fmt_g(0.5) == "0.5");
    CHECK(fmt_g(1.0 / 3.0) == "0.333333333333");
    CHECK(fmt_g(1e-7) == "1e-07");
    CHECK(fmt_g(12345.0) == "12345");
}

TEST_CASE("schema violations carry the offending path") {
    fs::path dir = scratch("schema");
    try {
        ExperimentRunner(json{{"p", 0.5}}, dir).run();
        FAIL("missing kind accepted");
    } catch (const SchemaError& e) {
        CHECK(e.path == "kind");
    }
    CHECK_THROWS_AS(ExperimentRunner(json{{"kind", "frobnicate"}}, dir).run(), SchemaError);
    try {
        json bad = sweep_config();
        bad["pGrid"] = {0.5, 0.1};
        ExperimentRunner(bad, dir).run();
        FAIL("unsorted grid accepted");
    } catch (const SchemaError& e) {
        CHECK(e.path == "pGrid");
    }
    json noseeds = sweep_config();
    noseeds.erase("seeds");
    CHECK_THROWS_AS(ExperimentRunner(noseeds, dir).run(), SchemaError);
}

TEST_CASE("sweep run: outputs, manifest, replay") {
    fs::path dir = scratch("sweep");
    RunManifest m = ExperimentRunner(sweep_config(), dir).run();
    CHECK(m.body["kind"] == "sweep");
    CHECK(m.body["codeVersion"] == "ergolab 0.1.0");
    CHECK(m.body["seedLedger"] == json({1, 2}));
    REQUIRE(m.body["outputs"].contains("sweep.csv"));
    REQUIRE(m.body["outputs"].contains("summary.csv"));
    CHECK(fs::exists(dir / "manifest.json"));

    std::string csv = slurp(dir / "sweep.csv");
    CHECK(csv.rfind("p,seed,largestFrac,bigClusters,spanning\n", 0) == 0);
    // 5 grid points x 2 seeds + header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    CHECK(hex64(fnv1a64(csv)) == m.body["outputs"]["sweep.csv"].get<std::string>());

    SUBCASE("replay passes on the untouched directory") {
        ReplayResult r = replay_check(dir);
        CHECK(r.pass);
        CHECK(r.missing.empty());
        CHECK(r.mismatched.empty());
    }
    SUBCASE("tampering is detected") {
        std::ofstream out(dir / "summary.csv", std::ios::binary | std::ios::app);
        out << "tampered\n";
        out.close();
        ReplayResult r = replay_check(dir);
        CHECK_FALSE(r.pass);
        CHECK(r.mismatched == std::vector<std::string>{"summary.csv"});
    }
    SUBCASE("a deleted output is reported missing") {
        fs::remove(dir / "sweep.csv");
        ReplayResult r = replay_check(dir);
        CHECK_FALSE(r.pass);
        CHECK(r.missing == std::vector<std::string>{"sweep.csv"});
    }
    SUBCASE("replay on an absent directory fails on the manifest") {
        ReplayResult r = replay_check(dir / "nowhere");
        CHECK_FALSE(r.pass);
        CHECK(r.missing == std::vector<std::string>{"manifest.json"});
    }
}

TEST_CASE("runs are byte-deterministic and thread-count independent") {
    fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    RunManifest ma = ExperimentRunner(sweep_config(), a, 1).run();
    RunManifest mb = ExperimentRunner(sweep_config(), b, 1).run();
    RunManifest mc = ExperimentRunner(sweep_config(), c, 4).run();
    CHECK(ma.body == mb.body);
    CHECK(ma.body == mc.body);
    CHECK(slurp(a / "sweep.csv") == slurp(c / "sweep.csv"));
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));

    SUBCASE("seed offset shifts the ledger") {
        fs::path d = scratch("det_d");
        RunManifest md = ExperimentRunner(sweep_config(), d, 1, 100).run();
        CHECK(md.body["seedLedger"] == json({101, 102}));
        CHECK(slurp(a / "sweep.csv") != slurp(d / "sweep.csv"));
    }
    SUBCASE("svg is emitted on request and digested") {
        fs::path d = scratch("det_svg");
        json cfg = sweep_config();
        cfg["svg"] = true;
        RunManifest md = ExperimentRunner(cfg, d).run();
        CHECK(md.body["outputs"].contains("sweep.svg"));
        CHECK(slurp(d / "sweep.svg").rfind("<svg", 0) == 0);
        CHECK(replay_check(d).pass);
    }
}

TEST_CASE("entropy-ledger runs") {
    fs::path dir = scratch("entropy");
    RunManifest m =
        ExperimentRunner(json{{"kind", "entropy-ledger"}, {"alphaN", 3}}, dir).run();
    CHECK(m.body["results"]["minimum"].get<double>() ==
          doctest::Approx(2.6094379124341003).epsilon(1e-12));
    std::string csv = slurp(dir / "ledger.csv");
    CHECK(csv.rfind("rule,value\nlem2,2.60943791243", 0) == 0);
    json ledger = json::parse(slurp(dir / "ledger.json"));
    CHECK(ledger["lem2Intermediate"].get<double>() ==
          doctest::Approx(2.0016096941527516).epsilon(1e-12));

    SUBCASE("a vanishing schedule lowers the minimum") {
        fs::path d2 = scratch("entropy_sched");
        json cfg{{"kind", "entropy-ledger"},
                 {"alphaN", 3},
                 {"schedule", {{"n", 3}, {"m", 100}}}};
        RunManifest m2 = ExperimentRunner(cfg, d2).run();
        CHECK(m2.body["results"]["minimum"].get<double>() ==
              doctest::Approx(0.026094379124341).epsilon(1e-9));
    }
    SUBCASE("searching a concrete graphing instead of alphaN") {
        fs::path d3 = scratch("entropy_rel");
        json eq;
        eq["weights"] = json::array();
        for (int i = 0; i < 7; ++i) eq["weights"].push_back("1/7");
        eq["classes"] = {{0, 1, 2, 3, 4, 5, 6}};
        eq["automorphisms"] = {{1, 2, 3, 4, 5, 6, 0},
                               {2, 3, 4, 5, 6, 0, 1},
                               {3, 4, 5, 6, 0, 1, 2}};
        RunManifest m3 =
            ExperimentRunner(json{{"kind", "entropy-ledger"}, {"eqrel", eq}}, d3).run();
        // alpha search certifies n = 6, so the lem2 value is log 6 + C
        CHECK(m3.body["results"]["minimum"].get<double>() ==
              doctest::Approx(std::log(6.0) + ledger_constant()).epsilon(1e-9));
    }
}

TEST_CASE("interval-probe runs") {
    fs::path dir = scratch("interval");
    json cfg{{"kind", "interval-probe"}, {"rank", 8},     {"radius", 3},
             {"p", 0.118},               {"seeds", {1, 2}}, {"sizeThreshold", 50}};
    RunManifest m = ExperimentRunner(cfg, dir).run();
    double lo = m.body["results"]["intervalLo"].get<double>();
    double hi = m.body["results"]["intervalHi"].get<double>();
    CHECK(lo == doctest::Approx(1.0 / (17.0 - 2.0 * std::sqrt(15.0))).epsilon(1e-12));
    CHECK(hi == doctest::Approx(1.0 / (2.0 * std::sqrt(15.0))).epsilon(1e-12));
    CHECK(lo < hi);
    std::string csv = slurp(dir / "probe.csv");
    CHECK(csv.rfind("seed,bigClusters\n", 0) == 0);
    CHECK(replay_check(dir).pass);
}

TEST_CASE("percolate and spectral runs") {
    SUBCASE("percolate emits the cluster table") {
        fs::path dir = scratch("perc");
        json cfg{{"kind", "percolate"},
                 {"window", {{"type", "grid"}, {"dims", {8, 8}}}},
                 {"p", 0.5},
                 {"seed", 7}};
        RunManifest m = ExperimentRunner(cfg, dir).run();
        CHECK(m.body["results"]["clusters"].get<int>() > 0);
        CHECK(slurp(dir / "clusters.csv").rfind("clusterId,size,boundaryComponents\n", 0) == 0);
    }
    SUBCASE("spectral scans radii") {
        fs::path dir = scratch("spectral");
        json cfg{{"kind", "spectral"},
                 {"window", {{"type", "tree"}, {"degree", 3}, {"radius", 2}}},
                 {"radii", {2, 3}},
                 {"isoSamples", 0}};
        ExperimentRunner(cfg, dir).run();
        std::string csv = slurp(dir / "spectrum.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
        CHECK(csv.rfind("radius,vertices,edges,windowNorm,isoUpperBound\n", 0) == 0);
    }
}

TEST_CASE("coinduce run") {
    fs::path dir = scratch("coinduce");
    json eq;
    eq["weights"] = {"1/4", "1/4", "1/4", "1/4"};
    eq["classes"] = {{0, 1, 2, 3}};
    json cfg{{"kind", "coinduce"},
             {"eqrel", eq},
             {"betaGenerators", {{1, 0, 3, 2}}},
             {"alphaGenerators", {{1, 0}}},
             {"yWeights", {"1/2", "1/2"}}};
    RunManifest m = ExperimentRunner(cfg, dir).run();
    CHECK(m.body["results"]["extension"] == true);
    json out = json::parse(slurp(dir / "coinduce.json"));
    CHECK(out["choiceSystem"]["N"] == 2);
    CHECK(out["points"] == 16);
    CHECK(out["cocycles"]["perm"] == true);
    CHECK(out["props"]["expansionContainment"] == true);
}

TEST_CASE("extension-suite run") {
    fs::path dir = scratch("extsuite");
    json cfg{{"kind", "extension-suite"}, {"instances", 12}, {"seed", 3}};
    RunManifest m = ExperimentRunner(cfg, dir).run();
    CHECK(m.body["results"]["failures"] == 0);
    CHECK(m.body["seedLedger"] == json({3}));
    std::string csv = slurp(dir / "results.csv");
    CHECK(csv.rfind("instance,points,classes,symbols,extensionPoints,isExtension\n", 0) == 0);
    CHECK(replay_check(dir).pass);

    SUBCASE("double run agrees byte for byte") {
        fs::path dir2 = scratch("extsuite2");
        RunManifest m2 = ExperimentRunner(cfg, dir2).run();
        CHECK(m.body == m2.body);
        CHECK(slurp(dir / "results.csv") == slurp(dir2 / "results.csv"));
    }
}
