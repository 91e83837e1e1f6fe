#include <ergolab/harness.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

namespace {

struct Args {
    std::string config;
    std::string out = "out";
    int threads = 0;
    std::uint64_t seed_offset = 0;
};

int env_threads() {
    const char* v = std::getenv("ERGOLAB_THREADS");
    if (!v) return 1;
    int t = std::atoi(v);
    return t > 0 ? t : 1;
}

void add_common(CLI::App* sub, Args& args, bool need_config) {
    auto* opt = sub->add_option("--config", args.config, "experiment config (JSON)");
    if (need_config) opt->required();
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--threads", args.threads, "worker threads (default ERGOLAB_THREADS or 1)");
    sub->add_option("--seed-offset", args.seed_offset, "added to every configured seed");
}

int run_kind(const Args& args, const std::string& kind) {
    std::ifstream in(args.config, std::ios::binary);
    if (!in) throw ergolab::SchemaError("config", "cannot open " + args.config);
    ergolab::json cfg = ergolab::json::parse(in);
    if (cfg.contains("kind")) {
        // `percolate` also fronts the probe pipeline built from the same ops
        bool ok = cfg["kind"] == kind ||
                  (kind == "percolate" && cfg["kind"] == "interval-probe");
        if (!ok) throw ergolab::SchemaError("kind", "config kind does not match the subcommand");
    } else {
        cfg["kind"] = kind;
    }
    int threads = args.threads > 0 ? args.threads : env_threads();
    ergolab::ExperimentRunner runner(cfg, args.out, threads, args.seed_offset);
    ergolab::RunManifest manifest = runner.run();
    std::cout << manifest.body["kind"].get<std::string>() << " done, outputs in " << args.out
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergolab: finite models for percolation on measured equivalence relations"};
    app.require_subcommand(1);

    Args args;
    const std::pair<const char*, const char*> kinds[] = {
        {"sweep", "sweep"},         {"percolate", "percolate"},
        {"spectrum", "spectral"},   {"entropy", "entropy-ledger"},
        {"coinduce", "coinduce"},   {"extend", "extension-suite"},
    };
    for (const auto& [name, kind] : kinds) add_common(app.add_subcommand(name, kind), args, true);
    auto* replay = app.add_subcommand("replay", "re-hash the outputs listed in a run manifest");
    replay->add_option("--out", args.out, "run directory to verify")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (replay->parsed()) {
            ergolab::ReplayResult res = ergolab::replay_check(args.out);
            for (const auto& f : res.missing) std::cerr << "missing: " << f << "\n";
            for (const auto& f : res.mismatched) std::cerr << "digest mismatch: " << f << "\n";
            std::cout << (res.pass ? "replay ok" : "replay failed") << "\n";
            return res.pass ? 0 : 1;
        }
        for (const auto& [name, kind] : kinds)
            if (app.get_subcommand(name)->parsed()) return run_kind(args, kind);
        return 1;
    } catch (const ergolab::SchemaError& e) {
        std::cerr << "schema error at " << e.path << ": " << e.what() << "\n";
        return 2;
    } catch (const ergolab::BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
