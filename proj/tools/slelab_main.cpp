#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "core/errors.hpp"
#include "core/experiments.hpp"
#include "core/io.hpp"
#include "core/loewner.hpp"

namespace fs = std::filesystem;
using namespace slelab;

namespace {

int exit_code_for(const SlelabError& e) {
    switch (e.code()) {
        case ErrorCode::InvalidArgument:
            return 2;
        case ErrorCode::NumericFailure:
            return 3;
        case ErrorCode::Partial:
            return 4;
        case ErrorCode::Io:
            return 2;  // bad paths are argument problems from the CLI's view
    }
    return 3;
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos < csv.size()) {
        size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(std::stod(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

int default_jobs() {
    if (const char* env = std::getenv("SLELAB_JOBS")) {
        const int j = std::atoi(env);
        if (j > 0) return j;
    }
    return 1;
}

struct SampleArgs {
    std::string kind = "chordal";
    double kappa = 0.0;
    double dt = 1e-4;
    double tmax = 1.0;
    double cr_stop = 0.0;
    double theta = kPi / 2.0;
    uint64_t seed = 1;
    std::string out;
};

int run_sample(const SampleArgs& a) {
    RngStream rng(a.seed, 0);
    SleCurveSample s;
    if (a.kind == "chordal") {
        s = sample_chordal(a.kappa, a.dt, a.tmax, rng);
    } else if (a.kind == "radial") {
        s = sample_radial(a.kappa, a.dt, a.tmax, rng);
    } else if (a.kind == "two-sided") {
        const double stop = a.cr_stop > 0.0 ? a.cr_stop : 1e-2;
        s = sample_two_sided_radial(a.kappa, a.theta, a.dt, stop, rng);
    } else {
        fail_invalid("unknown --kind '" + a.kind + "'");
    }
    write_curve_csv(a.out, s);
    write_curve_sidecar(a.out, s, a.seed);
    std::printf("wrote %s (%zu vertices) and %s.json\n", a.out.c_str(), s.curve.points.size(),
                a.out.c_str());
    return 0;
}

struct ExperimentArgs {
    std::string id;
    std::string config_path;
    std::string out_dir = "runs";
    std::string run_id;
    std::string resume;
    int jobs = 0;
    // flag overrides; NaN/empty = not set
    double kappa = -1.0;
    std::string grid;
    double s = -1.0;
    double theta = -1.0;
    long long replicates = -1;
    double dt = -1.0;
    long long seed = -1;
    int instances = -1;
};

ExperimentConfig build_config(const ExperimentArgs& a) {
    ExperimentConfig cfg;
    if (!a.config_path.empty()) {
        Json j = load_json(a.config_path);
        if (!a.id.empty()) j["experiment_id"] = a.id;
        cfg = ExperimentConfig::from_json(j);
    } else {
        if (a.id.empty()) fail_invalid("--id or --config is required");
        cfg = ExperimentConfig::defaults(a.id);
    }
    if (a.kappa > 0.0) cfg.kappa = a.kappa;
    if (!a.grid.empty()) cfg.x_values = parse_grid(a.grid);
    if (a.s > 0.0) cfg.s = a.s;
    if (a.theta > 0.0) cfg.theta = a.theta;
    if (a.replicates > 0) cfg.replicates = a.replicates;
    if (a.dt > 0.0) cfg.dt_base = a.dt;
    if (a.seed >= 0) cfg.master_seed = uint64_t(a.seed);
    if (a.instances > 0) cfg.instances = a.instances;
    cfg.validate();
    return cfg;
}

void write_manifest(const fs::path& dir, RunManifest m, int total) {
    m.cells_done.assign(size_t(total), false);
    for (int u = 0; u < total; ++u)
        m.cells_done[size_t(u)] = fs::exists(dir / "units" / ("unit_" + std::to_string(u) + ".json"));
    save_json_atomic((dir / "manifest.json").string(), m.to_json());
}

int run_experiment_cmd(const ExperimentArgs& a) {
    const ExperimentConfig cfg = build_config(a);
    const std::string hash = config_fingerprint(cfg.to_json());
    std::string run_id = a.run_id;
    if (!a.resume.empty()) run_id = a.resume;
    if (run_id.empty())
        run_id = cfg.experiment_id + "-s" + std::to_string(cfg.master_seed) + "-" + hash.substr(0, 8);

    const fs::path dir = fs::path(a.out_dir) / run_id;
    const fs::path units = dir / "units";
    const bool resuming = !a.resume.empty();
    if (resuming) {
        if (!fs::exists(dir / "manifest.json"))
            fail_invalid("no run '" + run_id + "' under " + a.out_dir);
        const RunManifest old = RunManifest::from_json(load_json((dir / "manifest.json").string()));
        if (old.config_hash != hash)
            fail_invalid("resume config mismatch: run has hash " + old.config_hash +
                         ", current config hashes to " + hash);
    } else {
        std::error_code ec;
        fs::remove_all(units, ec);  // a fresh run never reuses stale units
        fs::remove(dir / "record.json", ec);
        fs::remove(dir / "cells.csv", ec);
    }
    fs::create_directories(units);

    RunManifest man;
    man.run_id = run_id;
    man.config_hash = hash;
    man.created_at = iso8601_now();
    man.outputs = {(dir / "record.json").string(), (dir / "cells.csv").string()};
    man.status = "running";
    const int total = experiment_unit_count(cfg);
    write_manifest(dir, man, total);

    DirUnitStore store(units.string());
    const int jobs = a.jobs > 0 ? a.jobs : default_jobs();
    ExperimentRecord rec;
    try {
        rec = run_experiment(cfg, jobs, &store, [&](int done, int tot) {
            if (done == tot || done % 8 == 0) write_manifest(dir, man, tot);
        });
    } catch (const SlelabError& e) {
        man.status = "failed";
        write_manifest(dir, man, total);
        int persisted = 0;
        for (int u = 0; u < total; ++u) {
            Json tmp;
            if (store.load(u, &tmp)) ++persisted;
        }
        std::fprintf(stderr, "error: %s\n", e.what());
        if (persisted > 0 && persisted < total && e.code() == ErrorCode::NumericFailure) {
            std::fprintf(stderr, "partial run: %d/%d units persisted under %s\n", persisted, total,
                         units.string().c_str());
            return 4;
        }
        return exit_code_for(e);
    }

    save_json_atomic((dir / "record.json").string(), rec.to_json());
    save_text_atomic((dir / "cells.csv").string(), rec.cells_csv());
    man.status = "done";
    write_manifest(dir, man, total);

    std::printf("%s", rec.verdict_table().c_str());
    std::printf("record: %s\n", (dir / "record.json").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loewner-flow SLE sampling and boundary-return experiments"};
    app.require_subcommand(1);

    SampleArgs sa;
    CLI::App* sample = app.add_subcommand("sample", "sample one trace and write CSV + sidecar");
    sample->add_option("--kind", sa.kind, "chordal | radial | two-sided")->required();
    sample->add_option("--kappa", sa.kappa)->required();
    sample->add_option("--dt", sa.dt, "base capacity step");
    sample->add_option("--tmax", sa.tmax, "final capacity time (chordal/radial)");
    sample->add_option("--cr-stop", sa.cr_stop, "conformal-radius stop (two-sided)");
    sample->add_option("--theta", sa.theta, "two-sided opening angle");
    sample->add_option("--seed", sa.seed);
    sample->add_option("--out", sa.out)->required();

    ExperimentArgs ea;
    CLI::App* exp = app.add_subcommand("experiment", "run a full experiment to a record");
    exp->add_option("--id", ea.id,
                    "thm1|thm2|thm3|boundary_est|at_most_half|crosscut_sum|theta_stationary");
    exp->add_option("--config", ea.config_path, "ExperimentConfig JSON (flags override)");
    exp->add_option("--out", ea.out_dir, "runs directory");
    exp->add_option("--run-id", ea.run_id);
    exp->add_option("--resume", ea.resume, "resume an existing run id");
    exp->add_option("--jobs", ea.jobs, "worker count (default $SLELAB_JOBS or 1)");
    exp->add_option("--kappa", ea.kappa);
    exp->add_option("--x-values", ea.grid, "comma-separated grid (r, r-s, or diameters)");
    exp->add_option("--s", ea.s);
    exp->add_option("--theta", ea.theta);
    exp->add_option("--replicates", ea.replicates);
    exp->add_option("--dt", ea.dt);
    exp->add_option("--seed", ea.seed);
    exp->add_option("--instances", ea.instances);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sample->parsed()) return run_sample(sa);
        return run_experiment_cmd(ea);
    } catch (const SlelabError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
