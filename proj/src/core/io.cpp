#include "io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "errors.hpp"

namespace slelab {

namespace {

void rename_into_place(const std::string& tmp, const std::string& path) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail_io("cannot move temporary file onto '" + path + "'");
    }
}

}  // namespace

void save_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail_io("cannot open '" + tmp + "' for writing");
        out << text;
        if (!out.good()) fail_io("write failed on '" + tmp + "'");
    }
    rename_into_place(tmp, path);
}

void save_json_atomic(const std::string& path, const Json& j) {
    save_text_atomic(path, j.dump(2) + "\n");
}

Json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail_io("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

void write_curve_csv(const std::string& path, const SleCurveSample& sample) {
    if (sample.curve.times.size() != sample.curve.points.size())
        fail_invalid("curve times/points length mismatch");
    std::string body = "t,re,im\n";
    body.reserve(body.size() + 64 * sample.curve.times.size());
    char line[128];
    for (size_t i = 0; i < sample.curve.times.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", sample.curve.times[i],
                      sample.curve.points[i].real(), sample.curve.points[i].imag());
        body += line;
    }
    save_text_atomic(path, body);
}

void write_curve_sidecar(const std::string& path, const SleCurveSample& sample, uint64_t seed) {
    Json j;
    j["kind"] = sample.kind;
    j["kappa"] = sample.kappa;
    j["dt_base"] = sample.dt_base;
    j["seed"] = seed;
    j["stop_criterion"] = sample.stop_criterion;
    if (sample.kind == "two_sided_radial") j["theta"] = sample.theta;
    save_json_atomic(path + ".json", j);
}

Json estimate_to_json(const MeasureEstimate& e, const std::string& scheme) {
    Json j;
    j["mean"] = e.mean;
    j["stderr"] = e.std_err;
    j["n"] = e.n;
    j["ci95"] = Json::array({e.ci_lo, e.ci_hi});
    j["scheme"] = scheme;
    return j;
}

Json excursion_to_json(const ExcursionResult& r) {
    Json j;
    j["at_eps"] = estimate_to_json(r.at_eps, "wos");
    j["at_half_eps"] = estimate_to_json(r.at_half_eps, "wos");
    j["richardson"] = r.richardson;
    j["richardson_stderr"] = r.richardson_std_err;
    j["epsilon"] = r.epsilon;
    j["resampled"] = r.resampled;
    return j;
}

Json RunManifest::to_json() const {
    Json j;
    j["run_id"] = run_id;
    j["config_hash"] = config_hash;
    j["created_at"] = created_at;
    j["outputs"] = outputs;
    j["status"] = status;
    std::string bitmap(cells_done.size(), '0');
    for (size_t i = 0; i < cells_done.size(); ++i)
        if (cells_done[i]) bitmap[i] = '1';
    j["cells_done"] = bitmap;
    return j;
}

RunManifest RunManifest::from_json(const Json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.status = j.at("status").get<std::string>();
    const std::string bitmap = j.at("cells_done").get<std::string>();
    m.cells_done.assign(bitmap.size(), false);
    for (size_t i = 0; i < bitmap.size(); ++i) m.cells_done[i] = bitmap[i] == '1';
    return m;
}

std::string config_fingerprint(const Json& config_json) {
    const std::string s = config_json.dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string iso8601_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace slelab
