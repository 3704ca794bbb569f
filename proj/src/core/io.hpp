#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "loewner.hpp"
#include "measures.hpp"

namespace slelab {

// Ordered keys keep serialized artifacts byte-stable across runs.
using Json = nlohmann::ordered_json;

// Write-then-rename so readers never observe a half-written file.
void save_json_atomic(const std::string& path, const Json& j);
Json load_json(const std::string& path);
void save_text_atomic(const std::string& path, const std::string& text);

// Curve CSV: header `t,re,im`, one vertex per row, %.17g fields.
void write_curve_csv(const std::string& path, const SleCurveSample& sample);
// JSON sidecar stored next to the CSV as `<path>.json`.
void write_curve_sidecar(const std::string& path, const SleCurveSample& sample, uint64_t seed);

Json estimate_to_json(const MeasureEstimate& e, const std::string& scheme);
Json excursion_to_json(const ExcursionResult& r);

struct RunManifest {
    std::string run_id;
    std::string config_hash;
    std::string created_at;
    std::vector<std::string> outputs;
    std::string status = "pending";  // pending | running | done | failed
    std::vector<bool> cells_done;

    Json to_json() const;
    static RunManifest from_json(const Json& j);
};

// FNV-1a over a canonical serialization; used to guard resumes against
// config drift.
std::string config_fingerprint(const Json& config_json);

std::string iso8601_now();

}  // namespace slelab
