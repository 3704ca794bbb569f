#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "fitting.hpp"
#include "io.hpp"

namespace slelab {

// One experiment run = a grid of work units reduced into a record. All
// randomness derives from (master_seed, unit tag, replicate id), so results
// do not depend on scheduling or on resume boundaries.
struct ExperimentConfig {
    std::string experiment_id;  // thm1 | thm2 | thm3 | boundary_est |
                                // at_most_half | crosscut_sum | theta_stationary
    double kappa = 4.0;
    std::vector<double> x_values;  // thm1: r; thm2/3: r - s; boundary_est: diam
    double s = 0.5;                // escape circle depth (thm2/3)
    double theta = 0.0;            // two-sided start angle; 0 picks pi/2
    long long replicates = 0;      // per-cell samples; 0 picks the default
    double dt_base = 0.0;          // 0 picks the default
    uint64_t master_seed = 1;
    int instances = 0;   // random-domain count; 0 picks the default
    double t_max = 0.0;  // theta_stationary horizon; 0 picks the default

    static ExperimentConfig defaults(const std::string& id);
    void validate() const;
    Json to_json() const;
    static ExperimentConfig from_json(const Json& j);
};

struct CellResult {
    double x = 0.0;
    long long n = 0;
    long long hits = 0;
    double p_hat = 0.0;
    double std_err = 0.0;
    bool low_stats = false;
};

struct Verdict {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // remaining slack; negative = failed by this much
    std::string detail;   // printable "slope=... target=... tol=..." body
};

struct ExperimentRecord {
    std::string experiment_id;
    ExperimentConfig config;
    std::vector<CellResult> cells;
    bool has_fit = false;
    ExponentFit fit;
    std::vector<Verdict> verdicts;
    double wall_time_s = 0.0;
    std::string code_version;
    std::vector<std::string> notes;

    bool all_pass() const;
    Json to_json() const;
    std::string cells_csv() const;
    std::string verdict_table() const;
};

// Persisted per-unit payloads; lets interrupted runs resume. A store must
// return exactly the JSON it was given.
class UnitStore {
  public:
    virtual ~UnitStore() = default;
    virtual bool load(int unit, Json* out) = 0;
    virtual void save(int unit, const Json& payload) = 0;
};

// One JSON file per unit under dir/.
class DirUnitStore : public UnitStore {
  public:
    explicit DirUnitStore(std::string dir);
    bool load(int unit, Json* out) override;
    void save(int unit, const Json& payload) override;

  private:
    std::string path_for(int unit) const;
    std::string dir_;
    std::mutex mu_;
};

int experiment_unit_count(const ExperimentConfig& cfg);

using ProgressFn = std::function<void(int done, int total)>;

ExperimentRecord run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                                UnitStore* store = nullptr, const ProgressFn& progress = {});

extern const char* kCodeVersion;

}  // namespace slelab
