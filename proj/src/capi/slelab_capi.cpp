#include "slelab.h"

#include <cstring>
#include <string>

#include "core/errors.hpp"
#include "core/experiments.hpp"
#include "core/io.hpp"
#include "core/loewner.hpp"

using namespace slelab;

struct slelab_curve {
    SleCurveSample sample;
    uint64_t seed = 0;
};

struct slelab_experiment {
    ExperimentRecord record;
    std::string record_json;
    std::string verdicts;
};

namespace {

thread_local std::string g_last_error;

slelab_status to_status(const SlelabError& e) {
    g_last_error = e.what();
    switch (e.code()) {
        case ErrorCode::InvalidArgument:
            return SLELAB_ERR_INVALID;
        case ErrorCode::NumericFailure:
            return SLELAB_ERR_NUMERIC;
        case ErrorCode::Partial:
            return SLELAB_ERR_PARTIAL;
        case ErrorCode::Io:
            return SLELAB_ERR_IO;
    }
    return SLELAB_ERR_INVALID;
}

template <typename Fn>
slelab_status guarded(Fn&& fn) {
    try {
        fn();
        return SLELAB_OK;
    } catch (const SlelabError& e) {
        return to_status(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SLELAB_ERR_NUMERIC;
    }
}

}  // namespace

extern "C" {

const char* slelab_version(void) { return kCodeVersion; }

const char* slelab_last_error(void) { return g_last_error.c_str(); }

slelab_status slelab_curve_sample(const char* kind, double kappa, double theta, double dt_base,
                                  double stop, uint64_t seed, slelab_curve** out) {
    if (!kind || !out) {
        g_last_error = "null argument";
        return SLELAB_ERR_INVALID;
    }
    *out = nullptr;
    return guarded([&] {
        RngStream rng(seed, 0);
        SleCurveSample s;
        const std::string k = kind;
        if (k == "chordal") {
            s = sample_chordal(kappa, dt_base, stop, rng);
        } else if (k == "radial") {
            s = sample_radial(kappa, dt_base, stop, rng);
        } else if (k == "two_sided_radial") {
            s = sample_two_sided_radial(kappa, theta, dt_base, stop, rng);
        } else {
            fail_invalid("unknown curve kind '" + k + "'");
        }
        auto* c = new slelab_curve{std::move(s), seed};
        *out = c;
    });
}

size_t slelab_curve_size(const slelab_curve* c) {
    return c ? c->sample.curve.points.size() : 0;
}

slelab_status slelab_curve_point(const slelab_curve* c, size_t i, double* t, double* re,
                                 double* im) {
    if (!c || i >= c->sample.curve.points.size()) {
        g_last_error = "curve index out of range";
        return SLELAB_ERR_INVALID;
    }
    if (t) *t = c->sample.curve.times[i];
    if (re) *re = c->sample.curve.points[i].real();
    if (im) *im = c->sample.curve.points[i].imag();
    return SLELAB_OK;
}

slelab_status slelab_curve_write_csv(const slelab_curve* c, const char* path) {
    if (!c || !path) {
        g_last_error = "null argument";
        return SLELAB_ERR_INVALID;
    }
    return guarded([&] {
        write_curve_csv(path, c->sample);
        write_curve_sidecar(path, c->sample, c->seed);
    });
}

void slelab_curve_free(slelab_curve* c) { delete c; }

slelab_status slelab_experiment_run(const char* config_json, int jobs, slelab_experiment** out) {
    if (!config_json || !out) {
        g_last_error = "null argument";
        return SLELAB_ERR_INVALID;
    }
    *out = nullptr;
    return guarded([&] {
        Json j;
        try {
            j = Json::parse(config_json);
        } catch (const std::exception& e) {
            fail_invalid(std::string("config JSON parse error: ") + e.what());
        }
        const ExperimentConfig cfg = ExperimentConfig::from_json(j);
        auto* e = new slelab_experiment;
        try {
            e->record = run_experiment(cfg, jobs > 0 ? jobs : 1);
            e->record_json = e->record.to_json().dump(2);
            e->verdicts = e->record.verdict_table();
        } catch (...) {
            delete e;
            throw;
        }
        *out = e;
    });
}

const char* slelab_experiment_record_json(const slelab_experiment* e) {
    return e ? e->record_json.c_str() : "";
}

const char* slelab_experiment_verdicts(const slelab_experiment* e) {
    return e ? e->verdicts.c_str() : "";
}

int slelab_experiment_all_pass(const slelab_experiment* e) {
    return e && e->record.all_pass() ? 1 : 0;
}

void slelab_experiment_free(slelab_experiment* e) { delete e; }

}  // extern "C"
