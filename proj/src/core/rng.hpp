#pragma once

#include <array>
#include <cstdint>

#include "complexutil.hpp"

namespace slelab {

// Philox4x32-10 block function.  Counter-based: the j-th block of a stream is
// a pure function of (key, stream, j), so streams can be split arbitrarily
// and replicates stay reproducible regardless of scheduling.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& ctr,
                                   const std::array<uint32_t, 2>& key);

// Collapse an id tuple into a 64-bit stream index (one Philox evaluation).
uint64_t derive_stream(uint64_t master_seed, uint64_t a, uint64_t b = 0, uint64_t c = 0);

class RngStream {
public:
    RngStream(uint64_t master_seed, uint64_t stream_index);

    uint64_t master_seed() const { return master_seed_; }
    uint64_t stream_index() const { return stream_index_; }

    uint32_t next_u32();
    uint64_t next_u64();
    double uniform01();   // open interval (0,1)
    double gaussian();    // standard normal, Box-Muller
    // N(0, dt) increment.
    double gaussian_dt(double dt);

private:
    void refill();

    uint64_t master_seed_;
    uint64_t stream_index_;
    uint64_t block_ = 0;
    std::array<uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_ = false;
};

}  // namespace slelab
