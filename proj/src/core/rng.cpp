#include "rng.hpp"

#include <cmath>

namespace slelab {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<uint32_t, 4>& x, const std::array<uint32_t, 2>& k) {
    uint64_t p0 = uint64_t(kPhiloxM0) * x[0];
    uint64_t p1 = uint64_t(kPhiloxM1) * x[2];
    uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

}  // namespace

std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& ctr,
                                   const std::array<uint32_t, 2>& key) {
    std::array<uint32_t, 4> x = ctr;
    std::array<uint32_t, 2> k = key;
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        philox_round(x, k);
    }
    return x;
}

uint64_t derive_stream(uint64_t master_seed, uint64_t a, uint64_t b, uint64_t c) {
    std::array<uint32_t, 4> ctr = {uint32_t(a), uint32_t(a >> 32), uint32_t(b), uint32_t(b >> 32)};
    std::array<uint32_t, 2> key = {uint32_t(master_seed ^ c),
                                   uint32_t((master_seed >> 32) ^ (c >> 32))};
    auto out = philox4x32(ctr, key);
    return (uint64_t(out[0]) << 32) | out[1];
}

RngStream::RngStream(uint64_t master_seed, uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {}

void RngStream::refill() {
    std::array<uint32_t, 4> ctr = {uint32_t(block_), uint32_t(block_ >> 32),
                                   uint32_t(stream_index_), uint32_t(stream_index_ >> 32)};
    std::array<uint32_t, 2> key = {uint32_t(master_seed_), uint32_t(master_seed_ >> 32)};
    buf_ = philox4x32(ctr, key);
    ++block_;
    buf_pos_ = 0;
}

uint32_t RngStream::next_u32() {
    if (buf_pos_ >= 4) refill();
    return buf_[buf_pos_++];
}

uint64_t RngStream::next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double RngStream::uniform01() {
    // 53 random bits, shifted into (0,1) so log() is always safe.
    return (double(next_u64() >> 11) + 0.5) * 0x1p-53;
}

double RngStream::gaussian() {
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double c = std::cos(2.0 * kPi * u2), s = std::sin(2.0 * kPi * u2);
    cached_gauss_ = r * s;
    has_cached_gauss_ = true;
    return r * c;
}

double RngStream::gaussian_dt(double dt) { return gaussian() * std::sqrt(dt); }

}  // namespace slelab
