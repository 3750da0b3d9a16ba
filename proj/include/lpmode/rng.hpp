#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lpmode {

// Deterministic generator used throughout the library. All variates are
// derived from mt19937_64 through fixed arithmetic (no std::*_distribution,
// whose output is implementation-defined), so a seed reproduces the same
// stream on every platform and compiler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0,1): centers of 2^53 equal cells.
    double u01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal by inverse transform.
    double normal();

    double exponential(double mean);

    // Shape-scale parameterization; Marsaglia-Tsang for shape >= 1,
    // boosted from shape+1 otherwise.
    double gamma(double shape, double scale);

private:
    std::mt19937_64 engine_;
};

// FNV-1a over the tag bytes, offset basis perturbed by the base seed.
// Used to derive independent per-variable / per-replicate seeds whose
// values do not depend on processing order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

} // namespace lpmode
