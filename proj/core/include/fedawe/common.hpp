#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace fedawe {

/// A model (or gradient) is a length-d real vector in 64-bit floats.
using ModelVector = Eigen::VectorXd;

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedDynamics : InvalidInput {
    using InvalidInput::InvalidInput;
};

/// Raised when iterates leave the finite range during training. Carries the
/// round at which the blow-up was detected.
struct NumericalDivergence : std::runtime_error {
    int round;
    explicit NumericalDivergence(int r, const std::string& what)
        : std::runtime_error(what + " (round " + std::to_string(r) + ")"), round(r) {}
};

using Rng = std::mt19937_64;

// Distinct RNG streams derived from one master seed. Each (purpose, index)
// pair gets an independent stream so evaluation order never changes draws.
enum class StreamPurpose : std::uint64_t {
    Availability = 1,
    Gradient = 2,
    DataGen = 3,
    Init = 4,
    Mixing = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                                 std::uint64_t index = 0) {
    std::uint64_t s = splitmix64(master ^ (0xA5A5A5A5A5A5A5A5ULL * static_cast<std::uint64_t>(purpose)));
    return splitmix64(s ^ splitmix64(index + 1));
}

inline Rng make_stream(std::uint64_t master, StreamPurpose purpose, std::uint64_t index = 0) {
    return Rng(derive_seed(master, purpose, index));
}

}  // namespace fedawe
