#pragma once

#include <cstdint>

namespace diolab {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless generator: the k-th draw of stream (seed, index) is a pure
// function of the triple, so any partition of the indices over threads
// produces the same numbers.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t index)
        : key_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) ^ splitmix64(index * 0xd1342543de82ef95ULL + 1)) {}

    std::uint64_t next() { return splitmix64(key_ + splitmix64(counter_++)); }

    // uniform on [0, 1) with 53 random bits
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace diolab
