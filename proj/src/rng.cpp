#include "smd/rng.hpp"

namespace smd {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 1))) {}

CounterRng::CounterRng(std::uint64_t key, std::uint64_t counter, int)
    : key_(key), counter_(counter) {}

CounterRng::result_type CounterRng::operator()() {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c * kGolden + 0x632be59bd9b4e019ULL));
}

CounterRng CounterRng::split(std::uint64_t stream) const {
  return CounterRng(mix64(key_ + mix64(stream + 0x2545f4914f6cdd1dULL)), 0, 0);
}

}  // namespace smd
