#pragma once

// Counter-based pseudo-random streams.
//
// A stream is identified by a 64-bit key; the i-th draw is a pure function of
// (key, i). Streams are therefore prefix-stable (the first k draws do not
// depend on how many are requested) and trivially splittable across workers.

#include <cstdint>
#include <string_view>

namespace overpen {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace detail

constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

/// Derives a child key from a parent key and a tag. Distinct tags give
/// statistically independent child streams.
constexpr std::uint64_t split_seed(std::uint64_t parent, std::uint64_t tag) noexcept
{
  return detail::mix64(detail::mix64(parent + golden_gamma) ^ (tag * golden_gamma + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t split_seed(std::uint64_t parent, std::string_view tag) noexcept
{
  return split_seed(parent, detail::fnv1a(tag));
}

class CounterStream
{
public:
  constexpr explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept
  {
    return detail::mix64(detail::mix64(key_ ^ (counter * golden_gamma)) + counter);
  }

  /// Uniform draw in the open interval (0, 1).
  constexpr double uniform(std::uint64_t counter) const noexcept
  {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

private:
  std::uint64_t key_;
};

} // namespace overpen
