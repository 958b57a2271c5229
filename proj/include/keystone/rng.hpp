#pragma once

#include <cstdint>
#include <initializer_list>

namespace keystone {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream addressed by `path` under `master`, e.g.
/// derive_seed(master, {repeat, episode, round}). Independent of the order in
/// which streams are requested.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = mix64(master);
  for (auto part : path) state = mix64(state ^ mix64(part + 0x632be59bd9b4e019ULL));
  return state;
}

}  // namespace keystone
