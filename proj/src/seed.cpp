#include "simsize/seed.hpp"

namespace simsize {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SeedStream SeedStream::child(std::string_view label,
                             std::uint64_t index) const {
  SeedStream out = *this;
  out.path_.emplace_back(std::string(label), index);
  return out;
}

std::uint64_t SeedStream::key() const {
  std::uint64_t h = splitmix64(master_seed_);
  for (const auto& [label, index] : path_) {
    h = splitmix64(h ^ fnv1a64(label));
    h = splitmix64(h ^ index);
  }
  return h;
}

std::string SeedStream::describe() const {
  std::string out = std::to_string(master_seed_);
  for (const auto& [label, index] : path_) {
    out += "/" + label + ":" + std::to_string(index);
  }
  return out;
}

}  // namespace simsize
