#include "marsupial/common/seed.hpp"

namespace marsupial {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stage_seed(std::uint64_t run_seed, std::string_view stage, std::uint64_t index) {
  // FNV-1a over the stage name
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(run_seed ^ h) + index);
}

}  // namespace marsupial
