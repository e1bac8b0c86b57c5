#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace whisker {

// Seed splitting: every stochastic stage derives its seed from a parent seed
// and a path of tags, so any single cell can be regenerated in isolation.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t tag_of(std::string_view text);
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path);

} // namespace whisker
