#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qcflow {

using Rng = std::mt19937_64;

/// Independent generator for the named substream `name`/`index` of a run seed.
/// Streams depend only on their arguments, never on the order in which they are created.
Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

}  // namespace qcflow
