#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>

namespace wgdet {

/// Checks the library invariants on randomized inputs drawn from `seed` and
/// prints one PASS/FAIL line per check. Returns the number of failures.
std::size_t run_selftest(std::ostream& out, std::uint64_t seed = 0, std::size_t threads = 0);

}  // namespace wgdet
