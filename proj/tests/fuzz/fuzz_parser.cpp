#include <cstdio>
#include <cstdlib>

#include "fuzz/parser_fuzz.hpp"

// Usage: fuzz_parser [seconds] [seed]
int main(int argc, char** argv) {
  using namespace groupblame::fuzz;
  double seconds = argc > 1 ? std::atof(argv[1]) : fuzz_seconds(600);
  std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  auto stats = run_parser_fuzz(seconds, seed, GROUPBLAME_ERROR_CORPUS);
  std::printf("inputs=%llu parsed=%llu failures=%zu\n", static_cast<unsigned long long>(stats.inputs),
              static_cast<unsigned long long>(stats.parsed), stats.failures.size());
  for (const auto& f : stats.failures) std::printf("%s\n\n", f.c_str());
  return stats.ok() ? 0 : 1;
}
