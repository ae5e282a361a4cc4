#pragma once

// Shapley values by brute force: the average marginal contribution over
// every ordering of the agents. Independent of the closed-form weights.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace groupblame::testing {

inline std::vector<double> shapley_by_orderings(std::size_t agents,
                                                const std::function<double(std::uint64_t)>& v) {
  std::vector<std::size_t> order(agents);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> total(agents, 0.0);
  double count = 0;
  do {
    std::uint64_t mask = 0;
    double prev = v(0);
    for (std::size_t a : order) {
      mask |= std::uint64_t{1} << a;
      double cur = v(mask);
      total[a] += cur - prev;
      prev = cur;
    }
    count += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& t : total) t /= count;
  return total;
}

}  // namespace groupblame::testing
