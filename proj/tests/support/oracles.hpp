#pragma once

// Reference computations that share no code with the solver.

#include <cstdint>
#include <limits>
#include <vector>

#include "sigdet/sigdet.hpp"

namespace sigdet::testing {

/// Minimum exact cost over every history table of `sensor`, found by
/// enumerating whole tables and scoring each with exact_expected_cost.
/// Entries below a stop are irrelevant, so t = 2.. entries are only
/// enumerated for histories whose prefix continued. Returns infinity if the
/// candidate count exceeds `limit`.
inline double exhaustive_best_cost(const Scenario& scenario, const TabularProfile& profile, int sensor,
                                   std::uint64_t limit = 2'000'000) {
  const HistoryShape shape = history_shape(scenario, sensor);
  const int horizon = scenario.horizon();
  const int m = scenario.message_alphabet();

  // Slots in (t, code) order; each slot lists the t-1 slot it extends.
  struct Slot {
    int t;
    std::uint64_t code;
    long parent;
  };
  std::vector<Slot> slots;
  std::vector<std::vector<long>> index(horizon + 1);
  for (int t = 1; t <= horizon; ++t) {
    index[t].assign(shape.code_space(t), -1);
    for (std::uint64_t code = 0; code < shape.code_space(t); ++code) {
      long parent = -1;
      if (t > 1) {
        const PrivateHistory h = shape.decode(sensor, t, code);
        PrivateHistory prefix{sensor, {h.observations.begin(), h.observations.end() - 1},
                              {h.messages.begin(), h.messages.end() - 1}};
        parent = index[t - 1][shape.encode(prefix)];
      }
      index[t][code] = static_cast<long>(slots.size());
      slots.push_back({t, code, parent});
    }
  }

  // Digit d < m stops with d, d == m continues (not allowed at T).
  std::vector<int> digits(slots.size(), 0);
  auto radix = [&](std::size_t s) { return slots[s].t < horizon ? m + 1 : m; };
  auto live = [&](std::size_t s) {
    for (long p = slots[s].parent; p >= 0; p = slots[p].parent) {
      if (digits[p] != m) return false;
    }
    return true;
  };

  TabularProfile candidate = profile;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t visited = 0;
  while (true) {
    if (++visited > limit) return std::numeric_limits<double>::infinity();
    TabularStrategy table(shape);
    for (std::size_t s = 0; s < slots.size(); ++s) {
      table.set(slots[s].t, slots[s].code, digits[s] < m ? Decision::stop(digits[s]) : Decision::blank());
    }
    candidate[sensor] = table;
    best = std::min(best, exact_expected_cost(scenario, candidate).expected_cost);
    // Advance the odometer over live slots only; dead slots stay at 0.
    std::size_t pos = slots.size();
    while (pos > 0) {
      --pos;
      if (!live(pos)) {
        digits[pos] = 0;
        continue;
      }
      if (++digits[pos] < radix(pos)) break;
      digits[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

}  // namespace sigdet::testing
