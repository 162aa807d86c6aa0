// Runs every algorithm on the adversarial triangle instance and prints op counts.
// usage: triangle_gap [m]

#include <cstdlib>
#include <iostream>

#include "wcoj/wcoj.hpp"

int main(int argc, char** argv) {
  const std::uint64_t m = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 64;
  auto bundle = wcoj::gen_triangle_bad(m);
  std::cout << "m=" << m << " N=" << wcoj::input_size(bundle.query) << " expected=" << bundle.expected_output.value_or(0) << "\n";
  for (std::string algo : {"nprr", "leapfrog", "two-choices", "pairwise:0", "pairwise:1", "pairwise:2", "agm-plan"}) {
    auto r = wcoj::run_algorithm(algo, bundle.query);
    std::cout << algo << ": rows=" << r.output.size() << " ops=" << r.ops()
              << " intermediate_max=" << r.intermediate_max() << "\n";
  }
}
