#include <cstring>
#include <iostream>

#include "ostore/acceptance.hpp"

int main(int argc, char** argv) {
  ostore::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      opt.quick = true;
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      opt.only.push_back(argv[++i]);
    }
  }
  auto results = ostore::run_acceptance(opt, std::cout);
  for (const auto& r : results) {
    if (!r.pass && !r.informational) return 1;
  }
  return 0;
}
