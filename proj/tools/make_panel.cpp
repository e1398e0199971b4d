#include <cstdlib>
#include <iostream>
#include <string>

#include "plflab/synthetic_panel.hpp"

// Usage: plflab_make_panel [seed] [days]
int main(int argc, char** argv) {
  plf::SyntheticPanelOptions opts;
  if (argc > 1) opts.seed = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) opts.days = std::strtoull(argv[2], nullptr, 10);
  std::cout << plf::io::write_panel(plf::synthetic_panel(opts));
  return 0;
}
