// Prints a [calibration] section re-derived from the calibration radii of a config.
#include "triwell/experiments.hpp"

#include <iostream>

int main(int argc, char **argv) {
  if (argc < 2) {
    std::cerr << "usage: triwell-calibrate <config>\n";
    return 64;
  }
  try {
    const auto cfg = triwell::cli::RunConfig::load(argv[1]);
    const auto j = triwell::cli::calibrate(cfg);
    std::cerr << j.dump(2) << "\n";
    std::cout << "[calibration]\n";
    for (const char *k : {"upper_C", "upper_c", "slice_c", "final_c", "final_C", "tail_C", "tail_c", "split_C", "split_c"})
      std::cout << k << " = " << triwell::io::num(j[k].get<double>()) << "\n";
  } catch (const triwell::cli::ConfigError &e) {
    std::cerr << e.what() << "\n";
    return 65;
  } catch (const std::exception &e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
