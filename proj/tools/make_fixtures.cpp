#include <iostream>

#include "fixture_gen.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixtures <data-dir> <out-dir>\n";
    return 1;
  }
  try {
    for (const auto& rel : modgate::fixtures::write_all(argv[1], argv[2])) {
      std::cout << rel << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
