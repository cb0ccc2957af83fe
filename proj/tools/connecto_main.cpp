#include <iostream>

#include "connecto/cli.hpp"

int main(int argc, char** argv) {
  auto parsed = connecto::cli::parse_args(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == connecto::cli::kExitOk ? std::cout : std::cerr) << parsed.message;
    return parsed.exit_code;
  }
  return connecto::cli::run(*parsed.config, std::cout, std::cerr);
}
