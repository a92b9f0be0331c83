#include "commands.hpp"

#include "markerlab/perturbation.hpp"

#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  using namespace markerlab::cli;
  if (const char* env = std::getenv("MARKERLAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n < 1) throw std::invalid_argument(env);
      omp_set_num_threads(n);
    } catch (const std::logic_error&) {
      std::cerr << "MARKERLAB_THREADS: expected a positive integer, got '" << env << "'\n";
      return Usage;
    }
  }

  CLI::App app{"markerlab: marker hierarchies, measure flows and finite-volume Gibbs experiments"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Key-value config file; flags override its values");
  app.fallthrough();
  int status = Ok;
  register_commands(app, status);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : Usage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const markerlab::FlowRefusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return Budget;
  } catch (const std::length_error& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return Budget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return InvariantFailure;
  }
  return status;
}
