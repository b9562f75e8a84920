#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hyperbolax/constants.hpp"
#include "hyperbolax/regions.hpp"

namespace {

int run_regions(const std::string& out_path, int d, double N, double r) {
  hyperbolax::LatticeConfig cfg(d);
  auto dump = [&](std::ostream& os) {
    hyperbolax::dump_regions(os, cfg, hyperbolax::Dyadic::from_double(N),
                             hyperbolax::Dyadic::from_double(r));
  };
  if (out_path == "-") {
    dump(std::cout);
  } else {
    std::ofstream os(out_path);
    if (!os) throw hyperbolax::ValidationError("cannot open " + out_path);
    dump(os);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolax: dyadic decomposition toolkit for the hyperboloid"};
  app.require_subcommand(1);

  auto* regions = app.add_subcommand("regions", "enumerate a dyadic lattice");
  std::string out_path = "-";
  int d = 3;
  double N = 1.0, r = 1.0;
  regions->add_option("-o,--output", out_path, "output path, - for stdout");
  regions->add_option("-d,--dimension", d, "hyperboloid dimension");
  regions->add_option("-N,--frequency", N, "dyadic frequency");
  regions->add_option("-r,--scale", r, "dyadic scale");

  CLI11_PARSE(app, argc, argv);

  try {
    if (regions->parsed()) return run_regions(out_path, d, N, r);
  } catch (const hyperbolax::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const hyperbolax::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
