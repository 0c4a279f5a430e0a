// nestlab <task> --input FILE [--seed N] [--eq-tol X] [--budget N] [--json OUT] [--quiet]

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nestlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nestlab: invariant subspace lattices, nest algebras and factorization"};
  app.set_version_flag("--version", std::string(nestlab::cli::kVersion));
  app.require_subcommand(1);

  std::string input;
  std::string json_out;
  bool quiet = false;
  std::uint64_t seed = 0;
  double eq_tol = 0.0;
  int budget = 0;

  const char* descriptions[][2] = {
      {"lat", "compute and classify the invariant projection lattice"},
      {"alg", "the algebra leaving a list of projections invariant"},
      {"hull", "reflexive hull Alg Lat A"},
      {"reflexive", "reflexivity verdict and masa check"},
      {"factorize", "Cholesky factorization along a nest"},
      {"gap", "numerical factorization gap of X in an algebra"},
      {"triangularize", "unitary block upper triangular form"},
      {"halmos", "canonical form of a pair of projections"},
      {"witness", "non-factorization witness for a pair of projections"},
      {"diagnose", "full pipeline with a one-line verdict"},
  };
  for (const auto& d : descriptions) {
    CLI::App* sub = app.add_subcommand(d[0], d[1]);
    sub->add_option("--input,-i", input, "problem file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed (default: params.seed, then NESTLAB_SEED, then 0)");
    sub->add_option("--eq-tol", eq_tol, "equality tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--budget", budget, "random vectors sampled by the lattice search")->check(CLI::NonNegativeNumber);
    sub->add_option("--json", json_out, "write the JSON report here ('-' for stdout)");
    sub->add_flag("--quiet,-q", quiet, "suppress the text report");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nestlab::cli::kValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  nestlab::cli::Overrides ov;
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--eq-tol")) ov.eq_tol = eq_tol;
  if (sub->count("--budget")) ov.budget = budget;

  const auto out = nestlab::cli::run_file(input, sub->get_name(), ov);
  const std::string dumped = nestlab::cli::dump_report(out.report);
  if (json_out == "-") {
    std::cout << dumped;
  } else if (!json_out.empty()) {
    std::ofstream f(json_out, std::ios::binary);
    if (!f) {
      std::cerr << "nestlab: cannot write " << json_out << "\n";
      return nestlab::cli::kValidation;
    }
    f << dumped;
  }
  if (out.exit_code != nestlab::cli::kOk) {
    std::cerr << "nestlab: " << out.text;
  } else if (!quiet && json_out != "-") {
    std::cout << out.text;
  }
  return out.exit_code;
}
