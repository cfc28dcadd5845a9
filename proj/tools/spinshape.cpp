#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "spinshape/cli.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kSolver = 3, kVerify = 4 };

int threads_from_env() {
  const char* v = std::getenv("SPINSHAPE_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  try {
    const int n = std::stoi(v);
    if (n < 1) throw std::invalid_argument("nonpositive");
    return n;
  } catch (const std::exception&) {
    throw spinshape::ConfigError("SPINSHAPE_THREADS", "must be a positive integer");
  }
}

struct Overrides {
  std::string config_file;
  std::optional<double> gamma, beta, lambda, half_width, tol;
  std::optional<int> points, k_levels;
  std::optional<std::string> scheme, format, out_dir;
  bool plus = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "JSON configuration file");
  cmd->add_option("--gamma", o.gamma, "superpotential strength");
  cmd->add_option("--beta", o.beta, "constant field strength");
  cmd->add_option("--lambda", o.lambda, "amplitude of the 1/cosh field profile");
  cmd->add_option("--grid.half-width", o.half_width, "box half width L");
  cmd->add_option("--grid.points", o.points, "number of grid nodes N (>= 16)");
  cmd->add_option("--solver.k-levels", o.k_levels, "eigenvalues to compute per sector");
  cmd->add_option("--solver.tol", o.tol, "relative bisection tolerance");
  cmd->add_option("--solver.scheme", o.scheme, "factorized or direct");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--format", o.format, "csv or json");
}

spinshape::RunConfig resolve(const Overrides& o) {
  spinshape::RunConfig c;
  c.threads = threads_from_env();
  if (!o.config_file.empty()) c = spinshape::load_config(o.config_file, c);
  if (o.gamma) c.gamma = *o.gamma;
  if (o.beta) c.beta = *o.beta;
  if (o.lambda) c.lambda = *o.lambda;
  if (o.half_width) c.half_width = *o.half_width;
  if (o.points) c.points = *o.points;
  if (o.k_levels) c.k_levels = *o.k_levels;
  if (o.tol) c.tol = *o.tol;
  if (o.scheme) c.scheme = spinshape::parse_scheme(*o.scheme);
  if (o.format) c.format = spinshape::parse_format(*o.format);
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.plus) c.plus_sector = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra and states of a spin-1/2 particle in a shape-invariant field"};
  app.require_subcommand(1);

  Overrides levels_o, spectrum_o, verify_o, wave_o;
  auto* levels = app.add_subcommand("levels", "closed-form levels and continuum threshold");
  add_common(levels, levels_o);

  auto* spectrum = app.add_subcommand("spectrum", "numerical spectrum of the partner Hamiltonians");
  add_common(spectrum, spectrum_o);
  spectrum->add_flag("--plus", spectrum_o.plus, "also list the H+ eigenvalues");

  auto* verify = app.add_subcommand("verify", "run the verification suite, print a JSON verdict");
  add_common(verify, verify_o);
  bool typo = false;
  verify->add_flag("--typo-constant", typo, "sabotage: use the misprinted constant in the direct scheme's potential");

  auto* wave = app.add_subcommand("wavefunction", "write the two states of a level");
  add_common(wave, wave_o);
  int level = 0;
  std::string member = "both";
  bool gnuplot = false;
  wave->add_option("--level,-n", level, "level index");
  wave->add_option("--member", member, "1, 2 or both")->check(CLI::IsMember({"1", "2", "both"}));
  wave->add_flag("--gnuplot", gnuplot, "also write a gnuplot script per file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*levels) {
      spinshape::cmd_levels(resolve(levels_o), std::cout);
    } else if (*spectrum) {
      spinshape::cmd_spectrum(resolve(spectrum_o), std::cout);
    } else if (*verify) {
      spinshape::VerifyOptions vo;
      vo.typo_constant = typo;
      const auto report = spinshape::cmd_verify(resolve(verify_o), std::cout, vo);
      if (!report.passed()) {
        for (const auto& c : report.checks)
          if (!c.passed) std::cerr << "FAILED " << c.name << ": " << c.detail << '\n';
        return kVerify;
      }
    } else if (*wave) {
      const int m = member == "both" ? 0 : std::stoi(member);
      spinshape::cmd_wavefunction(resolve(wave_o), level, m, gnuplot, std::cout);
    }
  } catch (const spinshape::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const spinshape::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const spinshape::Error& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}
