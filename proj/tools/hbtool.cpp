#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "hb/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Computations in de Branges-Rovnyak spaces H(b)"};
  app.require_subcommand(1, 1);
  hb::JobSpec job;
  std::string degrees, point;
  const std::map<std::string, std::string> about = {
      {"mate", "Pythagorean mate a and its boundary nodes"},
      {"decompose", "rational or Clark splitting of f"},
      {"norm", "H(b) norm of f"},
      {"kernel", "reproducing kernel at --point"},
      {"e0", "boundary points where cyclicity can fail"},
      {"clark-atoms", "atoms and weights of the Clark measure"},
      {"cyclic-check", "necessary conditions and sufficient tests"},
      {"certify", "residuals dist(1, p_n f) over --degrees"},
      {"witness", "distance floor for a non-cyclic f"},
  };
  for (const auto& name : hb::commands()) {
    auto it = about.find(name);
    CLI::App* sub = app.add_subcommand(name, it == about.end() ? "" : it->second);
    sub->add_option("--b", job.b, "symbol: inline JSON or file");
    sub->add_option("--f", job.f, "function: inline JSON or file");
    sub->add_option("--grid", job.grid, "quadrature size M (power of two)");
    sub->add_option("--taylor", job.taylor, "Taylor truncation D");
    sub->add_option("--clark-n", job.clark_n, "Clark truncation N (2N+1 atoms)");
    sub->add_option("--degrees", degrees, "a..b[:step] or a,b,c");
    sub->add_option("--tol", job.tol, "truncation tail tolerance");
    sub->add_option("--point", point, "re,im");
    sub->add_flag("--timing", job.timing, "measure wall_ms per degree");
    sub->add_option("--out", job.out, "output path");
    sub->add_option("--format", job.format, "json or csv");
  }
  CLI11_PARSE(app, argc, argv);
  job.command = app.get_subcommands().front()->get_name();
  try {
    if (!degrees.empty()) job.degrees = hb::parse_degrees(degrees);
    if (!point.empty()) job.point = hb::parse_point(point);
  } catch (const hb::Error& e) {
    nlohmann::json d = {{"schema", hb::kSchema}, {"command", job.command},
                         {"error", {{"code", std::string(hb::errc_name(e.code()))}, {"message", e.what()}}}};
    std::cerr << d.dump(2) << "\n";
    return 1;
  }
  return hb::run(job, std::cout, std::cerr);
}
