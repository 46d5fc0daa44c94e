// spoints: batch front end.
//
//   spoints all --config run.cfg --out results
//
// Exit codes: 0 success, 1 convention violated, 2 input error, 3 numerical failure.

#include "spoint/config.hpp"
#include "spoint/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace {

std::vector<int> parse_orders(const std::string& s) {
  std::vector<int> out;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw spoint::InputError("--m expects a comma-separated list of orders, got '" + s + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-energy s-point detection for Schrodinger potentials"};
  app.require_subcommand(1);

  std::string config_path, out_dir, orders, alpha_range;
  int n = 0;
  bool allow_critical = false;
  app.add_option("--config", config_path, "Run configuration file")->required();
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--n", n, "Lattice cells per axis");
  app.add_option("--m", orders, "Comma-separated s-point orders, e.g. 1,2");
  app.add_option("--alpha-range", alpha_range, "Coupling sweep A:B:STEP");
  app.add_flag("--allow-critical", allow_critical, "Let the sweep cross critical couplings");

  const std::pair<const char*, const char*> commands[] = {
      {"convention", "Invertibility of I + K and the s-wave slope"},
      {"scan", "Scan a box for s-points of the requested orders"},
      {"radial", "Bound-state counts, Kram sum rules, s-spheres and Psi for radial potentials"},
      {"levinson", "Phase shifts and the Levinson index"},
      {"sweep", "Coupling sweep of counts and s-sphere radii"},
      {"all", "Every stage that applies to the potential"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(spoint::ExitCode::kInputError);
  }

  try {
    const spoint::Command cmd = spoint::parse_command(app.get_subcommands().front()->get_name());
    spoint::RunConfig cfg = spoint::load_config(config_path);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (n != 0) cfg.n = n;
    if (!orders.empty()) cfg.orders = parse_orders(orders);
    if (!alpha_range.empty()) cfg.alpha_range = spoint::parse_alpha_range(alpha_range);
    if (allow_critical) cfg.allow_critical = true;

    const spoint::RunResult r = spoint::run_pipeline(cmd, cfg);
    std::cout << spoint::to_string(cmd) << ": exit " << static_cast<int>(r.code);
    if (!r.message.empty()) std::cout << " (" << r.message << ')';
    std::cout << "\nreport: " << (cfg.out / "report.json").string() << '\n';
    return static_cast<int>(r.code);
  } catch (const spoint::Error& e) {
    std::cerr << "spoints: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  }
}
