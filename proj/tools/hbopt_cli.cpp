#include "hbopt/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const hbopt::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hbopt::kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed config: " << e.what() << '\n';
    return hbopt::kExitInvalid;
  } catch (const hbopt::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return hbopt::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return hbopt::kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-momentum proximal schemes under quadratic growth"};
  app.require_subcommand(1);

  hbopt::CertifyArgs cert;
  double kappa = 0.0, lip = 0.0, mu = 0.0, theta = 0.0;
  std::string regime;
  auto* certify = app.add_subcommand("certify", "Certified momentum and contraction rate");
  auto* o_kappa = certify->add_option("--kappa", kappa, "mu / L");
  auto* o_lip = certify->add_option("--L", lip, "Lipschitz constant of grad f");
  auto* o_mu = certify->add_option("--mu", mu, "quadratic growth modulus");
  auto* o_theta = certify->add_option("--theta", theta, "overestimated momentum gap, alpha = 1 - theta");
  auto* o_regime = certify->add_option("--regime", regime, "thm1 | cor1 | cor2")
                       ->check(CLI::IsMember({"thm1", "cor1", "cor2"}));
  certify->add_option("--eps", cert.eps, "relative accuracy for the iteration estimate");
  o_kappa->excludes(o_lip)->excludes(o_mu);

  std::string config_path;
  auto add_config_cmd = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
    return sub;
  };
  auto* run = add_config_cmd("run", "Run schemes and write traces");
  auto* compare = add_config_cmd("compare", "Compare schemes: iterations to accuracy and rates");
  auto* validate = add_config_cmd("validate", "Check Lyapunov and bound inequalities on runs");
  auto* ode = add_config_cmd("ode", "Integrate the heavy-ball ODE and check its envelopes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hbopt::kExitInvalid;
  }

  if (certify->parsed()) {
    if (*o_kappa) cert.kappa = kappa;
    if (*o_lip) cert.lipschitz = lip;
    if (*o_mu) cert.mu = mu;
    if (*o_theta) cert.theta = theta;
    if (*o_regime) cert.regime = regime;
    return guarded([&] { return hbopt::cmd_certify(cert, std::cout, std::cerr); });
  }
  return guarded([&] {
    const hbopt::ExperimentConfig cfg = hbopt::load_experiment(config_path);
    if (run->parsed()) return hbopt::cmd_run(cfg, std::cout, std::cerr);
    if (compare->parsed()) return hbopt::cmd_compare(cfg, std::cout, std::cerr);
    if (validate->parsed()) return hbopt::cmd_validate(cfg, std::cout, std::cerr);
    if (ode->parsed()) return hbopt::cmd_ode(cfg, std::cout, std::cerr);
    return hbopt::kExitInvalid;
  });
}
