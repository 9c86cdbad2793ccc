// Command-line front end: runs the reproduction scenarios and writes one CSV
// and one JSON summary per command. Exit codes: 0 all checks pass, 1 a check
// failed, 2 usage or configuration error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cvseq/emit.hpp"
#include "cvseq/scenarios.hpp"

namespace {

struct CommonOpts {
  std::string out_dir = "out";
};

int finish(const cvseq::ScenarioResult& res, const CommonOpts& common) {
  namespace fs = std::filesystem;
  fs::path base = fs::path(common.out_dir);
  cvseq::write_file_atomic(base / (res.name + ".csv"), res.csv);
  cvseq::write_file_atomic(base / (res.name + ".json"), res.summary.dump(2) + "\n");
  if (res.summary.contains("checks"))
    for (const auto& c : res.summary["checks"])
      std::cout << (c["pass"].get<bool>() ? "[ ok ] " : "[FAIL] ")
                << c["name"].get<std::string>() << " (value "
                << c["value"].get<double>() << ")\n";
  std::cout << res.name << ": " << (res.pass ? "PASS" : "FAIL") << " -> "
            << (base / (res.name + ".csv")).string() << ", "
            << (base / (res.name + ".json")).string() << "\n";
  return res.pass ? 0 : 1;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cvseq: six-mode cluster-state gate-sequence simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "flat key=value config file; flags override");

  CommonOpts common;
  app.add_option("--out", common.out_dir, "output directory")->capture_default_str();

  double cluster_db = -4.0;
  double beta_db = -4.0;
  double gate_db = -12.0;
  double modulation_db = 15.0;
  std::string beta_list = "vacuum,-4,-12";
  std::string cluster_list = "-4,-6";
  std::string beta_list8 = "vacuum,-4";
  double gate_min = -12.0, gate_max = 0.0, gate_step = 0.5;
  bool default_loss = false;
  double eta_source = 1.0, eta_detector = 1.0, jitter_deg = 0.0;
  std::uint64_t shots = 1000000, seed = 1;
  int threads = 1;

  auto* sc_cluster = app.add_subcommand("cluster-verify", "network and nullifier checks");
  sc_cluster->add_option("--cluster-db", cluster_db, "resource squeezing in dB (<= 0)")
      ->capture_default_str();

  auto* sc_fig2 = app.add_subcommand("figure2", "nullifier variances relative to SNL");
  sc_fig2->add_option("--cluster-db", cluster_db)->capture_default_str();

  auto* sc_fig4 = app.add_subcommand("figure4", "entanglement degree vs gate squeezing");
  sc_fig4->add_option("--beta", beta_list, "comma list: vacuum or dB values")
      ->capture_default_str();
  sc_fig4->add_option("--cluster", cluster_list, "comma list of cluster dB values")
      ->capture_default_str();
  sc_fig4->add_option("--gate-min", gate_min)->capture_default_str();
  sc_fig4->add_option("--gate-max", gate_max)->capture_default_str();
  sc_fig4->add_option("--gate-step", gate_step)->capture_default_str();

  auto* sc_fig5 = app.add_subcommand("figure5", "output noise with squeezed control input");
  sc_fig5->add_option("--cluster-db", cluster_db)->capture_default_str();
  sc_fig5->add_option("--beta-db", beta_db)->capture_default_str();
  sc_fig5->add_option("--gate-db", gate_db)->capture_default_str();

  auto* sc_fig6 = app.add_subcommand("figure6", "coherent-signal propagation panels");
  sc_fig6->add_option("--cluster-db", cluster_db)->capture_default_str();
  sc_fig6->add_option("--gate-db", gate_db)->capture_default_str();
  sc_fig6->add_option("--modulation-db", modulation_db)->capture_default_str();

  auto* sc_fig8 = app.add_subcommand("figure8", "fidelity vs gate squeezing");
  sc_fig8->add_option("--cluster-db", cluster_db)->capture_default_str();
  sc_fig8->add_option("--beta", beta_list8, "comma list: vacuum or dB values")
      ->capture_default_str();

  auto* sc_table1 = app.add_subcommand("table1", "gain, entanglement and fidelity table");
  sc_table1->add_option("--cluster-db", cluster_db)->capture_default_str();
  sc_table1->add_flag("--default-loss", default_loss,
                      "apply the default per-beam efficiency 0.96*0.95*0.99");
  sc_table1->add_option("--eta-source", eta_source, "per squeezed-beam efficiency")
      ->capture_default_str();
  sc_table1->add_option("--eta-detector", eta_detector, "per detected-mode efficiency")
      ->capture_default_str();
  sc_table1->add_option("--jitter-deg", jitter_deg, "phase jitter sd in degrees")
      ->capture_default_str();

  auto* sc_mc = app.add_subcommand("mc-validate", "shot-sampling oracle vs analytic engine");
  sc_mc->add_option("--shots", shots)->capture_default_str();
  sc_mc->add_option("--seed", seed)->capture_default_str();
  sc_mc->add_option("--threads", threads)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sc_cluster) return finish(cvseq::scenario_cluster_verify(cluster_db), common);
    if (*sc_fig2) return finish(cvseq::scenario_figure2(cluster_db), common);
    if (*sc_fig4) {
      std::vector<double> clusters;
      for (const auto& t : split_list(cluster_list)) clusters.push_back(std::stod(t));
      return finish(cvseq::scenario_figure4(split_list(beta_list), clusters,
                                            gate_min, gate_max, gate_step),
                    common);
    }
    if (*sc_fig5) return finish(cvseq::scenario_figure5(cluster_db, beta_db, gate_db), common);
    if (*sc_fig6) return finish(cvseq::scenario_figure6(cluster_db, gate_db, modulation_db), common);
    if (*sc_fig8) return finish(cvseq::scenario_figure8(cluster_db, split_list(beta_list8)), common);
    if (*sc_table1) {
      cvseq::ImperfectionSpec imp;
      if (default_loss) imp = cvseq::ImperfectionSpec::default_loss();
      if (eta_source < 1.0) imp.source_efficiency = eta_source;
      if (eta_detector < 1.0) imp.detector_efficiency = eta_detector;
      if (jitter_deg > 0.0) {
        imp.phase_jitter_sd = jitter_deg * M_PI / 180.0;
        imp.analytic_jitter = true;
      }
      return finish(cvseq::scenario_table1(cluster_db, imp), common);
    }
    if (*sc_mc) return finish(cvseq::scenario_mc_validate(shots, seed, threads), common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (...) {
    std::cerr << "error: unknown failure\n";
    return 2;
  }
  return 2;
}
