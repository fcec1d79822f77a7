// mhdelay: simulate / analyze / sweep / provision / selftest
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mhdelay/mhdelay.hpp"
#include "mhdelay/selftest.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { ok = 0, config_error = 1, infeasible = 2, selftest_failed = 3, runtime_error = 4 };

struct Options {
  std::string config;
  std::string out = "out";
  std::size_t workers = mhd::default_workers();
  std::vector<std::string> overrides;
  std::size_t realizations = 0;
  std::string hops = "2..7";
  std::size_t traces = 1;
  std::size_t walks = 200;
  std::size_t samples = 20000;
};

struct Run {
  std::string command;
  fs::path out;
  std::vector<mhd::io::Artifact> artifacts;
  json timing = json::object();

  void write(const std::string& name, const std::string& content) {
    artifacts.push_back(mhd::io::write_atomic(out / name, content));
  }
};

// A manifest written by an earlier run can stand in for the config file.
mhd::RunConfig load(const Options& o) {
  if (o.config.empty()) throw mhd::ConfigError("--config is required");
  std::vector<std::string> ov = o.overrides;
  if (o.realizations) ov.push_back("scenario.realizations=" + std::to_string(o.realizations));
  if (fs::path(o.config).extension() == ".json") {
    std::ifstream f(o.config);
    if (!f) throw mhd::ConfigError("cannot open manifest '" + o.config + "'");
    json m = json::parse(f, nullptr, false);
    if (m.is_discarded() || !m.contains("resolved_config"))
      throw mhd::ConfigError("'" + o.config + "' is not a run manifest");
    return mhd::parse_config_text(m["resolved_config"].get<std::string>(), ov);
  }
  return mhd::parse_config(o.config, ov);
}

void manifest(Run& run, const mhd::RunConfig* rc, const Options& o) {
  json m;
  m["command"] = run.command;
  m["workers"] = o.workers;
  if (rc) {
    m["resolved_config"] = mhd::to_config_text(*rc);
    m["master_seed"] = rc->scenario.master_seed;
    m["seed_derivation"] = "derive_seed(master_seed, realization, tag, hop) with tags traffic/channel";
  }
  m["artifacts"] = json::array();
  for (const auto& a : run.artifacts)
    m["artifacts"].push_back({{"name", a.name}, {"fnv1a64", a.checksum}, {"bytes", a.bytes}});
  m["timing_seconds"] = run.timing;
  mhd::io::write_atomic(run.out / "run_manifest.json", m.dump(2) + "\n");
}

json timing_of(const mhd::ComparisonReport& r) {
  json t;
  t["simulation"] = r.wall_time_simulation;
  t["analysis"] = r.wall_time_analysis;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json x{{"wb", row.wb}, {"wall_time", row.solution.wall_time}};
    if (row.uncapped) x["wall_time_uncapped"] = row.uncapped->wall_time;
    rows.push_back(x);
  }
  t["solver"] = rows;
  return t;
}

void print_report(const mhd::ComparisonReport& r) {
  std::cout << r.id << " (" << r.hops << " hops, " << r.realizations << " realizations, " << r.censored
            << " censored)\n";
  for (const auto& row : r.rows)
    std::cout << "  wb=" << row.wb_ms << "ms  empirical=" << row.empirical << "  bound=" << row.bound
              << "  theta=" << row.solution.theta << "  mr=" << row.occurrence.mr
              << (row.dominates ? "" : "  [NOT DOMINATING]") << "\n";
  std::cout << "  rmse=" << r.rmse << "  max_deviation=" << r.max_deviation << "\n";
}

void write_report(Run& run, const mhd::ComparisonReport& r, const std::string& suffix) {
  run.write("results" + suffix + ".csv", mhd::io::results_header() + mhd::io::results_rows(r));
  run.write("solver" + suffix + ".csv", mhd::io::solver_header() + mhd::io::solver_rows(r));
  run.write("detail" + suffix + ".csv", mhd::io::detail_csv(r));
  run.write("plot" + suffix + ".csv", mhd::io::plot_csv(r));
}

int cmd_simulate(const Options& o, Run& run) {
  auto rc = load(o);
  const auto& s = rc.scenario;
  for (std::size_t r = 0; r < o.traces; ++r) {
    auto a = mhd::realization_arrivals(s, r);
    mhd::ServiceProcess sp{mhd::realization_services(s, r)};
    auto tr = mhd::simulate(s.hops, a, sp.per_hop);
    run.write("trace_" + std::to_string(r) + ".csv", mhd::io::trace_csv(tr));
    run.write("service_" + std::to_string(r) + ".csv", mhd::io::service_csv(sp));
  }
  manifest(run, &rc, o);
  return ok;
}

int cmd_analyze(const Options& o, Run& run) {
  auto rc = load(o);
  auto rep = mhd::run_scenario(rc.scenario, {o.workers});
  print_report(rep);
  write_report(run, rep, "");
  run.timing = timing_of(rep);
  manifest(run, &rc, o);
  return ok;
}

std::vector<std::size_t> parse_range(const std::string& s) {
  std::vector<std::size_t> out;
  auto dots = s.find("..");
  try {
    if (dots != std::string::npos) {
      std::size_t a = std::stoul(s.substr(0, dots)), b = std::stoul(s.substr(dots + 2));
      for (std::size_t h = a; h <= b; ++h) out.push_back(h);
    } else {
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    }
  } catch (const std::exception&) {
    throw mhd::ConfigError("--hops: expected a..b or a comma list, got '" + s + "'");
  }
  if (out.empty()) throw mhd::ConfigError("--hops: empty range");
  return out;
}

int cmd_sweep(const Options& o, Run& run) {
  auto rc = load(o);
  auto hops = parse_range(o.hops);
  auto reps = mhd::run_hop_sweep(rc.scenario, hops, {o.workers});
  json t = json::array();
  for (const auto& r : reps) {
    print_report(r);
    write_report(run, r, "_hops" + std::to_string(r.hops));
    auto x = timing_of(r);
    x["hops"] = r.hops;
    t.push_back(x);
  }
  run.write("sweep_summary.csv", mhd::io::sweep_summary_csv(reps));
  run.timing = t;
  manifest(run, &rc, o);
  return ok;
}

int cmd_provision(const Options& o, Run& run) {
  auto rc = load(o);
  if (rc.provision_traffic_mbps.empty() || rc.provision_wb_ms.empty())
    throw mhd::ConfigError("provision needs qos.provision_traffic_mbps and qos.provision_wb_ms");
  auto t0 = std::chrono::steady_clock::now();
  auto cells = mhd::run_provision_matrix(rc.scenario, rc.provision_traffic_mbps, rc.provision_wb_ms, {o.workers});
  std::ostringstream csv;
  csv << mhd::io::provision_header();
  for (const auto& c : cells) {
    csv << mhd::io::num(c.traffic_mbps) << ',' << mhd::io::num(c.wb_ms) << ',' << mhd::io::num(c.epsilon) << ','
        << mhd::io::num(c.result.c_bits_per_slot) << ',' << mhd::io::num(c.mean_downlink) << '\n';
    std::cout << c.traffic_mbps << " Mbps, " << c.wb_ms << " ms: C=" << c.result.c_bits_per_slot
              << " bits/slot, mean downlink=" << c.mean_downlink << " (" << mhd::to_string(c.result.branch)
              << ")\n";
  }
  run.write("provision.csv", csv.str());
  run.timing["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest(run, &rc, o);
  return ok;
}

int cmd_selftest(const Options& o, Run& run) {
  bool pass = true;
  auto t2 = mhd::selftest::upcrossing_suite(o.walks, 20240601);
  std::cout << "upcrossing: " << t2.cases.size() << " walks, " << t2.failures
            << " failures, min bound/observed = " << t2.min_ratio << "\n";
  pass = pass && t2.failures == 0;
  const double thetas[] = {1e-4, 1e-3, 1e-2, 1e-1};
  auto um = mhd::selftest::unit_mean_suite(thetas, o.samples, 7);
  std::ostringstream csv;
  csv << "process,theta_per_kbit,d,mean,se,pass\n";
  for (const auto& c : um) {
    std::cout << "unit mean " << c.process << " theta=" << c.theta_per_kbit << "/kbit: " << c.um.mean
              << " +- " << c.um.se << (c.pass ? "" : "  FAIL") << "\n";
    csv << c.process << ',' << mhd::io::num(c.theta_per_kbit) << ',' << mhd::io::num(c.d) << ','
        << mhd::io::num(c.um.mean) << ',' << mhd::io::num(c.um.se) << ',' << c.pass << '\n';
    pass = pass && c.pass;
  }
  run.write("selftest.csv", csv.str());
  manifest(run, nullptr, o);
  std::cout << (pass ? "selftest passed\n" : "selftest FAILED\n");
  return pass ? ok : selftest_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-hop delay QoS toolkit"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c, bool needs_config) {
    auto* opt = c->add_option("--config", o.config, "scenario file (or a run_manifest.json)");
    if (needs_config) opt->required();
    c->add_option("--out", o.out, "output directory");
    c->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    c->add_option("--set", o.overrides, "override, section.key=value")->allow_extra_args(false);
    c->add_option("--realizations", o.realizations, "override scenario.realizations");
  };
  auto* sim = app.add_subcommand("simulate", "write traces for the first realizations");
  common(sim, true);
  sim->add_option("--traces", o.traces, "number of realizations to dump")->check(CLI::PositiveNumber);
  auto* ana = app.add_subcommand("analyze", "one scenario end to end");
  common(ana, true);
  auto* swp = app.add_subcommand("sweep", "hop-count sweep");
  common(swp, true);
  swp->add_option("--hops", o.hops, "a..b or comma list");
  auto* prv = app.add_subcommand("provision", "minimum service rate matrix");
  common(prv, true);
  auto* st = app.add_subcommand("selftest", "property suites");
  common(st, false);
  st->add_option("--walks", o.walks, "random walks for the upcrossing suite");
  st->add_option("--samples", o.samples, "samples per unit-mean check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  Run run;
  run.command = app.get_subcommands().front()->get_name();
  run.out = o.out;
  try {
    fs::create_directories(run.out);
    if (*sim) return cmd_simulate(o, run);
    if (*ana) return cmd_analyze(o, run);
    if (*swp) return cmd_sweep(o, run);
    if (*prv) return cmd_provision(o, run);
    return cmd_selftest(o, run);
  } catch (const mhd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const mhd::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n  theta, stability slack:\n";
    for (auto [th, sl] : e.slack_profile) std::cerr << "    " << th << ", " << sl << "\n";
    return infeasible;
  } catch (const mhd::UnstableError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return infeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return runtime_error;
  }
}
