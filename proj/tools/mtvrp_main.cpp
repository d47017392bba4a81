// Command-line surface: instance generation, training, evaluation, variant
// sweeps, solution validation, and the exact reference solver.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mtvrp/checkpoint.hpp"
#include "mtvrp/errors.hpp"
#include "mtvrp/evaluate.hpp"
#include "mtvrp/oracle.hpp"
#include "mtvrp/parallel.hpp"
#include "mtvrp/policy.hpp"
#include "mtvrp/trainer.hpp"
#include "mtvrp/trajectory.hpp"

namespace {

using namespace mtvrp;

std::vector<Instance> make_or_load_instances(const std::string& instances_path,
                                             const std::string& variant_name, int n, int count,
                                             uint64_t seed) {
  if (!instances_path.empty()) return load_instances(instances_path);
  std::vector<Instance> out;
  out.reserve(count);
  const VariantSpec v = variant_from_name(variant_name);
  for (int i = 0; i < count; ++i) out.push_back(generate(v, n, seed + i));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

int run(int argc, char** argv) {
  CLI::App app{"multi-task vehicle routing toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = library default)");

  // generate
  auto* gen = app.add_subcommand("generate", "sample instances to a JSON file");
  std::string g_variant = "CVRP", g_out = "-";
  int g_n = 50, g_count = 1;
  uint64_t g_seed = 1;
  gen->add_option("--variant", g_variant, "variant name, e.g. CVRP, OVRPBLTW");
  gen->add_option("--n", g_n, "customers per instance")->check(CLI::PositiveNumber);
  gen->add_option("--count", g_count, "number of instances")->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "base seed; instance i uses seed+i");
  gen->add_option("--out", g_out, "output path, - for stdout");

  // train
  auto* tr = app.add_subcommand("train", "train a policy");
  TrainConfig tcfg;
  std::string t_variant_set = "in16";
  tr->add_option("--variant-set", t_variant_set, "in16, all48, or one variant name");
  tr->add_option("--n", tcfg.n)->check(CLI::PositiveNumber);
  tr->add_option("--epochs", tcfg.epochs)->check(CLI::PositiveNumber);
  tr->add_option("--batch", tcfg.batch_size)->check(CLI::PositiveNumber);
  tr->add_option("--instances", tcfg.instances_per_epoch, "instances per epoch")
      ->check(CLI::PositiveNumber);
  tr->add_option("--lr", tcfg.lr);
  tr->add_option("--p-train", tcfg.p_train);
  tr->add_option("--p-test", tcfg.p_test);
  tr->add_option("--seed", tcfg.seed);
  tr->add_option("--out", tcfg.out_dir, "directory for checkpoints and metrics.csv")->required();
  tr->add_option("--dim", tcfg.model.dim)->check(CLI::PositiveNumber);
  tr->add_option("--heads", tcfg.model.heads)->check(CLI::PositiveNumber);
  tr->add_option("--layers", tcfg.model.layers)->check(CLI::PositiveNumber);
  tr->add_option("--hidden", tcfg.model.hidden)->check(CLI::PositiveNumber);
  tr->add_flag("--single-branch", tcfg.model.single_branch, "drop the sparse encoder branch");

  // eval
  auto* ev = app.add_subcommand("eval", "score a checkpoint against a reference");
  std::string e_checkpoint, e_variant = "CVRP", e_instances, e_ref = "oracle", e_out = "-";
  int e_n = 10, e_count = 100;
  uint64_t e_seed = 7;
  double e_p_test = 1.0;
  ev->add_option("--checkpoint", e_checkpoint)->required();
  ev->add_option("--variant", e_variant);
  ev->add_option("--n", e_n)->check(CLI::PositiveNumber);
  ev->add_option("--count", e_count)->check(CLI::PositiveNumber);
  ev->add_option("--seed", e_seed);
  ev->add_option("--p-test", e_p_test);
  ev->add_option("--instances", e_instances, "evaluate a JSON instance file instead of sampling");
  ev->add_option("--ref", e_ref, "oracle, random, or a file of reference objectives");
  ev->add_option("--out", e_out, "CSV path, - for stdout");

  // sweep
  auto* sw = app.add_subcommand("sweep", "evaluate across re-embedding rates");
  std::string s_checkpoint, s_variant = "CVRP", s_instances, s_out = "-";
  int s_n = 10, s_count = 50;
  uint64_t s_seed = 7;
  std::vector<double> s_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  sw->add_option("--checkpoint", s_checkpoint)->required();
  sw->add_option("--variant", s_variant);
  sw->add_option("--n", s_n)->check(CLI::PositiveNumber);
  sw->add_option("--count", s_count)->check(CLI::PositiveNumber);
  sw->add_option("--seed", s_seed);
  sw->add_option("--grid", s_grid, "re-embedding probabilities to test")->delimiter(',');
  sw->add_option("--instances", s_instances);
  sw->add_option("--out", s_out, "CSV path, - for stdout");

  // validate
  auto* va = app.add_subcommand("validate", "check solutions against instances");
  std::string v_instances, v_solutions;
  va->add_option("--instances", v_instances)->required();
  va->add_option("--solutions", v_solutions, "trajectory JSON file")->required();

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact reference objectives (n <= 10)");
  std::string o_variant = "CVRP", o_instances, o_out = "-";
  int o_n = 8, o_count = 1;
  uint64_t o_seed = 1;
  orc->add_option("--variant", o_variant);
  orc->add_option("--n", o_n)->check(CLI::PositiveNumber);
  orc->add_option("--count", o_count)->check(CLI::PositiveNumber);
  orc->add_option("--seed", o_seed);
  orc->add_option("--instances", o_instances);
  orc->add_option("--out", o_out);

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) parallel::set_threads(threads);

  if (gen->parsed()) {
    std::vector<Instance> out;
    const VariantSpec v = variant_from_name(g_variant);
    for (int i = 0; i < g_count; ++i) out.push_back(generate(v, g_n, g_seed + i));
    if (g_out == "-") {
      for (const auto& ins : out) std::cout << to_json(ins) << "\n";
    } else {
      save_instances(out, g_out);
    }
    return 0;
  }

  if (tr->parsed()) {
    if (t_variant_set == "in16")
      tcfg.variants = in16();
    else if (t_variant_set == "all48")
      tcfg.variants = all48();
    else
      tcfg.variants = {variant_from_name(t_variant_set)};
    tcfg.verbose = true;
    TrainResult r = fit(tcfg);
    std::printf("best epoch %d  val %.6f  (untrained %.6f)\n", r.best_epoch, r.best_val,
                r.initial_val);
    return 0;
  }

  if (ev->parsed()) {
    auto [model, params] = load_policy_checkpoint<float>(e_checkpoint);
    auto instances = make_or_load_instances(e_instances, e_variant, e_n, e_count, e_seed);
    std::vector<double> refs;
    refs.reserve(instances.size());
    if (e_ref == "oracle") {
      for (const auto& ins : instances) refs.push_back(solve_exact(ins).length);
    } else if (e_ref == "random") {
      Rng rng(e_seed ^ 0xabcdef);
      for (const auto& ins : instances)
        refs.push_back(random_policy_objective(ins, ins.n, rng));
    } else {
      std::ifstream is(e_ref);
      if (!is) throw std::runtime_error("cannot read reference file " + e_ref);
      double v;
      while (is >> v) refs.push_back(v);
      if (refs.size() != instances.size())
        throw std::invalid_argument("reference count does not match instance count");
    }
    GapReport rep = evaluate(params, model, instances, refs, e_p_test, e_seed);
    write_text(e_out, rep.csv());
    std::cerr << rep.summary();
    return 0;
  }

  if (sw->parsed()) {
    auto [model, params] = load_policy_checkpoint<float>(s_checkpoint);
    auto instances = make_or_load_instances(s_instances, s_variant, s_n, s_count, s_seed);
    std::vector<double> refs;
    for (const auto& ins : instances) refs.push_back(solve_exact(ins).length);
    auto rows = sweep_p_test(params, model, instances, refs, s_grid, s_seed);
    write_text(s_out, sweep_csv(rows));
    return 0;
  }

  if (va->parsed()) {
    auto instances = load_instances(v_instances);
    auto sets = load_trajectories(v_solutions);
    bool all_ok = true;
    for (const auto& ts : sets) {
      int idx;
      try {
        idx = std::stoi(ts.instance_id);
      } catch (const std::exception&) {
        throw std::invalid_argument("instance_id '" + ts.instance_id + "' is not an index");
      }
      if (idx < 0 || idx >= static_cast<int>(instances.size()))
        throw std::invalid_argument("solution references missing instance " + ts.instance_id);
      const Instance& ins = instances[idx];
      for (size_t k = 0; k < ts.sequences.size(); ++k) {
        auto rep = validate_solution(ins, ts.sequences[k]);
        if (!rep.ok) {
          all_ok = false;
          std::printf("instance %s trajectory %zu: %s\n", ts.instance_id.c_str(), k,
                      rep.str().c_str());
        }
      }
    }
    std::printf(all_ok ? "all solutions valid\n" : "validation failed\n");
    return all_ok ? 0 : 2;
  }

  if (orc->parsed()) {
    auto instances = make_or_load_instances(o_instances, o_variant, o_n, o_count, o_seed);
    std::string out = "instance,optimal\n";
    for (size_t i = 0; i < instances.size(); ++i) {
      OracleResult r = solve_exact(instances[i]);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%zu,%.9f\n", i, r.length);
      out += buf;
    }
    write_text(o_out, out);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
