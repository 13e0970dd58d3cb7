// kgl: command-line front end. Exit codes: 0 all checks pass, 1 a check
// failed, 2 usage or input error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kgl/kgl.hpp"

namespace {

namespace fs = std::filesystem;

struct InstanceArgs {
  std::string dir;
  std::string sg, action, bundle, kernel;

  kgl::InstancePaths paths(bool need_kernel) const {
    auto pick = [&](const std::string& explicit_path, const char* name) {
      if (!explicit_path.empty()) return explicit_path;
      if (dir.empty()) return std::string();
      return (fs::path(dir) / name).string();
    };
    kgl::InstancePaths p{pick(sg, "semigroupoid.json"), pick(action, "action.json"), pick(bundle, "bundle.json"),
                         pick(kernel, "kernel.json")};
    if (p.semigroupoid.empty() || p.action.empty() || p.bundle.empty())
      throw kgl::Error(kgl::ErrorCode::ParseError, "instance needs --instance DIR or --sg/--action/--bundle");
    if (!need_kernel && kernel.empty() && !fs::exists(p.kernel)) p.kernel.clear();
    return p;
  }
};

void add_instance_options(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("-i,--instance", a.dir, "directory with semigroupoid/action/bundle/kernel .json");
  cmd->add_option("--sg", a.sg, "semigroupoid document");
  cmd->add_option("--action", a.action, "action document");
  cmd->add_option("--bundle", a.bundle, "bundle document");
  cmd->add_option("--kernel", a.kernel, "kernel document");
}

int emit(const kgl::Report& r, const std::string& out) {
  if (out.empty()) {
    std::cout << kgl::report_text(r);
  } else {
    kgl::save_report(r, out);
  }
  return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-valued kernels on *-semigroupoids: linearisations, representations and checks"};
  app.require_subcommand(0, 1);

  kgl::Tolerances tol;
  if (const char* env = std::getenv("KGL_ATOL")) {
    try {
      tol.atol = std::stod(env);
    } catch (const std::exception&) {
      std::cerr << "error: KGL_ATOL is not a number\n";
      return 2;
    }
  }
  std::string out;
  bool list_checks = false;
  app.add_option("--atol", tol.atol, "absolute tolerance (default 1e-9, env KGL_ATOL)");
  app.add_option("--rank-rel", tol.rank_rel, "relative eigenvalue cutoff (default 1e-10)");
  app.add_option("--out", out, "write the report here instead of stdout");
  app.add_flag("--list-checks", list_checks, "print the check tag vocabulary");

  InstanceArgs inst_args;

  auto* validate = app.add_subcommand("validate", "semigroupoid and action axioms");
  add_instance_options(validate, inst_args);

  auto* classify = app.add_subcommand("classify", "unit / transitive / inverse / groupoid");
  add_instance_options(classify, inst_args);

  std::string check_what;
  auto* check = app.add_subcommand("check", "kernel checks");
  check->add_option("what", check_what, "hermitian|psd|invariant|bounded|orbit|all")
      ->required()
      ->check(CLI::IsMember({"hermitian", "psd", "invariant", "bounded", "orbit", "all"}));
  add_instance_options(check, inst_args);

  bool hilbert = false, krein = false, reducibility = false;
  std::string dominant_path;
  auto* linearize = app.add_subcommand("linearize", "minimal Hilbert or Krein linearisation");
  linearize->add_flag("--hilbert", hilbert);
  linearize->add_flag("--krein", krein);
  linearize->add_option("--dominant", dominant_path, "dominant kernel L (Krein route via L)");
  add_instance_options(linearize, inst_args);

  auto* split = app.add_subcommand("split", "Jordan split with disjointness certificate");
  add_instance_options(split, inst_args);

  auto* represent = app.add_subcommand("represent", "invariant Hilbert or Krein representation");
  represent->add_flag("--hilbert", hilbert);
  represent->add_flag("--krein", krein);
  represent->add_option("--dominant", dominant_path, "dominant kernel L");
  represent->add_flag("--reducibility", reducibility, "check J_s commutes with the representation");
  add_instance_options(represent, inst_args);

  std::string matrices;
  auto* lift = app.add_subcommand("lift", "lift (T, S) with B T = S* A to induced Krein spaces");
  lift->add_option("--matrices", matrices, "document with matrices A, B, T, S")->required();

  std::string family, mode = "psd_invariant", out_dir;
  std::uint64_t seed = 0;
  std::size_t max_dim = 2;
  auto* generate = app.add_subcommand("generate", "seeded instance and kernel");
  generate->add_option("--family", family, "pair_groupoid|group_action|partial_bijections|group_as_groupoid")
      ->required();
  generate->add_option("--seed", seed)->required();
  generate->add_option("--mode", mode, "psd_invariant|hermitian_invariant|arbitrary");
  generate->add_option("--max-dim", max_dim, "largest fibre dimension");
  generate->add_option("--out-dir", out_dir, "write the documents here");

  auto* report = app.add_subcommand("report", "every applicable check");
  add_instance_options(report, inst_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    tol.validate();
    if (list_checks) {
      for (const auto& t : kgl::check_tags()) std::cout << t.tag << "\t" << t.statement << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }
    auto* cmd = app.get_subcommands().front();
    if ((cmd == linearize || cmd == represent) && hilbert == krein) {
      std::cerr << "error: give exactly one of --hilbert, --krein\n";
      return 2;
    }

    if (cmd == lift) return emit(kgl::run_lift(kgl::read_json_file(matrices), tol), out);

    if (cmd == generate) {
      auto [docs, rep] = kgl::run_generate(family, seed, kgl::parse_kernel_mode(mode), max_dim, tol);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        kgl::write_text_file((fs::path(out_dir) / "semigroupoid.json").string(), kgl::dump(docs.semigroupoid));
        kgl::write_text_file((fs::path(out_dir) / "action.json").string(), kgl::dump(docs.action));
        kgl::write_text_file((fs::path(out_dir) / "bundle.json").string(), kgl::dump(docs.bundle));
        kgl::write_text_file((fs::path(out_dir) / "kernel.json").string(), kgl::dump(docs.kernel));
        if (!docs.dominant.is_null())
          kgl::write_text_file((fs::path(out_dir) / "dominant.json").string(), kgl::dump(docs.dominant));
      }
      return emit(rep, out);
    }

    const bool needs_kernel = cmd != validate && cmd != classify && cmd != report;
    const bool axioms = cmd != validate;
    const auto inst = kgl::load_instance(inst_args.paths(needs_kernel), axioms);
    std::optional<kgl::OpKernel> dominant;
    if (!dominant_path.empty()) dominant.emplace(kgl::kernel_from_json(kgl::read_json_file(dominant_path), inst->bundle));
    const kgl::OpKernel* dom = dominant ? &*dominant : nullptr;

    if (cmd == validate) return emit(kgl::run_validate(*inst, tol), out);
    if (cmd == classify) return emit(kgl::run_classify(*inst, tol), out);
    if (cmd == check) return emit(kgl::run_check(*inst, check_what, tol), out);
    if (cmd == linearize) return emit(kgl::run_linearize(*inst, krein, dom, tol), out);
    if (cmd == split) return emit(kgl::run_split(*inst, tol), out);
    if (cmd == represent) return emit(kgl::run_represent(*inst, krein, dom, reducibility, tol), out);
    if (cmd == report) return emit(kgl::run_report(*inst, tol), out);
    return 2;
  } catch (const kgl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
