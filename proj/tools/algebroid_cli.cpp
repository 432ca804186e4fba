// Command-line front end: validate algebroid manifests, classify (almost)
// contact structures, and run the big-tangent construction end to end.

#include <CLI11.hpp>
#include <iostream>

#include "lalg/bigtangent.hpp"
#include "lalg/manifest.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitMathFailure = 1;
constexpr int kExitInputError = 2;

using json = nlohmann::ordered_json;

struct GlobalOptions {
  double tol = 0.0;      // 0 = keep manifest values
  std::size_t grid = 0;  // 0 = keep manifest values
  int seed = -1;         // -1 = keep manifest values
  bool json_output = false;
};

void apply_overrides(lalg::Manifest& mf, const GlobalOptions& opt) {
  if (opt.tol > 0.0) {
    mf.tol_eq = opt.tol;
    mf.tol_classify = opt.tol;
  }
  if (opt.grid > 0) mf.grid_count = opt.grid;
  if (opt.seed >= 0) mf.seed = unsigned(opt.seed);
}

json json_header(const std::string& command, const lalg::Manifest& mf) {
  json out;
  out["schema_version"] = 1;
  out["command"] = command;
  out["convention"] = mf.convention == lalg::DConvention::Half ? "half" : "plain";
  out["grid"] = {{"count", mf.grid_count}, {"seed", mf.seed}, {"strategy", mf.strategy}};
  return out;
}

int cmd_validate(const std::string& path, const GlobalOptions& opt) {
  lalg::Manifest mf = lalg::load_manifest(path);
  apply_overrides(mf, opt);
  lalg::SampleGrid grid = mf.grid();
  lalg::Report rep = lalg::validate(*mf.algebroid, grid);
  if (opt.json_output) {
    json out = json_header("validate", mf);
    out["report"] = lalg::report_json(rep);
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "validate " << path << " (" << grid.size() << " points)\n";
    rep.print(std::cout);
  }
  return rep.all_pass() ? kExitPass : kExitMathFailure;
}

int cmd_classify(const std::string& path, const GlobalOptions& opt,
                 const std::string& convention_override) {
  lalg::Manifest mf = lalg::load_manifest(path);
  apply_overrides(mf, opt);
  if (!mf.structure.has_value())
    throw lalg::ManifestError("classify: manifest has no structure block");
  if (!convention_override.empty()) {
    mf.convention = convention_override == "half" ? lalg::DConvention::Half
                                                  : lalg::DConvention::Plain;
    mf.structure->convention = mf.convention;
  }
  lalg::SampleGrid grid = mf.grid();
  lalg::Classification cls = lalg::classify(*mf.structure, grid, mf.tol_classify);

  lalg::Report identities;
  if (mf.structure->metric.has_value()) {
    lalg::Connection conn = lalg::levi_civita(mf.algebroid, *mf.structure->metric);
    identities = lalg::check_identities(*mf.structure, conn, grid, cls);
  }

  auto flag_list = [&]() {
    return std::vector<std::pair<std::string, bool>>{
        {"almost_contact", cls.flags.almost_contact},
        {"compatible", cls.flags.compatible},
        {"contact_riemannian", cls.flags.contact_riemannian},
        {"normal", cls.flags.normal},
        {"K_contact", cls.flags.K_contact},
        {"sasakian", cls.flags.sasakian},
        {"almost_kenmotsu", cls.flags.almost_kenmotsu},
        {"kenmotsu", cls.flags.kenmotsu}};
  };

  if (opt.json_output) {
    json out = json_header("classify", mf);
    json flags;
    for (const auto& [name, value] : flag_list()) flags[name] = value;
    out["flags"] = std::move(flags);
    out["report"] = lalg::report_json(cls.report);
    out["identities"] = lalg::report_json(identities);
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "classify " << path << " (" << grid.size() << " points, convention "
              << (mf.convention == lalg::DConvention::Half ? "half" : "plain") << ")\n";
    for (const auto& [name, value] : flag_list())
      std::cout << "  " << name << ": " << (value ? "true" : "false") << "\n";
    std::cout << "checks:\n";
    cls.report.print(std::cout);
    if (!identities.entries.empty()) {
      std::cout << "identities:\n";
      identities.print(std::cout);
    }
  }
  return cls.flags.almost_contact ? kExitPass : kExitMathFailure;
}

int cmd_bigtangent(const std::string& metric_path, int dim, const GlobalOptions& opt) {
  lalg::BigTangentSpec spec = lalg::load_bigtangent_spec(metric_path, dim);
  std::size_t count = opt.grid > 0 ? opt.grid : 50;
  unsigned seed = opt.seed >= 0 ? unsigned(opt.seed) : 7;
  double tol = opt.tol > 0.0 ? opt.tol : 1e-8;

  lalg::BigTangentModel model = lalg::build_big_tangent(spec.n, spec.g, spec.box);
  lalg::SampleGrid grid = lalg::big_tangent_grid(model, count, seed, spec.margin, tol, 1e-9);

  lalg::Report all;
  auto merge = [&](const lalg::Report& r) {
    all.entries.insert(all.entries.end(), r.entries.begin(), r.entries.end());
  };
  merge(lalg::validate(*model.V, grid));
  lalg::FramedFStructure f = lalg::framed_f_structure(model, grid);
  merge(f.report);
  lalg::PhiFormResult phi = lalg::phi_form_and_decomposition(model, grid);
  merge(phi.report);
  lalg::LiouvilleRestriction restriction = lalg::liouville_restriction(model, grid);
  merge(restriction.report);
  merge(lalg::verify_contact_on_restriction(model, restriction, grid));

  if (opt.json_output) {
    json out;
    out["schema_version"] = 1;
    out["command"] = "bigtangent";
    out["dim"] = spec.n;
    out["grid"] = {{"count", count}, {"seed", seed}, {"margin", spec.margin}};
    out["report"] = lalg::report_json(all);
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "bigtangent n=" << spec.n << " (" << grid.size() << " points off the zero section)\n";
    all.print(std::cout);
  }
  return all.all_pass() ? kExitPass : kExitMathFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie algebroid contact-structure calculus"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  GlobalOptions opt;
  app.add_option("--tol", opt.tol, "override the equality tolerance");
  app.add_option("--grid", opt.grid, "override the grid point count");
  app.add_option("--seed", opt.seed, "override the grid seed");
  app.add_flag("--json", opt.json_output, "machine-readable JSON report");

  std::string manifest_path, convention_override, metric_path;
  int dim = 0;

  CLI::App* validate = app.add_subcommand("validate", "algebroid axioms on a sample grid");
  validate->add_option("manifest", manifest_path, "manifest JSON path")->required();

  CLI::App* classify = app.add_subcommand("classify", "contact-structure classification ladder");
  classify->add_option("manifest", manifest_path, "manifest JSON path")->required();
  classify->add_option("--convention", convention_override, "plain|half (overrides the manifest)")
      ->check(CLI::IsMember({"plain", "half"}));

  CLI::App* bigtangent = app.add_subcommand("bigtangent", "vertical Liouville contact construction");
  bigtangent->add_option("--metric", metric_path, "base metric JSON path")->required();
  bigtangent->add_option("--dim", dim, "base dimension (checked against the metric file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (validate->parsed()) return cmd_validate(manifest_path, opt);
    if (classify->parsed()) return cmd_classify(manifest_path, opt, convention_override);
    return cmd_bigtangent(metric_path, dim, opt);
  } catch (const lalg::ManifestError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const lalg::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    // construction-level failures (non-positive metric, bad shapes)
    std::cerr << "error: " << e.what() << "\n";
    return kExitMathFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMathFailure;
  }
}
