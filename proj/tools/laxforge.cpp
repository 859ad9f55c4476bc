// laxforge command-line tool: batch derivation, verification, and export.
//
// Exit codes: 0 success, 1 verification failure, 2 unsupported structure,
// 64 usage error.

#include <laxforge/driver.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace laxforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUnsupported = 2;
constexpr int kExitUsage = 64;

std::map<std::string, std::string> parse_branches(const std::vector<std::string>& raw) {
  std::map<std::string, std::string> out;
  for (const auto& b : raw) {
    auto eq = b.find('=');
    if (eq == std::string::npos) throw usage_error("branch must look like key=value: " + b);
    std::string key = b.substr(0, eq), value = b.substr(eq + 1);
    if (key != "X4" && key != "dnls_zero" && key != "offdiag")
      throw usage_error("unknown branch decision node: " + key);
    out[key] = value;
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw usage_error("cannot write " + path);
  out << content;
}

uint64_t env_seed(uint64_t fallback) {
  if (const char* s = std::getenv("LAXFORGE_SEED")) return std::strtoull(s, nullptr, 10);
  return fallback;
}

FieldSystem load_system(const std::string& name, const std::string& file) {
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw usage_error("cannot open system file " + file);
    nlohmann::json j;
    in >> j;
    return FieldSystem::from_json(j, ParseEnv::standard());
  }
  return make_system(name);
}

int cmd_derive(const Casebook& cb, const std::string& system, const std::string& system_file,
               const std::vector<std::string>& branches_raw, const std::string& format,
               const std::string& outdir) {
  auto branches = parse_branches(branches_raw);
  std::filesystem::create_directories(outdir);

  DeriveOutput out;
  if (!system_file.empty()) {
    PipelineOptions opt;
    for (auto& [k, v] : branches) opt.branches[k] = v;
    out.pipeline = run_pipeline(load_system(system, system_file), opt);
  } else {
    out = derive_system(cb, system, branches);
  }

  nlohmann::json constraints = out.pipeline.constraints.to_json();
  if (!out.scalars.scalars.items.empty()) constraints["scalar"] = out.scalars.scalars.to_json();
  if (out.dnls) {
    constraints["dnlse"] = out.dnls->dnlse.to_json();
    nlohmann::json closure;
    closure["combined"] = out.closure->combined.to_json();
    closure["condition_imag"] = out.closure->cond_imag.to_json();
    closure["condition_real"] = out.closure->cond_real.to_json();
    closure["combined_text"] = out.closure->combined.str();
    closure["condition_imag_text"] = out.closure->cond_imag.str();
    closure["condition_real_text"] = out.closure->cond_real.str();
    constraints["closure"] = closure;
  }
  write_file(outdir + "/constraints.json", constraints.dump(2) + "\n");

  nlohmann::json trace = out.pipeline.trace.to_json();
  if (out.dnls) trace["reduction"] = out.dnls->trace.to_json();
  if (out.closure) trace["closure"] = out.closure->trace.to_json();
  write_file(outdir + "/trace.json", trace.dump(2) + "\n");

  if (format == "latex") {
    write_file(outdir + "/constraints.tex", out.pipeline.constraints.to_latex());
  } else if (format == "markdown") {
    std::string md = out.pipeline.trace.to_markdown();
    if (out.dnls) md += "\n" + out.dnls->trace.to_markdown();
    if (out.closure) md += "\n" + out.closure->trace.to_markdown();
    write_file(outdir + "/trace.md", md);
  }

  std::cout << "derived " << out.pipeline.constraints.items.size() << " matrix constraints for "
            << out.pipeline.sys.name << " -> " << outdir << "\n";
  for (auto& c : out.pipeline.constraints.items) std::cout << "  " << c.tag << "\n";
  if (out.closure) {
    std::cout << "integrability conditions:\n";
    std::cout << "  " << out.closure->cond_imag.str() << " = 0\n";
    std::cout << "  " << out.closure->cond_real.str() << " = 0\n";
  }
  return kExitOk;
}

int verify_fixture_group(const Casebook& cb, const std::string& group) {
  bool ok = true;
  auto show = [&](const std::string& label, const CompareReport& rep) {
    std::cout << label << ": " << rep.summary() << "\n";
    ok = ok && rep.all_matched();
  };
  if (group == "appendixA") {
    auto nls = offdiag_case(cb, "nls");
    show("KhaNLS leftovers", nls.compare);
    auto pt = offdiag_case(cb, "ptnls");
    show("KhaPTNLS leftovers", pt.compare);
    ok = ok && nls.report.ok() && pt.report.ok();
  } else if (group == "appendixB") {
    auto d = offdiag_case(cb, "dnls");
    show("KhaDNLS leftovers", d.compare);
    ok = ok && d.report.ok();
  } else if (group == "nls") {
    auto d = derive_system(cb, "vc-nls");
    show("constraint list", Casebook::compare(d.pipeline.constraints, cb.family("NLS.O(")));
    show("Khawaja reduction", Casebook::compare(d.scalars.scalars, cb.family("KC")));
    auto v = reduce_khawaja_equivalence(cb.fixture("EKC1").e, cb.fixture("EKC2").e,
                                        cb.fixture("EKC3").e, cb.fixture("EKC4").e,
                                        cb.fixture("KC3").e, cb.fixture("KC4").e);
    std::cout << "EKC reduction to KC3/KC4: " << (v.ok() ? "ok" : "FAIL") << "\n";
    ok = ok && v.ok() && resubstitution_sound(d.pipeline);
  } else if (group == "ptnls") {
    auto d = derive_system(cb, "vc-ptnls");
    show("constraint list", Casebook::compare(d.pipeline.constraints, cb.family("PT.O(")));
    show("Khawaja reduction", Casebook::compare(d.scalars.scalars, cb.family("PTKC")));
    ok = ok && resubstitution_sound(d.pipeline);
  } else if (group == "dnls") {
    auto d = derive_system(cb, "vc-dnls");
    show("constraint list", Casebook::compare(d.pipeline.constraints, cb.family("DNLSCOND")));
    std::vector<const Fixture*> dnlse = {&cb.fixture("DNLSE1"), &cb.fixture("DNLSE2"),
                                         &cb.fixture("DNLSE3"), &cb.fixture("DNLSE4")};
    show("reduced system", Casebook::compare(d.dnls->dnlse, dnlse));
    bool im = Expr::proportional(d.closure->cond_imag, cb.fixture("DNLS.real-condition.1").e)
                  .has_value();
    bool re = Expr::proportional(d.closure->cond_real, cb.fixture("DNLS.real-condition.2").e)
                  .has_value();
    Subst cf = dnls_closed_form();
    bool ann = d.closure->cond_imag.substitute(cf).is_zero() &&
               d.closure->cond_real.substitute(cf).is_zero();
    std::cout << "integrability pair matches: " << (im && re ? "ok" : "FAIL")
              << "; closed form annihilates: " << (ann ? "ok" : "FAIL") << "\n";
    ok = ok && im && re && ann && resubstitution_sound(d.pipeline);
  } else {
    throw usage_error("unknown fixture group: " + group +
                      " (expected nls, ptnls, dnls, appendixA, appendixB)");
  }
  return ok ? kExitOk : kExitVerifyFail;
}

int cmd_verify(const Casebook& cb, const std::string& system, const std::string& inst_file,
               const std::string& fixtures_group, uint64_t seed_override, bool has_seed,
               const std::string& report_path) {
  if (!fixtures_group.empty()) return verify_fixture_group(cb, fixtures_group);
  if (system.empty() || inst_file.empty())
    throw usage_error("verify needs --fixtures GROUP or --system NAME --inst FILE");

  std::ifstream in(inst_file);
  if (!in) throw usage_error("cannot open instantiation file " + inst_file);
  nlohmann::json j;
  in >> j;
  Instantiation inst = Instantiation::from_json(j);
  inst.seed = env_seed(has_seed ? seed_override : inst.seed);

  VerifyOutcome out = verify_system(cb, system, inst);
  std::cout << "symbolic resubstitution: " << (out.symbolic_ok ? "ok" : "FAIL") << "\n";
  if (!out.detail.empty()) std::cout << out.detail << "\n";
  nlohmann::json reports = nlohmann::json::array();
  for (auto& r : out.reports) {
    std::cout << r.summary() << "\n";
    reports.push_back(r.to_json());
  }
  if (!report_path.empty())
    write_file(report_path, nlohmann::json{{"symbolic_ok", out.symbolic_ok},
                                           {"reports", reports},
                                           {"pass", out.pass()}}
                                .dump(2) +
                                "\n");
  return out.pass() ? kExitOk : kExitVerifyFail;
}

int cmd_export(const Casebook& cb, const std::string& system, const std::string& what,
               const std::string& format, const std::string& outfile) {
  DeriveOutput d = derive_system(cb, system);
  std::string content;
  if (what == "constraints") {
    content = format == "json" ? d.pipeline.constraints.to_json().dump(2)
                               : d.pipeline.constraints.to_latex();
  } else if (what == "laxpair") {
    if (format == "json") {
      content = nlohmann::json{{"F", d.pipeline.F.to_json()}, {"G", d.pipeline.G.to_json()}}
                    .dump(2);
    } else {
      content = "F = " + d.pipeline.F.to_latex() + "\n\nG = " + d.pipeline.G.to_latex() + "\n";
    }
  } else if (what == "trace") {
    content = format == "json"     ? d.pipeline.trace.to_json().dump(2)
              : format == "latex" ? d.pipeline.trace.to_markdown()
                                  : d.pipeline.trace.to_markdown();
  } else {
    throw usage_error("unknown export target: " + what);
  }
  if (outfile.empty())
    std::cout << content << "\n";
  else
    write_file(outfile, content + "\n");
  return kExitOk;
}

int cmd_fixtures(const Casebook& cb, bool list, const std::string& group,
                 const std::string& id, const std::string& format) {
  if (list) {
    for (const auto& f : cb.all()) {
      if (!group.empty() && f.group != group) continue;
      std::cout << f.id << "  [" << f.group << "]  " << f.source << "\n";
    }
    return kExitOk;
  }
  const Fixture& f = cb.fixture(id);
  if (format == "json")
    std::cout << f.to_json().dump(2) << "\n";
  else
    std::cout << f.to_latex() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laxforge: zero-curvature derivation and verification engine"};
  app.require_subcommand(1);

  std::string fixdir = Casebook::default_dir();
  app.add_option("--fixdir", fixdir, "fixture directory");

  auto* derive = app.add_subcommand("derive", "run the elimination pipeline for a system");
  std::string system = "vc-nls", system_file, format = "json", outdir = "out";
  std::vector<std::string> branches;
  derive->add_option("--system", system, "vc-nls | vc-ptnls | vc-dnls | vc-dnls-display");
  derive->add_option("--system-file", system_file, "JSON file with a user-defined system");
  derive->add_option("--branch", branches, "branch choice key=value (X4, dnls_zero, offdiag)");
  derive->add_option("--format", format, "json | latex | markdown");
  derive->add_option("--out", outdir, "output directory");

  auto* verify = app.add_subcommand("verify", "symbolic + numeric verification");
  std::string v_system, inst_file, fixtures_group, report_path;
  uint64_t seed = 0;
  verify->add_option("--system", v_system, "system to verify");
  verify->add_option("--inst", inst_file, "instantiation JSON file");
  verify->add_option("--fixtures", fixtures_group,
                     "fixture group: nls | ptnls | dnls | appendixA | appendixB");
  auto* seed_opt = verify->add_option("--seed", seed, "seed override (also LAXFORGE_SEED)");
  verify->add_option("--report", report_path, "write the JSON check report here");

  auto* exportc = app.add_subcommand("export", "export constraints / Lax pair / trace");
  std::string e_system = "vc-nls", what = "constraints", e_format = "latex", outfile;
  exportc->add_option("--system", e_system, "system");
  exportc->add_option("--what", what, "constraints | laxpair | trace");
  exportc->add_option("--format", e_format, "latex | json | markdown");
  exportc->add_option("--out", outfile, "output file (stdout when omitted)");

  auto* fixtures = app.add_subcommand("fixtures", "list or show casebook fixtures");
  auto* flist = fixtures->add_subcommand("list", "list fixture ids");
  std::string f_group;
  flist->add_option("--group", f_group, "restrict to one group");
  auto* fshow = fixtures->add_subcommand("show", "show one fixture");
  std::string f_id, f_format = "latex";
  fshow->add_option("--id", f_id, "fixture id")->required();
  fshow->add_option("--format", f_format, "latex | json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    Casebook cb(fixdir);
    if (derive->parsed())
      return cmd_derive(cb, system, system_file, branches, format, outdir);
    if (verify->parsed())
      return cmd_verify(cb, v_system, inst_file, fixtures_group, seed, seed_opt->count() > 0,
                        report_path);
    if (exportc->parsed()) return cmd_export(cb, e_system, what, e_format, outfile);
    if (fixtures->parsed())
      return cmd_fixtures(cb, flist->parsed(), f_group, f_id, f_format);
    return kExitUsage;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const unsupported_error& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFail;
  }
}
