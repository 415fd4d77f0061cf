#include "cli.hpp"

#include "readop/experiments.hpp"

#include "third_party/CLI11.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace readop::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

/// Thrown for bad flags or an unusable schedule.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string schedule;
  int precision = kDefaultPrecisionBits;
  std::uint64_t seed = 1;
  std::string format = "text";
  std::string out_dir;
};

struct Resolved {
  std::shared_ptr<const Schedule> schedule;
  std::string source;
};

Resolved resolve_schedule(const Globals& g) {
  std::string name = g.schedule;
  if (name.empty()) {
    const char* env = std::getenv("READOP_SCHEDULE");
    name = env && *env ? env : "fixture";
  }
  try {
    if (name == "fixture") return {std::make_shared<const Schedule>(Schedule::fixture()), name};
    if (name == "naive") return {std::make_shared<const Schedule>(Schedule::naive()), name};
    return {std::make_shared<const Schedule>(Schedule::load(name)), name};
  } catch (const std::exception& e) {
    throw ConfigError("cannot load schedule '" + name + "': " + e.what());
  }
}

Int parse_index(const std::string& text) {
  try {
    Int i = parse_int(text);
    if (sgn(i) < 0) throw std::invalid_argument("negative");
    return i;
  } catch (const std::exception&) {
    throw ConfigError("not a nonnegative index: " + text);
  }
}

constexpr std::size_t kMaxPrintedRows = 40;

void print_table(const Table& t, std::ostream& out) {
  if (t.rows.size() > kMaxPrintedRows) {
    out << "table " << t.name << ": " << t.rows.size() << " rows (use --format csv or --out)\n";
    return;
  }
  std::vector<std::size_t> width(t.header.size(), 0);
  auto widen = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size() && k < width.size(); ++k) width[k] = std::max(width[k], cells[k].size());
  };
  widen(t.header);
  for (const auto& r : t.rows) widen(r);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size() && k < width.size(); ++k) {
      out << "  " << cells[k];
      if (k + 1 < cells.size()) out << std::string(width[k] - cells[k].size(), ' ');
    }
    out << "\n";
  };
  out << "table " << t.name << ":\n";
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

int emit(const Report& rep, const Globals& g, std::ostream& out) {
  if (g.format == "csv") {
    out << rep.checks_csv();
    for (const auto& t : rep.tables) out << "\n# " << t.name << "\n" << to_csv(t);
  } else {
    out << rep.to_text();
    for (const auto& t : rep.tables) print_table(t, out);
  }
  if (!g.out_dir.empty()) rep.write_bundle(std::filesystem::path(g.out_dir) / rep.name);
  return rep.passed() ? kOk : kFailed;
}

SuiteConfig suite_config(const Globals& g) {
  const Resolved r = resolve_schedule(g);
  SuiteConfig c;
  c.schedule = r.schedule;
  c.schedule_source = r.source;
  c.precision_bits = g.precision;
  c.seed = g.seed;
  if (!g.out_dir.empty()) c.out_dir = g.out_dir;
  return c;
}

void add_config_header(Report& rep, const Globals& g) {
  const Resolved r = resolve_schedule(g);
  std::vector<std::pair<std::string, std::string>> head{{"schedule", r.source},
                                                        {"schedule_fingerprint", r.schedule->fingerprint()},
                                                        {"precision_bits", std::to_string(g.precision)},
                                                        {"seed", std::to_string(g.seed)}};
  for (const auto& kv : rep.config) {
    const bool seen = std::any_of(head.begin(), head.end(), [&](const auto& h) { return h.first == kv.first; });
    if (!seen) head.push_back(kv);
  }
  rep.config = std::move(head);
}

struct WitnessFlags {
  std::string mode = "strict";
  long m0 = 2;
  long depth = 1;
  long toy_r = 2;
  std::string j0;
  long samples = 20;
  long N = 100;
  long level = 1;
};

void add_witness_flags(CLI::App* cmd, WitnessFlags& w) {
  cmd->add_option("--mode", w.mode, "strict or toy")->check(CLI::IsMember({"strict", "toy"}));
  cmd->add_option("--m0", w.m0, "starting generation")->check(CLI::PositiveNumber);
  cmd->add_option("--depth", w.depth, "number of constructed levels")->check(CLI::NonNegativeNumber);
  cmd->add_option("--toy-r", w.toy_r, "r_i in toy mode")->check(CLI::PositiveNumber);
  cmd->add_option("--j0", w.j0, "starting index (default a(m0))");
}

WitnessParams build_witness(const Globals& g, const WitnessFlags& f) {
  const Resolved r = resolve_schedule(g);
  WitnessOptions o;
  o.mode = parse_witness_mode(f.mode);
  o.m0 = f.m0;
  o.depth = f.depth;
  o.toy_r = f.toy_r;
  if (!f.j0.empty()) o.j0 = parse_index(f.j0);
  return choose_params(std::make_shared<const BasisSystem>(r.schedule), o);
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact experiments with an orbit-defined operator on l1 and its diagonal conjugate"};
  app.name("readop");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--schedule", g.schedule, "fixture, naive or a JSON descriptor path (default $READOP_SCHEDULE)");
  app.add_option("--precision", g.precision, "working precision in bits")->check(CLI::Range(32, 1 << 20));
  app.add_option("--seed", g.seed, "seed for sampled checks");
  app.add_option("--format", g.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  app.add_option("--out", g.out_dir, "directory for report bundles");

  std::function<int()> action;

  // validate-schedule
  long horizon = 0;
  auto* validate = app.add_subcommand("validate-schedule", "check the schedule invariants");
  validate->add_option("--horizon", horizon, "last generation checked (default: head + 4)");
  validate->callback([&] {
    action = [&] {
      const Resolved r = resolve_schedule(g);
      const ValidationReport v = r.schedule->validate(horizon);
      Report rep;
      rep.name = "validate-schedule";
      rep.config = {{"horizon", std::to_string(v.horizon)}};
      for (const auto& c : v.checks) {
        rep.check(c.name, c.passed, c.passed ? "" : "n = " + std::to_string(c.witness_n) + ": " + c.detail);
      }
      add_config_header(rep, g);
      return emit(rep, g, out);
    };
  });

  // classify
  std::string index_text;
  auto* classify = app.add_subcommand("classify", "region of an index");
  classify->add_option("index", index_text, "index i >= 0")->required();
  classify->callback([&] {
    action = [&] {
      const Resolved r = resolve_schedule(g);
      const Int i = parse_index(index_text);
      const Region reg = r.schedule->classify(i);
      if (g.format == "csv") {
        out << "i,region,generation,lo,hi\n"
            << format_int(i) << "," << csv_escape(reg.to_string()) << "," << reg.n << "," << format_int(reg.lo) << ","
            << format_int(reg.hi) << "\n";
      } else {
        out << reg.to_string() << "\n";
      }
      return kOk;
    };
  });

  // basis expand
  auto* basis = app.add_subcommand("basis", "basis conversions");
  basis->require_subcommand(1);
  std::string system = "e";
  std::string target;
  std::string basis_index;
  auto* expand = basis->add_subcommand("expand", "express one basis vector in another system");
  expand->add_option("--system", system, "f, e or ehat")->check(CLI::IsMember({"f", "e", "ehat"}));
  expand->add_option("--index", basis_index, "index i")->required();
  expand->add_option("--to", target, "target system (default f, or e for --system f)")
      ->check(CLI::IsMember({"f", "e", "ehat"}));
  expand->callback([&] {
    action = [&] {
      const Resolved r = resolve_schedule(g);
      const BasisSystem b(r.schedule);
      const Int i = parse_index(basis_index);
      const BasisTag from = parse_basis_tag(system);
      const BasisTag to = target.empty() ? (from == BasisTag::F ? BasisTag::E : BasisTag::F) : parse_basis_tag(target);
      SparseVec v = from == BasisTag::F ? SparseVec::unit(BasisTag::F, i, ScalarSum(1))
                    : from == BasisTag::E ? b.e_in_f(i)
                                          : b.ehat_in_f(i);
      out << b.from_f(v, to).to_string() << "\n";
      return kOk;
    };
  });

  // matrix s-column
  auto* matrix = app.add_subcommand("matrix", "operator columns in the f-basis");
  matrix->require_subcommand(1);
  std::string column_index;
  std::string method = "formula";
  auto* s_column = matrix->add_subcommand("s-column", "column S f_i");
  s_column->add_option("index", column_index, "column index i")->required();
  s_column->add_option("--method", method, "formula or direct")->check(CLI::IsMember({"formula", "direct"}));
  s_column->callback([&] {
    action = [&] {
      const Resolved r = resolve_schedule(g);
      const Int i = parse_index(column_index);
      const BasisSystem b(r.schedule);
      out << (method == "formula" ? s_column_formula(*r.schedule, i) : s_column_direct(b, i)).to_string() << "\n";
      return kOk;
    };
  });

  // verify conjugation
  auto* verify = app.add_subcommand("verify", "exhaustive identities");
  verify->require_subcommand(1);
  std::string upto_text;
  auto* conj = verify->add_subcommand("conjugation", "closed-form S columns against the orbit system");
  conj->add_option("--upto", upto_text, "last column (default v_2)");
  conj->callback([&] {
    action = [&] {
      SuiteConfig c = suite_config(g);
      if (!upto_text.empty()) c.upto = parse_index(upto_text);
      return emit(build_suite("conjugation", c), g, out);
    };
  });

  // report column-norms | rows | nonadjoint
  auto* report = app.add_subcommand("report", "finite-section and residual reports");
  report->require_subcommand(1);
  std::string report_upto;
  std::string row_text = "0";
  long s_max = 1;
  long n_max = 3;
  auto* norms = report->add_subcommand("column-norms", "l1 norms of S columns");
  norms->add_option("--upto", report_upto, "last column (default v_2)");
  norms->callback([&] {
    action = [&] {
      SuiteConfig c = suite_config(g);
      if (!report_upto.empty()) c.upto = parse_index(report_upto);
      return emit(build_suite("norms", c), g, out);
    };
  });
  auto* rows = report->add_subcommand("rows", "entries of one row of S");
  rows->add_option("--row", row_text, "row index");
  rows->add_option("--upto", report_upto, "last column (default v_2)");
  rows->callback([&] {
    action = [&] {
      SuiteConfig c = suite_config(g);
      c.row = parse_index(row_text);
      if (!report_upto.empty()) c.upto = parse_index(report_upto);
      return emit(build_suite("rows", c), g, out);
    };
  });
  auto* nonadj = report->add_subcommand("nonadjoint", "residual norms T^(v_s+1) f + a_s e");
  nonadj->add_option("--s-max", s_max)->check(CLI::PositiveNumber);
  nonadj->add_option("--n-max", n_max)->check(CLI::PositiveNumber);
  nonadj->callback([&] {
    action = [&] {
      const Resolved r = resolve_schedule(g);
      Report rep = nonadjoint_report(std::make_shared<const BasisSystem>(r.schedule), s_max, n_max, g.precision);
      add_config_header(rep, g);
      return emit(rep, g, out);
    };
  });

  // witness build | check-prop22 | separation | constant-c | split
  auto* witness = app.add_subcommand("witness", "the vector x_infinity and its checks");
  witness->require_subcommand(1);
  WitnessFlags wf;
  auto* build = witness->add_subcommand("build", "choose m, r, j, p and bound the tail");
  add_witness_flags(build, wf);
  build->callback([&] {
    action = [&] {
      const WitnessParams w = build_witness(g, wf);
      Report rep = check_recurrences(w);
      const Truncation t = x_infinity_truncation(w, 0, g.precision);
      if (t.tail.first_term) rep.note("||p_0 z_0|| = " + t.tail.first_term->to_string(12));
      rep.note(std::string("tail ") + (t.tail.certified ? "certified: " : "not certified: ") + t.tail.note);
      if (t.tail.bound) rep.note("tail bound " + t.tail.bound->to_string(12));
      add_config_header(rep, g);
      return emit(rep, g, out);
    };
  });
  auto add_properties = [&](const std::string& name) {
    auto* cmd = witness->add_subcommand(name, "orbit, support and interval properties of x_i and z_i");
    add_witness_flags(cmd, wf);
    cmd->add_option("--samples", wf.samples, "sampled pairs for the support checks")->check(CLI::PositiveNumber);
    cmd->callback([&] {
      action = [&] {
        Report rep = check_properties(build_witness(g, wf), {wf.samples, g.seed});
        add_config_header(rep, g);
        return emit(rep, g, out);
      };
    });
  };
  add_properties("check-prop22");
  add_properties("check-properties");
  auto* sep = witness->add_subcommand("separation", "distance from e_0 to combinations of the orbit");
  add_witness_flags(sep, wf);
  sep->add_option("--N", wf.N, "largest power of S")->check(CLI::NonNegativeNumber);
  sep->add_option("--samples", wf.samples, "random coefficient vectors")->check(CLI::NonNegativeNumber);
  sep->callback([&] {
    action = [&] {
      Report rep = separation_check(build_witness(g, wf), {wf.N, wf.samples, g.seed, g.precision});
      add_config_header(rep, g);
      return emit(rep, g, out);
    };
  });
  auto* cc = witness->add_subcommand("constant-c", "the separation constant C by least absolute deviations");
  add_witness_flags(cc, wf);
  cc->callback([&] {
    action = [&] {
      const WitnessParams w = build_witness(g, wf);
      const LadSolution sol = constant_c(w, g.precision);
      Report rep;
      rep.name = "constant-c";
      rep.check("certified", sol.certified,
                "C = " + sol.value.to_string(20) + ", duality gap " + sol.duality_gap.to_string(6) + ", " +
                    std::to_string(sol.pivots) + " pivots");
      Table& t = rep.table("coefficients", {"j", "gamma"});
      for (std::size_t k : sol.active) t.rows.push_back({format_int(w.j[0] + Int(static_cast<unsigned long>(k))),
                                                         sol.coefficients[k].to_string(20)});
      add_config_header(rep, g);
      return emit(rep, g, out);
    };
  });
  auto* split = witness->add_subcommand("split", "support decomposition of one induction step");
  add_witness_flags(split, wf);
  split->add_option("--level", wf.level, "level i")->check(CLI::NonNegativeNumber);
  split->callback([&] {
    action = [&] {
      Report rep = check_lemma_split(build_witness(g, wf), wf.level, {8, g.seed, g.precision});
      add_config_header(rep, g);
      return emit(rep, g, out);
    };
  });

  // suite run <name>
  auto* suite = app.add_subcommand("suite", "named verification suites");
  suite->require_subcommand(1);
  std::string suite_name;
  auto* run = suite->add_subcommand("run", "run a suite and write out/<suite>/");
  run->add_option("name", suite_name, "conjugation, norms, rows, witness, separation, nonadjoint or all")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  run->callback([&] {
    action = [&] {
      SuiteConfig c = suite_config(g);
      const int status = run_suite(suite_name, c);
      std::ifstream in(c.out_dir / suite_name / "report.txt");
      out << in.rdbuf();
      return status;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return action ? action() : kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace readop::cli
