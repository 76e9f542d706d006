// qforma: moment bounds and conservative structure tests for centered
// quadratic forms x^T A x - tr(A).
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "qforma/bounds.hpp"
#include "qforma/error.hpp"
#include "qforma/hyptest.hpp"
#include "qforma/matrix.hpp"
#include "qforma/montecarlo.hpp"
#include "qforma/report.hpp"
#include "qforma/sparse_class.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace qforma;

// Compiled-in defaults; `defaults` prints exactly this struct.
struct Options {
  std::string gen;          // identity | ones | zero | block | sparse
  std::string matrix_path;  // dense CSV or sparse triplet file
  std::string dist = "gaussian";
  std::string method = "theorem1";
  std::string format = "json";
  std::string out;
  std::string family = "block";
  std::string pair = "block";  // test: block | sparse
  std::string structure = "block";
  std::string under = "h0";
  std::string data_path, matrix_a, matrix_b, config_path;
  int p = 2, k = 1, m = 2;
  long long n = 100;
  long long samples = kDefaultSamples;  // MC draws / sample size
  double q = 4.0, alpha = 0.05, r = 0.5, mp = 1.0, c0 = 1.0, cq = 1.0;
  std::uint64_t seed = 0;
  std::vector<long long> grid;  // compare-scaling dimensions
};

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) fail(ErrorKind::bad_input, "cannot write '" + out_path + "'");
  f << text;
  if (!f) fail(ErrorKind::bad_input, "write failed for '" + out_path + "'");
}

std::string align_rows(
    const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [key, value] : rows) width = std::max(width, key.size());
  std::string text;
  for (const auto& [key, value] : rows) {
    text += key;
    text.append(width - key.size() + 2, ' ');
    text += value;
    text += '\n';
  }
  return text;
}

std::vector<std::pair<std::string, std::string>> breakdown_rows(
    const BoundBreakdown& b, const std::string& prefix = "") {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back(prefix + "method", b.method);
  for (const auto& [name, value] : b.terms)
    rows.emplace_back(prefix + name, fmt_num(value));
  rows.emplace_back(prefix + "structural_total", fmt_num(b.structural_total));
  rows.emplace_back(prefix + "cq", fmt_num(b.cq));
  rows.emplace_back(prefix + "log_scale", b.log_scale ? "true" : "false");
  return rows;
}

SymmetricMatrix resolve_matrix(const Options& o) {
  if (!o.matrix_path.empty()) return read_matrix(o.matrix_path);
  if (o.gen.empty())
    fail(ErrorKind::bad_input, "need a matrix source: --matrix FILE or --gen NAME");
  if (o.gen == "identity") return gen_identity(o.p);
  if (o.gen == "ones") return gen_ones(o.p);
  if (o.gen == "zero") return gen_zero(o.p);
  if (o.gen == "block") return gen_block_ones(o.m, o.k);
  if (o.gen == "sparse") return gen_sparse_member(o.p, o.r, o.mp, o.c0, o.seed);
  fail(ErrorKind::bad_input, "unknown generator '" + o.gen +
                                 "' (identity, ones, zero, block, sparse)");
}

// "unit" keeps every moment constant at 1 (structural bounds); any other
// name is a component law with constants filled in analytically.
MomentProfile resolve_profile(const std::string& dist, double q) {
  if (dist == "unit") return unit_profile(q);
  return analytic_profile(ComponentDistribution::parse(dist), q);
}

// ---- bound ------------------------------------------------------------------

int cmd_bound(const Options& o) {
  std::string text;
  if (o.method == "corollary1") {
    const Corollary1Bound b =
        corollary1_bound(o.p, o.q, o.r, o.mp, o.c0, o.cq);
    if (o.format == "table") {
      auto rows = breakdown_rows(b.raw, "raw.");
      const auto tracked = breakdown_rows(b.tracked, "tracked.");
      rows.insert(rows.end(), tracked.begin(), tracked.end());
      text = align_rows(rows);
    } else {
      text = to_json(b);
    }
  } else if (o.method == "theorem1" || o.method == "bai_silverstein" ||
             o.method == "compare") {
    const SymmetricMatrix a = resolve_matrix(o);
    const MomentProfile prof = resolve_profile(o.dist, o.q);
    if (o.method == "compare") {
      const CompareReport rep = compare_bounds(a, prof);
      if (o.format == "table") {
        text = align_rows(
            {{"theorem1_total", fmt_num(rep.theorem1.structural_total)},
             {"bai_silverstein_total",
              fmt_num(rep.bai_silverstein.structural_total)},
             {"ratio", fmt_num(rep.ratio)}});
      } else {
        text = to_json(rep);
      }
    } else {
      const BoundBreakdown b = o.method == "theorem1"
                                   ? theorem1_bound(a, prof, o.cq)
                                   : bai_silverstein_bound(a, prof, o.cq);
      text = o.format == "table" ? align_rows(breakdown_rows(b)) : to_json(b);
    }
  } else {
    fail(ErrorKind::bad_input,
         "unknown method '" + o.method +
             "' (theorem1, bai_silverstein, corollary1, compare)");
  }
  emit(text, o.out);
  return 0;
}

// ---- compare-scaling ---------------------------------------------------------

SymmetricMatrix family_matrix(const Options& o, int p) {
  if (o.family == "identity") return gen_identity(p);
  if (o.family == "ones") return gen_ones(p);
  if (o.family == "block") {
    const int s = static_cast<int>(std::lround(std::sqrt(double(p))));
    if (s * s != p || s < 2 || s % 2 != 0)
      fail(ErrorKind::domain,
           "block family needs p a perfect square with an even square root");
    return gen_block_ones(s, s);
  }
  if (o.family == "sparse") {
    const double mp = std::sqrt(static_cast<double>(p));
    return gen_sparse_member(p, o.r, mp, o.c0,
                             o.seed + static_cast<std::uint64_t>(p));
  }
  fail(ErrorKind::bad_input, "unknown family '" + o.family +
                                 "' (identity, ones, block, sparse)");
}

int cmd_compare_scaling(Options& o) {
  if (o.grid.empty()) o.grid = {16, 64, 256, 1024};
  const MomentProfile prof = resolve_profile(o.dist, o.q);
  json jrows = json::array();
  std::vector<std::pair<std::string, std::string>> trows;
  trows.emplace_back("p", "theorem1  bai_silverstein  ratio");
  std::vector<double> ratios;
  for (long long pll : o.grid) {
    if (pll < 1 || pll > kMaxDim)
      fail(ErrorKind::size, "grid dimension out of range");
    const int p = static_cast<int>(pll);
    const CompareReport rep = compare_bounds(family_matrix(o, p), prof);
    ratios.push_back(rep.ratio);
    jrows.push_back(json{{"p", p},
                         {"theorem1", rep.theorem1.structural_total},
                         {"bai_silverstein",
                          rep.bai_silverstein.structural_total},
                         {"ratio", rep.ratio}});
    trows.emplace_back(std::to_string(p),
                       fmt_num(rep.theorem1.structural_total) + "  " +
                           fmt_num(rep.bai_silverstein.structural_total) +
                           "  " + fmt_num(rep.ratio));
  }
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
    if (!(ratios[i + 1] < ratios[i])) decreasing = false;

  std::string text;
  if (o.format == "table") {
    trows.emplace_back("ratio_decreasing", decreasing ? "yes" : "no");
    text = align_rows(trows);
  } else {
    text = json{{"family", o.family},
                {"q", o.q},
                {"dist", o.dist},
                {"rows", jrows},
                {"ratio_decreasing", decreasing}}
               .dump(2) +
           "\n";
  }
  emit(text, o.out);
  return 0;
}

// ---- verify -------------------------------------------------------------------

int cmd_verify(const Options& o) {
  const SymmetricMatrix a = resolve_matrix(o);
  const ComponentDistribution dist = ComponentDistribution::parse(o.dist);
  const std::vector<double> values =
      sample_quadform_deviations(a, dist, o.samples, o.seed);
  const EmpiricalMoment emp =
      empirical_moment_from_stream(values, o.q, o.seed);

  json rep;
  rep["p"] = a.dim();
  rep["dist"] = dist.name();
  rep["q"] = o.q;
  rep["empirical"] = json::parse(to_json(emp));
  bool pass = true;
  if (a.dim() <= 12 && dist.tag == ComponentDistribution::Tag::rademacher) {
    const double oracle = exact_moment_rademacher(a, o.q);
    const bool ok =
        std::fabs(emp.estimate - oracle) <= 5.0 * emp.std_error + 1e-12;
    rep["oracle"] = oracle;
    rep["oracle_within_5se"] = ok;
    pass = pass && ok;
  } else {
    rep["oracle"] = nullptr;
    rep["oracle_within_5se"] = nullptr;
  }
  const MomentProfile prof = analytic_profile(dist, o.q);
  rep["theorem1"] = json::parse(to_json(theorem1_bound(a, prof, o.cq)));
  rep["bai_silverstein"] =
      json::parse(to_json(bai_silverstein_bound(a, prof, o.cq)));
  json marks = json::array();
  for (double r : {0.5, 1.0, 2.0}) {
    const MarkovCheck chk = markov_tail_check(values, o.q, r);
    marks.push_back(json{{"r", r},
                         {"tail_fraction", chk.tail_fraction},
                         {"moment_over_rq", chk.moment_over_rq},
                         {"holds", chk.holds}});
    pass = pass && chk.holds;
  }
  rep["markov"] = std::move(marks);
  rep["pass"] = pass;
  emit(rep.dump(2) + "\n", o.out);
  return 0;
}

// ---- test ---------------------------------------------------------------------

HypothesisPair resolve_pair(const Options& o) {
  if (!o.matrix_a.empty() || !o.matrix_b.empty()) {
    if (o.matrix_a.empty() || o.matrix_b.empty())
      fail(ErrorKind::bad_input, "need both --matrix-a and --matrix-b");
    SymmetricMatrix a = read_matrix(o.matrix_a);
    SymmetricMatrix b = read_matrix(o.matrix_b);
    if (o.structure == "block")
      return HypothesisPair::block_pair(std::move(a), std::move(b), o.m, o.k);
    if (o.structure == "sparse") {
      if (!(a == gen_identity(a.dim())))
        fail(ErrorKind::bad_input,
             "the sparse structure fixes the null precision at the identity");
      return HypothesisPair::sparse_pair(std::move(b), o.r, o.mp, o.c0);
    }
    fail(ErrorKind::bad_input,
         "unknown structure '" + o.structure + "' (block, sparse)");
  }
  if (o.pair == "block") return paper_block_pair(o.m, o.k);
  if (o.pair == "sparse")
    return HypothesisPair::sparse_pair(
        gen_sparse_member(o.p, o.r, o.mp, o.c0, o.seed), o.r, o.mp, o.c0);
  fail(ErrorKind::bad_input,
       "unknown pair '" + o.pair + "' (block, sparse)");
}

int cmd_test(const Options& o) {
  const HypothesisPair pair = resolve_pair(o);
  DataMatrix data;
  if (!o.data_path.empty()) {
    data = read_data_csv(o.data_path);
  } else {
    const ComponentDistribution dist = ComponentDistribution::parse(o.dist);
    const SymmetricMatrix& omega = o.under == "h1" ? pair.b : pair.a;
    if (o.under != "h0" && o.under != "h1")
      fail(ErrorKind::bad_input, "--under must be h0 or h1");
    data = simulate_observations(omega, dist, o.n, o.seed);
  }
  TestParams params;
  params.method = parse_test_method(o.method);
  params.alpha = o.alpha;
  params.q = o.q;
  params.cq = o.cq;
  params.n_draws = o.samples;
  params.seed = o.seed;
  if (params.method == TestMethod::conservative_theorem1)
    params.prof = resolve_profile(o.dist, o.q);
  const TestOutcome outcome = run_test(data, pair, params);
  emit(to_json(outcome), o.out);
  return outcome.reject ? 1 : 0;
}

// ---- simulate / percentile ------------------------------------------------------

int cmd_simulate(const Options& o) {
  if (o.out.empty())
    fail(ErrorKind::bad_input, "simulate needs --out FILE for the data CSV");
  const SymmetricMatrix omega = resolve_matrix(o);
  const ComponentDistribution dist = ComponentDistribution::parse(o.dist);
  write_data_csv(o.out, simulate_observations(omega, dist, o.n, o.seed));
  return 0;
}

int cmd_percentile(const Options& o) {
  const SymmetricMatrix g = resolve_matrix(o);
  const double v =
      gaussian_null_percentile(g, o.n, o.alpha, o.samples, o.seed);
  const json rep{{"critical_value", v},
                 {"alpha", o.alpha},
                 {"n", o.n},
                 {"n_draws", o.samples},
                 {"seed", o.seed}};
  emit(rep.dump(2) + "\n", o.out);
  return 0;
}

// ---- defaults -------------------------------------------------------------------

int cmd_defaults(const Options& o) {
  const Options d;  // compiled-in values
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"alpha", fmt_short(d.alpha)},
      {"c0", fmt_short(d.c0)},
      {"cq", fmt_short(d.cq)},
      {"dist", d.dist},
      {"family", d.family},
      {"format", d.format},
      {"k", std::to_string(d.k)},
      {"m", std::to_string(d.m)},
      {"method", d.method},
      {"mp", fmt_short(d.mp)},
      {"n", std::to_string(d.n)},
      {"p", std::to_string(d.p)},
      {"pair", d.pair},
      {"q", fmt_short(d.q)},
      {"r", fmt_short(d.r)},
      {"samples", std::to_string(d.samples)},
      {"seed", std::to_string(d.seed)},
      {"structure", d.structure},
      {"under", d.under},
  };
  std::string text;
  if (o.format == "table") {
    for (const auto& [key, value] : rows) text += key + "=" + value + "\n";
  } else {
    json j;
    for (const auto& [key, value] : rows) j[key] = value;
    text = j.dump(2) + "\n";
  }
  emit(text, o.out);
  return 0;
}

// Flat key=value config: '#' comments, blank lines ignored, unknown or
// duplicate keys rejected, command-line flags (and env) take precedence.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::bad_input, "cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = CLI::detail::trim_copy(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::bad_input,
           "config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = CLI::detail::trim_copy(t.substr(0, eq));
    std::string value = CLI::detail::trim_copy(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty())
      fail(ErrorKind::bad_input,
           "config line " + std::to_string(lineno) + ": empty key");
    if (key == "config")
      fail(ErrorKind::bad_input, "config file cannot set --config");
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      fail(ErrorKind::bad_input, "duplicate config key: " + key);
    seen.push_back(key);
    pairs.emplace_back(key, value);
  }
  for (const auto& [key, value] : pairs) {
    CLI::Option* op = sub->get_option_no_throw("--" + key);
    if (op == nullptr) fail(ErrorKind::bad_input, "unknown config key: " + key);
    if (op->count() > 0) continue;  // flag or env already set it
    try {
      op->add_result(value);
      op->run_callback();
    } catch (const CLI::Error& e) {
      fail(ErrorKind::bad_input, "config key " + key + ": " + e.what());
    }
  }
}

int run(int argc, char** argv) {
  Options o;
  CLI::App app{
      "moment bounds and conservative structure tests for centered "
      "quadratic forms x^T A x - tr(A)"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool with_seed = true) {
    if (with_seed)
      sub->add_option("--seed", o.seed, "RNG seed (env QFORMA_SEED)")
          ->envname("QFORMA_SEED");
    sub->add_option("--out", o.out, "write output to FILE instead of stdout");
    sub->add_option("--format", o.format, "json | table");
    sub->add_option("--config", o.config_path,
                    "flat key=value file; command-line flags override it");
  };
  auto add_matrix_source = [&](CLI::App* sub) {
    sub->add_option("--gen", o.gen,
                    "matrix generator: identity | ones | zero | block | sparse");
    sub->add_option("--matrix", o.matrix_path,
                    "matrix file (dense CSV or sparse triplet)");
    sub->add_option("--p", o.p, "dimension for generators");
    sub->add_option("--k", o.k, "block size");
    sub->add_option("--m", o.m, "number of blocks");
    sub->add_option("--r", o.r, "sparsity exponent, 0 <= r < 1");
    sub->add_option("--mp", o.mp, "column-mass budget M_p");
    sub->add_option("--c0", o.c0, "spectral radius cap C0");
  };

  CLI::App* bound = app.add_subcommand(
      "bound", "closed-form moment bounds for one matrix");
  add_matrix_source(bound);
  bound->add_option("--q", o.q, "moment order, q > 2");
  bound->add_option("--cq", o.cq, "generic constant multiplier");
  bound->add_option("--dist", o.dist,
                    "component law for the moment constants, or 'unit'");
  bound->add_option("--method", o.method,
                    "theorem1 | bai_silverstein | corollary1 | compare");
  add_common(bound);

  CLI::App* scaling = app.add_subcommand(
      "compare-scaling", "both bounds across a dimension grid");
  scaling->add_option("--family", o.family,
                      "identity | ones | block | sparse");
  scaling->add_option("--p", o.grid, "grid dimension (repeatable)");
  scaling->add_option("--q", o.q, "moment order, q > 2");
  scaling->add_option("--cq", o.cq, "generic constant multiplier");
  scaling->add_option("--dist", o.dist, "component law or 'unit'");
  scaling->add_option("--r", o.r, "sparse family: sparsity exponent");
  scaling->add_option("--c0", o.c0, "sparse family: spectral radius cap");
  add_common(scaling);

  CLI::App* verify = app.add_subcommand(
      "verify", "empirical moments against oracles, bounds, and tail checks");
  add_matrix_source(verify);
  verify->add_option("--q", o.q, "moment order, q > 2");
  verify->add_option("--cq", o.cq, "generic constant multiplier");
  verify->add_option("--dist", o.dist, "component law to sample");
  verify->add_option("--samples", o.samples, "Monte Carlo sample count");
  add_common(verify);

  CLI::App* test = app.add_subcommand(
      "test", "quasi-likelihood-ratio structure test (exit 1 on reject)");
  test->add_option("--data", o.data_path, "observation CSV ('n p' header)");
  test->add_option("--pair", o.pair,
                   "generated hypothesis pair: block | sparse");
  test->add_option("--matrix-a", o.matrix_a, "null precision file");
  test->add_option("--matrix-b", o.matrix_b, "alternative precision file");
  test->add_option("--structure", o.structure,
                   "structure tag for file pairs: block | sparse");
  test->add_option("--m", o.m, "number of blocks");
  test->add_option("--k", o.k, "block size");
  test->add_option("--p", o.p, "dimension for the sparse pair");
  test->add_option("--r", o.r, "sparsity exponent");
  test->add_option("--mp", o.mp, "column-mass budget M_p");
  test->add_option("--c0", o.c0, "spectral radius cap C0");
  test->add_option("--q", o.q, "moment order for conservative regions");
  test->add_option("--cq", o.cq, "generic constant multiplier");
  test->add_option("--alpha", o.alpha, "test level in (0,1)");
  test->add_option("--n", o.n, "observations to simulate");
  test->add_option("--dist", o.dist, "component law for simulation");
  test->add_option("--under", o.under, "simulate under h0 | h1");
  test->add_option("--method", o.method,
                   "gaussian_mc_percentile | conservative_theorem1 | "
                   "conservative_corollary1");
  test->add_option("--samples", o.samples, "null-percentile draw count");
  add_common(test);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "draw observations for a precision matrix into a CSV");
  add_matrix_source(simulate);
  simulate->add_option("--dist", o.dist, "component law to sample");
  simulate->add_option("--n", o.n, "number of observations");
  add_common(simulate);

  CLI::App* percentile = app.add_subcommand(
      "percentile", "Monte Carlo null quantile for a contrast matrix G");
  add_matrix_source(percentile);
  percentile->add_option("--alpha", o.alpha, "upper-tail level in (0,1)");
  percentile->add_option("--n", o.n, "sample size of the null law");
  percentile->add_option("--samples", o.samples, "number of draws");
  add_common(percentile);

  CLI::App* defaults =
      app.add_subcommand("defaults", "print every compiled-in default");
  add_common(defaults, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!o.config_path.empty())
    apply_config_file(app.get_subcommands().front(), o.config_path);

  if (bound->parsed()) return cmd_bound(o);
  if (scaling->parsed()) {
    if (!scaling->count("--format")) o.format = "table";
    return cmd_compare_scaling(o);
  }
  if (verify->parsed()) return cmd_verify(o);
  if (test->parsed()) {
    if (!test->count("--method")) o.method = "gaussian_mc_percentile";
    return cmd_test(o);
  }
  if (simulate->parsed()) return cmd_simulate(o);
  if (percentile->parsed()) return cmd_percentile(o);
  if (defaults->parsed()) {
    if (!defaults->count("--format")) o.format = "table";
    return cmd_defaults(o);
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qforma::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == qforma::ErrorKind::bad_input ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
