#include "mcf/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mcf/drift.hpp"
#include "mcf/field.hpp"
#include "mcf/flow.hpp"
#include "mcf/format.hpp"
#include "mcf/gaussian.hpp"
#include "mcf/rigidity.hpp"
#include "mcf/test_family.hpp"

namespace mcf {

namespace fs = std::filesystem;

const char* command_name(Command c) {
  switch (c) {
    case Command::verify: return "verify";
    case Command::entropy: return "entropy";
    case Command::flow: return "flow";
    case Command::classify: return "classify";
    case Command::gap: return "gap";
    case Command::bounds: return "bounds";
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::verify, Command::entropy, Command::flow, Command::classify, Command::gap,
                    Command::bounds})
    if (name == command_name(c)) return c;
  throw std::invalid_argument("unknown command '" + name + "'");
}

namespace {

template <class T>
T parse_number(const std::string& value, const std::string& source, int line, int column) {
  T v{};
  const char* b = value.data();
  const char* e = b + value.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (value.empty() || ec != std::errc() || ptr != e)
    throw ParseError(source, line, column + static_cast<int>(ptr - b), "invalid number '" + value + "'");
  return v;
}

std::string trim(const std::string& s, size_t& offset) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) {
    offset = s.size();
    return "";
  }
  size_t b = s.find_last_not_of(" \t\r");
  offset = a;
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& source,
                   int line, int key_column, int value_column) {
  auto real = [&](double& target) { target = parse_number<double>(value, source, line, value_column); };
  auto whole = [&](int& target) { target = parse_number<int>(value, source, line, value_column); };
  if (key == "command") {
    try {
      cfg.command = parse_command(value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line, value_column, e.what());
    }
  } else if (key == "builtin") {
    if (value != "cylinder" && value != "sphere" && value != "circle" && value != "plane")
      throw ParseError(source, line, value_column, "builtin must be cylinder, sphere, circle or plane");
    cfg.builtin = value;
  } else if (key == "input") {
    cfg.input = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "k") {
    whole(cfg.k);
  } else if (key == "n") {
    whole(cfg.n);
  } else if (key == "amplitude") {
    real(cfg.amplitude);
  } else if (key == "wavenumber") {
    whole(cfg.wavenumber);
  } else if (key == "resolution") {
    whole(cfg.resolution);
  } else if (key == "R") {
    real(cfg.R);
  } else if (key == "delta0") {
    real(cfg.delta0);
  } else if (key == "C0") {
    real(cfg.C0);
  } else if (key == "lambda0") {
    real(cfg.lambda0);
  } else if (key == "theta") {
    real(cfg.theta);
  } else if (key == "rounds") {
    whole(cfg.rounds);
  } else if (key == "ds") {
    real(cfg.ds);
  } else if (key == "s_max") {
    real(cfg.s_max);
  } else if (key == "cadence") {
    real(cfg.cadence);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(value, source, line, value_column);
  } else if (key == "threads") {
    whole(cfg.threads);
  } else {
    throw ParseError(source, line, key_column, "unknown key '" + key + "'");
  }
}

void parse_config(std::istream& in, const std::string& source, RunConfig& cfg) {
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = raw.substr(0, raw.find('#'));
    size_t lead = 0;
    if (trim(text, lead).empty()) continue;
    size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError(source, line, static_cast<int>(lead) + 1, "expected 'key = value'");
    size_t koff = 0, voff = 0;
    std::string key = trim(text.substr(0, eq), koff);
    std::string value = trim(text.substr(eq + 1), voff);
    if (key.empty()) throw ParseError(source, line, static_cast<int>(eq) + 1, "missing key before '='");
    if (value.empty()) throw ParseError(source, line, static_cast<int>(eq) + 2, "missing value after '='");
    apply_setting(cfg, key, value, source, line, static_cast<int>(koff) + 1, static_cast<int>(eq + 1 + voff) + 1);
  }
}

void read_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open config file");
  parse_config(in, path, cfg);
}

void validate_config(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Rejection("config", std::string(name) + " must be positive");
  };
  positive(c.R, "R");
  positive(c.delta0, "delta0");
  positive(c.C0, "C0");
  positive(c.lambda0, "lambda0");
  positive(c.theta, "theta");
  positive(c.s_max, "s_max");
  positive(c.cadence, "cadence");
  if (c.ds < 0.0) throw Rejection("config", "ds must be nonnegative");
  if (c.resolution < 64) throw Rejection("config", "resolution must be at least 64");
  if (c.n < 1 || c.n > 8) throw Rejection("config", "n must lie in [1, 8]");
  if (c.k < 0 || c.k > c.n) throw Rejection("config", "k must lie in [0, n]");
  if (c.rounds < 1) throw Rejection("config", "rounds must be at least 1");
  if (c.threads < 1) throw Rejection("config", "threads must be at least 1");
}

namespace {

GeneralizedCylinderSpec builtin_spec(const RunConfig& c) {
  if (c.builtin == "sphere") return {c.n, c.n};
  if (c.builtin == "circle") return {1, 1};
  if (c.builtin == "plane") return {0, c.n};
  return {c.k, c.n};
}

DiscreteHypersurface apply_perturbation(const DiscreteHypersurface& s, const RunConfig& c) {
  if (c.amplitude == 0.0) return s;
  return perturb_normal(s, profile_wave(s, c.amplitude, c.wavenumber), true);
}

// Same samples as the analytic surface, but with geometry recomputed from
// them by finite differences.
DiscreteHypersurface discretized(const DiscreteHypersurface& analytic) {
  ProfileCurve pc{profile_points(analytic), analytic.topology};
  return build_from_profile(pc, analytic.signature);
}

// One value per identity; NaN when the identity refused the surface and
// `skipped` when it does not apply (the H-quotient identities need H != 0).
struct IdentityValues {
  double shrinker = 0.0;
  double stability_H = 0.0;
  double stability_A = 0.0;
  double quotient = 0.0;
  double simons_tau = 0.0;
  double simons_norm = 0.0;
  bool skipped = false;
};

constexpr double kAxisMargin = 0.5;
constexpr double kExactTolerance = 1e-10;
constexpr double kMinimumOrder = 1.75;

IdentityValues identity_values(const DiscreteHypersurface& s) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  IdentityValues v;
  v.shrinker = shrinker_residual(s).norms.sup;
  const RotationSignature sig = s.signature;
  OperatorStencil st = OperatorStencil::assemble(s);
  Field H = mean_curvature_field(s), A = second_fundamental_form(s);
  Field LH = stability_operator(s, H), LA = stability_operator(s, A);
  double max_H = 0.0;
  for (int i : st.interior()) {
    max_H = std::max(max_H, std::abs(H.profile[i]));
    if (axis_distance(s, i) < kAxisMargin) continue;
    v.stability_H = std::max(v.stability_H, std::abs(LH.profile[i] - H.profile[i]));
    double d = std::abs(LA.profile[i] - A.profile[i]);
    if (sig.p > 0) d = std::max(d, std::abs(LA.first[i] - A.first[i]));
    if (sig.q > 0) d = std::max(d, std::abs(LA.second[i] - A.second[i]));
    v.stability_A = std::max(v.stability_A, d);
  }
  if (max_H < SimonsOptions{}.g_min) {
    v.skipped = true;
    return v;
  }
  try {
    v.quotient = weighted_quotient_laplacian(s, A, H.profile).sup_difference;
  } catch (const Rejection&) {
    v.quotient = nan;
  }
  try {
    SimonsReport sr = simons_identity_check(s);
    v.simons_tau = sr.res1.sup;
    v.simons_norm = sr.res2.sup;
  } catch (const Rejection&) {
    v.simons_tau = v.simons_norm = nan;
  }
  return v;
}

struct IdentityRow {
  const char* name;
  double IdentityValues::*member;
  bool needs_H;
};

const IdentityRow kIdentities[] = {
    {"shrinker_residual", &IdentityValues::shrinker, false},
    {"stability_H", &IdentityValues::stability_H, false},
    {"stability_A", &IdentityValues::stability_A, false},
    {"quotient_rule", &IdentityValues::quotient, true},
    {"simons_tau", &IdentityValues::simons_tau, true},
    {"simons_norm", &IdentityValues::simons_norm, true},
};

struct Artifacts {
  fs::path dir;
  std::string seed;
  RunResult* result;
  void text(const std::string& name, const std::string& body) {
    fs::path p = dir / name;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << body;
    if (!out) throw fs::filesystem_error("cannot write artifact", p, std::make_error_code(std::errc::io_error));
    result->artifacts.push_back(name);
  }
  void csv(const std::string& name, CsvTable t) {
    t.header.push_back("seed");
    for (auto& r : t.rows) r.push_back(seed);
    std::ostringstream os;
    t.write(os);
    text(name, os.str());
  }
};

void fail(RunResult& r, const std::string& check) {
  if (r.status == 0) {
    r.status = 1;
    r.failing_check = check;
  }
}

std::string config_block(const RunConfig& c) {
  std::ostringstream o;
  o << "run:\n";
  o << "  command: " << command_name(c.command) << '\n';
  if (!c.input.empty()) {
    o << "  input: " << c.input << '\n';
  } else {
    o << "  builtin: " << c.builtin << '\n';
    o << "  k: " << builtin_spec(c).k << '\n';
    o << "  n: " << builtin_spec(c).n << '\n';
    o << "  resolution: " << c.resolution << '\n';
  }
  o << "  amplitude: " << num(c.amplitude) << '\n';
  o << "  wavenumber: " << c.wavenumber << '\n';
  o << "  seed: " << c.seed << '\n';
  o << "  threads: " << c.threads << '\n';
  return o.str();
}

void run_verify(const RunConfig& c, const DiscreteHypersurface& s, Artifacts& art, RunResult& res,
                std::ostream& log) {
  CsvTable t;
  t.header = {"check", "norm", "h", "observed_order", "pass"};
  auto add = [&](const std::string& name, double value, double h, double order, const char* verdict) {
    t.rows.push_back({name, std::isfinite(value) ? num(value) : "", num(h), std::isfinite(order) ? num(order) : "",
                      verdict});
    log << "  " << name << "  " << (std::isfinite(value) ? num(value) : "rejected") << "  " << verdict << '\n';
    if (std::string(verdict) == "false") fail(res, name);
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool exact = s.provenance == Provenance::analytic;
  const IdentityValues base = identity_values(s);
  for (const IdentityRow& row : kIdentities) {
    if (row.needs_H && base.skipped) {
      add(row.name, nan, s.mean_spacing(), nan, "skipped");
      continue;
    }
    double v = base.*row.member;
    bool pass = exact ? v <= kExactTolerance : std::isfinite(v);
    add(row.name, v, s.mean_spacing(), nan, pass ? "true" : "false");
  }
  if (exact && c.input.empty() && c.amplitude == 0.0) {
    // Refinement study on finite-difference geometry of the same shrinker at
    // N/4, N/2 and N. The stability rows difference positions four times, so
    // finer levels run into roundoff.
    const GeneralizedCylinderSpec spec = builtin_spec(c);
    std::vector<IdentityValues> levels;
    std::vector<double> hs;
    for (int level = 0; level < 3; ++level) {
      DiscreteHypersurface d = discretized(analytic_shrinker(spec, (c.resolution >> 2) << level));
      levels.push_back(identity_values(d));
      hs.push_back(d.mean_spacing());
    }
    for (const IdentityRow& row : kIdentities) {
      for (int level = 0; level < 3; ++level) {
        const std::string name = std::string(row.name) + "/discretized";
        if (row.needs_H && levels[level].skipped) {
          add(name, nan, hs[level], nan, "skipped");
          continue;
        }
        double v = levels[level].*row.member;
        double order = nan;
        bool pass = std::isfinite(v) || level == 0;
        if (level > 0 && std::isfinite(v)) {
          double prev = levels[level - 1].*row.member;
          if (v <= kExactTolerance) {
            pass = true;
          } else if (std::isfinite(prev) && prev > kExactTolerance) {
            order = std::log(prev / v) / std::log(hs[level - 1] / hs[level]);
            pass = order >= kMinimumOrder;
          }
        }
        add(name, v, hs[level], order, pass ? "true" : "false");
      }
    }
  }
  art.csv("verify.csv", t);
}

void run_entropy(const RunConfig& c, const DiscreteHypersurface& s, Artifacts& art, RunResult& res,
                 std::ostream& log) {
  EntropySearch search;
  search.seed = c.seed;
  EntropyReport rep = entropy(s, search);
  const int dim = s.signature.ambient_dim();
  CsvTable t;
  for (int j = 0; j < dim; ++j) t.header.push_back("x0_" + std::to_string(j));
  t.header.push_back("t0");
  t.header.push_back("F");
  for (const TracePoint& tp : rep.trace) {
    std::vector<std::string> row;
    for (int j = 0; j < dim; ++j) row.push_back(num(tp.window.x0[j]));
    row.push_back(num(tp.window.t0));
    row.push_back(num(tp.value));
    t.rows.push_back(std::move(row));
  }
  art.csv("entropy_trace.csv", t);
  std::ostringstream o;
  o << config_block(c) << "entropy:\n";
  o << "  lambda: " << num(rep.lambda) << '\n';
  o << "  argmax_x0: [";
  for (int j = 0; j < dim; ++j) o << (j ? ", " : "") << num(rep.argmax.x0[j]);
  o << "]\n  argmax_t0: " << num(rep.argmax.t0) << '\n';
  o << "  tolerance_achieved: " << num(rep.tolerance_achieved) << '\n';
  o << "  budget_exhausted: " << (rep.budget_exhausted ? "true" : "false") << '\n';
  o << "  evaluations: " << rep.evaluations << '\n';
  if (s.topology == Topology::open && !s.flat_tail && (s.front != EndKind::axis || s.back != EndKind::axis)) {
    // Mass cut off beyond the last sample, bounded by the Gaussian tail estimate.
    double reach = 0.0;
    for (const Cell& cell : s.cells) reach = std::max(reach, cell.position.norm());
    o << "  truncation_radius: " << num(reach) << '\n';
    o << "  truncation_error_bar: "
      << num(std::pow(2.0, s.n() / 2.0) * std::exp(-reach * reach / 8.0) * c.lambda0) << '\n';
  }
  art.text("entropy.txt", o.str());
  log << "  lambda = " << num(rep.lambda) << "  t0 = " << num(rep.argmax.t0) << '\n';
  if (rep.budget_exhausted) fail(res, "entropy-search-budget");
}

void run_flow(const RunConfig& c, const DiscreteHypersurface& s, const DiscreteHypersurface& reference,
              Artifacts& art, RunResult& res, std::ostream& log) {
  FlowOptions opt;
  opt.max_step = c.ds;
  opt.cadence = c.cadence;
  const TestFunctionFamily fam = make_test_family(s.signature.ambient_dim());
  const std::vector<double> ref = test_integrals(reference, fam);
  int index = 0;
  FlowTrajectory traj = run_rescaled_flow(s, c.s_max, opt, [&](Snapshot& snap) {
    snap.dV = measure_distance_from_integrals(test_integrals(snap.surface, fam), ref, fam);
    char name[64];
    std::snprintf(name, sizeof name, "trajectory/snapshot_%04d.txt", index++);
    std::ostringstream o;
    o << "snapshot:\n  s: " << num(snap.s) << "\n  F: " << num(snap.F) << "\n  seed: " << c.seed << '\n';
    write_surface_document(o, snap.surface);
    art.text(name, o.str());
  });
  CsvTable t;
  t.header = {"s", "F", "minH", "maxA", "dV"};
  for (const Snapshot& sn : traj.snapshots)
    t.rows.push_back({num(sn.s), num(sn.F), num(sn.min_H), num(sn.max_A), num(sn.dV)});
  art.csv("flow.csv", t);
  MonotonicityAudit audit = monotonicity_audit(traj);
  std::ostringstream o;
  o << config_block(c) << "flow:\n";
  o << "  s_max: " << num(c.s_max) << '\n';
  o << "  cadence: " << num(c.cadence) << '\n';
  o << "  steps: " << traj.steps << '\n';
  o << "  smallest_step: " << num(traj.smallest_step) << '\n';
  o << "  largest_step: " << num(traj.largest_step) << '\n';
  o << "  singular: " << (traj.singular ? "true" : "false") << '\n';
  if (traj.singular) {
    o << "  singular_s: " << num(traj.singular_s) << '\n';
    o << "  singular_reason: " << traj.singular_reason << '\n';
  }
  o << "  remeshes:\n";
  for (const RemeshEvent& e : traj.remeshes)
    o << "    - s: " << num(e.s) << "\n      spacing_ratio: " << num(e.spacing_ratio) << '\n';
  o << "  monotonicity_max_increase: " << num(audit.max_increase) << '\n';
  o << "  monotonicity_pass: " << (audit.pass ? "true" : "false") << '\n';
  art.text("flow.txt", o.str());
  log << "  snapshots = " << traj.snapshots.size() << "  final F = " << num(traj.snapshots.back().F)
      << (traj.singular ? "  (singular: " + traj.singular_reason + ")" : "") << '\n';
  if (!audit.pass) fail(res, "monotonicity");
}

const char* cluster_name(Cluster c) {
  switch (c) {
    case Cluster::near_zero: return "near-zero";
    case Cluster::spherical: return "spherical";
    case Cluster::unclustered: return "unclustered";
  }
  return "?";
}

void run_classify(const RunConfig& c, const DiscreteHypersurface& s, Artifacts& art, RunResult& res,
                  std::ostream& log) {
  HypothesisConstants hc{c.delta0, c.C0, c.lambda0};
  RigidityCertificate cert = classify_cylinder(s, c.R, hc);
  std::ostringstream o;
  o << config_block(c) << "certificate:\n";
  o << "  R: " << num(cert.R) << '\n';
  o << "  delta0: " << num(hc.delta0) << '\n';
  o << "  C0: " << num(hc.C0) << '\n';
  o << "  lambda0: " << num(hc.lambda0) << '\n';
  o << "  min_H: " << num(cert.min_H) << '\n';
  o << "  max_A: " << num(cert.max_A) << '\n';
  o << "  eps_tau: " << num(cert.eps_tau) << '\n';
  o << "  tau_bound: " << num(cert.tau_bound) << '\n';
  o << "  cluster_gap: " << num(cert.cluster_gap) << '\n';
  o << "  trace_error: " << num(cert.trace_error) << '\n';
  o << "  residual: " << num(cert.residual) << '\n';
  o << "  checks:\n";
  for (const CheckOutcome& ch : cert.checks)
    o << "    - name: " << ch.name << "\n      pass: " << (ch.pass ? "true" : "false")
      << "\n      detail: " << ch.detail << '\n';
  o << "  verdict: " << cert.verdict() << '\n';
  if (!cert.failed_stage.empty()) o << "  failed_stage: " << cert.failed_stage << '\n';

  IterationOptions it;
  it.theta = c.theta;
  it.rounds = c.rounds;
  o << "iteration:\n";
  try {
    IterationTable table = iteration_experiment(s, c.R, it);
    CsvTable t;
    t.header = {"round", "R", "relaxed_radius", "sharp_radius", "relaxed_min_H", "relaxed_max_A", "sharp_min_H",
                "sharp_max_A", "relaxed_pass", "sharp_pass"};
    for (const IterationRound& r : table.rounds)
      t.rows.push_back({std::to_string(r.round), num(r.R), num(r.relaxed_radius), num(r.sharp_radius),
                        num(r.relaxed_min_H), num(r.relaxed_max_A), num(r.sharp_min_H), num(r.sharp_max_A),
                        r.relaxed_pass ? "true" : "false", r.sharp_pass ? "true" : "false"});
    art.csv("iteration.csv", t);
    o << "  rounds: " << table.rounds.size() << "\n  stop_reason: " << table.stop_reason << '\n';
  } catch (const Rejection& e) {
    o << "  rejected: " << e.what() << '\n';
  }
  art.text("certificate.txt", o.str());

  CsvTable t;
  t.header = {"cell", "u", "v"};
  const int n = s.n();
  for (int j = 0; j < n; ++j) t.header.push_back("eig_" + std::to_string(j));
  for (int j = 0; j < n; ++j) t.header.push_back("cluster_" + std::to_string(j));
  const SpectrumReport& sp = cert.spectrum;
  // Cell indices refer to the ball the classifier examined.
  DiscreteHypersurface ball = sp.cells.empty() ? s : restrict_to_ball(s, c.R - 2.0);
  for (size_t i = 0; i < sp.cells.size(); ++i) {
    const Cell& cell = ball.cells[sp.cells[i]];
    std::vector<std::string> row{std::to_string(sp.cells[i]), num(cell.position.x()), num(cell.position.y())};
    for (double e : sp.eigenvalues[i]) row.push_back(num(e));
    for (Cluster cl : sp.clusters[i]) row.push_back(cluster_name(cl));
    t.rows.push_back(std::move(row));
  }
  art.csv("spectrum.csv", t);
  log << "  verdict: " << cert.verdict();
  if (!cert.failed_stage.empty()) log << " (failed " << cert.failed_stage << ")";
  log << '\n';
  if (!cert.is_cylinder()) fail(res, cert.failed_stage.empty() ? "classification" : cert.failed_stage);
}

void run_gap(const RunConfig& c, Artifacts& art, RunResult& res, std::ostream& log) {
  GapOptions opt;
  opt.resolution = c.resolution;
  opt.lambda0 = c.lambda0;
  opt.s_budget = c.s_max;
  opt.flow.max_step = c.ds;
  opt.flow.cadence = c.cadence;
  const GeneralizedCylinderSpec spec = builtin_spec(c);
  GapReport rep = gap_experiment(spec.k, spec.n, {c.amplitude, c.wavenumber}, opt);
  CsvTable t;
  t.header = {"s_start", "s_end", "F_drop", "dV_drift"};
  for (const GapInterval& iv : rep.intervals)
    t.rows.push_back({num(iv.s_start), num(iv.s_end), num(iv.F_drop), num(iv.dV_drift)});
  art.csv("gap.csv", t);
  MonotonicityAudit audit = monotonicity_audit(rep.trajectory);
  std::ostringstream o;
  o << config_block(c) << "gap:\n";
  o << "  outcome: " << rep.outcome << '\n';
  o << "  initial_entropy: " << num(rep.initial_entropy) << '\n';
  o << "  final_F: " << num(rep.final_F) << '\n';
  o << "  final_dV: " << num(rep.final_dV) << '\n';
  o << "  entropy_drop: " << num(rep.entropy_drop) << '\n';
  o << "  steps: " << rep.trajectory.steps << '\n';
  if (rep.trajectory.singular) o << "  singular_s: " << num(rep.trajectory.singular_s) << '\n';
  o << "  monotonicity_pass: " << (audit.pass ? "true" : "false") << '\n';
  art.text("gap.txt", o.str());
  log << "  outcome: " << rep.outcome << "  entropy drop = " << num(rep.entropy_drop) << '\n';
  if (!audit.pass) fail(res, "monotonicity");
}

void run_bounds(const RunConfig& c, const DiscreteHypersurface& s, Artifacts& art, RunResult& res,
                std::ostream& log) {
  CsvTable t;
  t.header = {"check", "parameters", "lhs", "rhs", "pass"};
  auto add = [&](const std::string& name, const std::string& params, double lhs, double rhs, bool pass) {
    t.rows.push_back({name, params, num(lhs), num(rhs), pass ? "true" : "false"});
    if (!pass) fail(res, name);
  };
  auto guarded = [&](const std::string& name, const std::string& params, const std::function<void()>& body) {
    try {
      body();
    } catch (const Rejection& e) {
      t.rows.push_back({name, params, "", "", "rejected"});
      log << "  " << name << " " << params << " rejected: " << e.what() << '\n';
      fail(res, name);
    }
  };
  for (double R : {4.0, 5.0, 8.0}) {
    TailCheck tc = gaussian_tail(s, R, c.lambda0);
    add("gaussian_tail", "R=" + num(R), tc.tail, tc.bound, tc.pass);
  }
  for (auto [R, w] : std::vector<std::pair<double, double>>{{8, 1}, {10, 1}, {8, 2}}) {
    std::string params = "R=" + num(R) + " s=" + num(w);
    guarded("effective_bound", params, [&] {
      EffectiveBoundResult e = effective_gradient_bound(s, R, w);
      add("effective_bound", params, e.lhs, e.rhs, e.pass);
    });
  }
  if (shrinker_residual(s).norms.sup <= 1e-3) {
    const int dim = s.signature.ambient_dim();
    for (double a : {-0.5, -0.2, 0.2, 0.5, 1.0})
      for (double scale : {1.2, 1.4})
        for (int yi = 0; yi < 2; ++yi) {
          VecN y = VecN::Zero(dim);
          if (yi == 1) y[0] = 0.3;
          std::string params = "a=" + num(a) + " s=" + num(scale) + " y0=" + num(y[0]);
          guarded("rescaling", params, [&] {
            RescalingCheck rc = rescaling_inequality_check(s, y, a, scale);
            add("rescaling", params, rc.lhs, rc.rhs, rc.pass);
          });
        }
  }
  guarded("tau_certificate", "R=" + num(c.R), [&] {
    TauCertificate tc = tau_gradient_certificate(s, c.R, {c.delta0, c.C0, c.lambda0});
    add("tau_certificate", "R=" + num(c.R), tc.eps_tau * tc.eps_tau, tc.bound, tc.certified);
  });
  art.csv("bounds.csv", t);
  int passed = 0;
  for (const auto& r : t.rows) passed += r[4] == "true";
  log << "  " << passed << "/" << t.rows.size() << " bounds hold\n";
}

}  // namespace

DiscreteHypersurface load_surface(const RunConfig& c) {
  if (!c.input.empty()) {
    ProfileFile pf = read_profile_file(c.input);
    return apply_perturbation(build_from_profile(pf.profile, pf.signature), c);
  }
  return apply_perturbation(analytic_shrinker(builtin_spec(c), c.resolution), c);
}

void CsvTable::write(std::ostream& out) const {
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

RunResult run(const RunConfig& c, std::ostream& log) {
  RunResult res;
  // Refuse an unusable output directory before doing any work.
  try {
    fs::create_directories(c.out);
    fs::path probe = fs::path(c.out) / ".mcfrig-write-test";
    {
      std::ofstream test(probe);
      if (!test) throw fs::filesystem_error("not writable", probe, std::make_error_code(std::errc::permission_denied));
    }
    fs::remove(probe);
  } catch (const fs::filesystem_error& e) {
    log << "error: output directory " << c.out << " is not writable\n";
    res.status = 3;
    res.failing_check = "output";
    return res;
  }

  Artifacts art{fs::path(c.out), std::to_string(c.seed), &res};
  try {
    validate_config(c);
    log << command_name(c.command) << ":\n";
    if (c.command == Command::gap) {
      run_gap(c, art, res, log);
    } else {
      DiscreteHypersurface s = load_surface(c);
      switch (c.command) {
        case Command::verify: run_verify(c, s, art, res, log); break;
        case Command::entropy: run_entropy(c, s, art, res, log); break;
        case Command::flow: {
          DiscreteHypersurface reference =
              c.input.empty() ? analytic_shrinker(builtin_spec(c), c.resolution) : s;
          run_flow(c, s, reference, art, res, log);
          break;
        }
        case Command::classify: run_classify(c, s, art, res, log); break;
        case Command::bounds: run_bounds(c, s, art, res, log); break;
        case Command::gap: break;
      }
    }
  } catch (const ParseError& e) {
    log << "parse error: " << e.what() << '\n';
    res.status = 2;
    res.failing_check = "parse";
  } catch (const Rejection& e) {
    log << "check failed [" << e.stage() << "]: " << e.what() << '\n';
    res.status = 1;
    res.failing_check = e.stage();
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    res.status = 3;
    res.failing_check = "output";
  }
  if (res.status == 1) log << "failing check: " << res.failing_check << '\n';
  return res;
}

}  // namespace mcf
