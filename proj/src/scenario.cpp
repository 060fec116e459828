#include "csm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "csm/composite.hpp"
#include "csm/core.hpp"
#include "csm/errors.hpp"
#include "csm/gleason.hpp"
#include "csm/rng.hpp"
#include "csm/sequence.hpp"
#include "csm/spin.hpp"
#include "csm/version.hpp"

namespace csm::scenario {
namespace {

constexpr double kDeg2Rad = std::numbers::pi / 180.0;

// ---- json field access with named diagnostics ----

const Json& need(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains(field))
    throw SchemaError(field, "required field is missing");
  return j.at(field);
}

double as_finite(const Json& v, const std::string& field) {
  if (!v.is_number()) throw SchemaError(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(field, "must be finite");
  return d;
}

double need_num(const Json& j, const std::string& field) {
  return as_finite(need(j, field), field);
}

double opt_num(const Json& j, const std::string& field, double fallback) {
  return j.is_object() && j.contains(field) ? as_finite(j.at(field), field)
                                            : fallback;
}

long long as_integer(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) throw SchemaError(field, "must be an integer");
  return v.get<long long>();
}

long long need_int(const Json& j, const std::string& field) {
  return as_integer(need(j, field), field);
}

long long opt_int(const Json& j, const std::string& field, long long fallback) {
  return j.is_object() && j.contains(field) ? as_integer(j.at(field), field)
                                            : fallback;
}

std::string need_str(const Json& j, const std::string& field) {
  const Json& v = need(j, field);
  if (!v.is_string()) throw SchemaError(field, "must be a string");
  return v.get<std::string>();
}

std::string opt_str(const Json& j, const std::string& field,
                    const std::string& fallback) {
  if (!j.is_object() || !j.contains(field)) return fallback;
  if (!j.at(field).is_string()) throw SchemaError(field, "must be a string");
  return j.at(field).get<std::string>();
}

std::array<double, 2> need_angle_pair(const Json& j, const std::string& field) {
  const Json& v = need(j, field);
  if (!v.is_array() || v.size() != 2)
    throw SchemaError(field, "must be an array of two angles (degrees)");
  return {as_finite(v[0], field), as_finite(v[1], field)};
}

// ---- payload parsing ----

ChainSpec parse_chain(const Json& j) {
  ChainSpec c;
  if (j.contains("initial")) {
    const Json& ini = j.at("initial");
    if (!ini.is_object()) throw SchemaError("initial", "must be an object");
    c.initial_angle_deg = opt_num(ini, "angle", 0.0);
    const long long outcome = opt_int(ini, "outcome", 0);
    if (outcome < 0 || outcome > 1)
      throw SchemaError("initial.outcome", "must be 0 or 1");
    c.initial_outcome = static_cast<int>(outcome);
  }
  const Json& steps = need(j, "steps");
  if (!steps.is_array() || steps.empty())
    throw SchemaError("steps", "must be a non-empty array of angles (degrees)");
  for (const Json& v : steps) c.step_angles_deg.push_back(as_finite(v, "steps"));
  const long long samples = opt_int(j, "samples", 0);
  if (samples < 0) throw SchemaError("samples", "must be non-negative");
  c.samples = static_cast<std::uint64_t>(samples);
  if (j.contains("expect")) {
    const Json& ex = j.at("expect");
    if (!ex.is_array()) throw SchemaError("expect", "must be an array");
    for (const Json& entry : ex) {
      Expectation e;
      const Json& path = need(entry, "path");
      if (!path.is_array() || path.size() != c.step_angles_deg.size())
        throw SchemaError("expect.path", "must list one outcome per step");
      for (const Json& p : path) {
        const long long outcome = as_integer(p, "expect.path");
        if (outcome < 0 || outcome > 1)
          throw SchemaError("expect.path", "outcomes must be 0 or 1");
        e.path.push_back(static_cast<int>(outcome));
      }
      e.prob = need_num(entry, "prob");
      if (e.prob < 0.0 || e.prob > 1.0)
        throw SchemaError("expect.prob", "must lie in [0, 1]");
      e.tol = opt_num(entry, "tol", 1e-12);
      if (e.tol <= 0.0) throw SchemaError("expect.tol", "must be positive");
      c.expect.push_back(std::move(e));
    }
  }
  return c;
}

SpinSpec parse_spin(const Json& j) {
  SpinSpec s;
  const std::string mode = opt_str(j, "mode", "malus-sweep");
  if (mode == "malus-sweep") {
    s.mode = SpinSpec::Mode::MalusSweep;
    const long long angles = opt_int(j, "angles", 360);
    if (angles < 1) throw SchemaError("angles", "must be positive");
    s.angles = static_cast<int>(angles);
  } else if (mode == "rotations") {
    s.mode = SpinSpec::Mode::Rotations;
    s.j = need_num(j, "j");
    const double twoj = 2.0 * s.j;
    if (s.j < 0.5 || std::abs(twoj - std::round(twoj)) > 1e-9)
      throw SchemaError("j", "must be a half-integer >= 1/2");
    const long long rotations = need_int(j, "rotations");
    if (rotations < 1) throw SchemaError("rotations", "must be positive");
    s.rotations = static_cast<int>(rotations);
    const long long pool = opt_int(j, "pool", 10);
    if (pool < 0) throw SchemaError("pool", "must be non-negative");
    const long long dim = static_cast<long long>(std::lround(twoj)) + 1;
    if (pool * dim > 64)
      throw SchemaError("pool", "pooled modalities exceed the exact-search limit (64)");
    s.pool = static_cast<int>(pool);
  } else {
    throw SchemaError("mode", "must be 'malus-sweep' or 'rotations'");
  }
  return s;
}

EprSpec parse_epr(const Json& j) {
  EprSpec e;
  e.state = opt_str(j, "state", "singlet");
  if (e.state != "singlet")
    throw SchemaError("state", "only 'singlet' is available");
  e.alice_deg = need_angle_pair(j, "alice");
  e.bob_deg = need_angle_pair(j, "bob");
  const long long pairs = opt_int(j, "random_pairs", 0);
  if (pairs < 0) throw SchemaError("random_pairs", "must be non-negative");
  e.random_pairs = static_cast<int>(pairs);
  if (j.contains("membership")) {
    const std::string m = need_str(j, "membership");
    if (m != "local" && m != "nonlocal")
      throw SchemaError("membership", "must be 'local' or 'nonlocal'");
    e.membership = m;
  }
  if (j.contains("chsh_abs")) {
    const double v = need_num(j, "chsh_abs");
    if (v < 0.0) throw SchemaError("chsh_abs", "must be non-negative");
    e.chsh_abs = v;
  }
  e.chsh_tol = opt_num(j, "chsh_tol", 1e-10);
  if (e.chsh_tol <= 0.0) throw SchemaError("chsh_tol", "must be positive");
  return e;
}

const std::vector<std::string> kAssignmentNames = {
    "born-random-pure", "born-maximally-mixed", "born-random-mixed",
    "squared-maximally-mixed"};

GleasonSpec parse_gleason(const Json& j) {
  GleasonSpec g;
  const long long dim = need_int(j, "dim");
  if (dim < 2 || dim > 8) throw SchemaError("dim", "must be between 2 and 8");
  g.dim = static_cast<int>(dim);
  const long long bases = need_int(j, "bases");
  if (bases < 1 || bases > 1000000)
    throw SchemaError("bases", "must be between 1 and 1000000");
  g.bases = static_cast<int>(bases);
  if (j.contains("assignments")) {
    const Json& list = j.at("assignments");
    if (!list.is_array() || list.empty())
      throw SchemaError("assignments", "must be a non-empty array of names");
    for (const Json& v : list) {
      if (!v.is_string()) throw SchemaError("assignments", "entries must be strings");
      const std::string name = v.get<std::string>();
      if (std::find(kAssignmentNames.begin(), kAssignmentNames.end(), name) ==
          kAssignmentNames.end())
        throw SchemaError("assignments", "unknown assignment '" + name + "'");
      g.assignments.push_back(name);
    }
  } else {
    g.assignments = kAssignmentNames;
  }
  if (j.contains("fit")) {
    if (!j.at("fit").is_boolean()) throw SchemaError("fit", "must be a boolean");
    g.fit = j.at("fit").get<bool>();
  }
  return g;
}

// ---- run helpers ----

double finite_or_large(double v) {
  if (std::isnan(v)) return 1e300;
  return std::clamp(v, -1e300, 1e300);
}

std::string format_num(double v) { return Json(v).dump(); }

std::string path_string(const std::vector<int>& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(path[i]);
  }
  return s;
}

Json expect_json(const Expectation& e) {
  Json j;
  j["path"] = e.path;
  j["prob"] = e.prob;
  j["tol"] = e.tol;
  return j;
}

Json echo_scenario(const Scenario& s) {
  Json j;
  j["kind"] = kind_name(s.kind);
  j["name"] = s.name;
  if (!s.title.empty()) j["title"] = s.title;
  j["seed"] = s.seed;
  if (s.tol) j["tol"] = *s.tol;
  if (const auto* c = std::get_if<ChainSpec>(&s.payload)) {
    j["initial"] = Json{{"angle", c->initial_angle_deg}, {"outcome", c->initial_outcome}};
    j["steps"] = c->step_angles_deg;
    j["samples"] = c->samples;
    Json expect = Json::array();
    for (const Expectation& e : c->expect) expect.push_back(expect_json(e));
    j["expect"] = expect;
  } else if (const auto* e = std::get_if<EprSpec>(&s.payload)) {
    j["state"] = e->state;
    j["alice"] = e->alice_deg;
    j["bob"] = e->bob_deg;
    j["random_pairs"] = e->random_pairs;
    if (e->membership) j["membership"] = *e->membership;
    if (e->chsh_abs) {
      j["chsh_abs"] = *e->chsh_abs;
      j["chsh_tol"] = e->chsh_tol;
    }
  } else if (const auto* sp = std::get_if<SpinSpec>(&s.payload)) {
    if (sp->mode == SpinSpec::Mode::MalusSweep) {
      j["mode"] = "malus-sweep";
      j["angles"] = sp->angles;
    } else {
      j["mode"] = "rotations";
      j["j"] = sp->j;
      j["rotations"] = sp->rotations;
      j["pool"] = sp->pool;
    }
  } else if (const auto* g = std::get_if<GleasonSpec>(&s.payload)) {
    j["dim"] = g->dim;
    j["bases"] = g->bases;
    j["assignments"] = g->assignments;
    j["fit"] = g->fit;
  }
  return j;
}

seq::Chain build_chain(const ChainSpec& c) {
  const Context init =
      spin::polarization_context({c.initial_angle_deg * kDeg2Rad});
  seq::Chain chain{modality(init, c.initial_outcome), {}};
  chain.steps.reserve(c.step_angles_deg.size());
  for (double a : c.step_angles_deg)
    chain.steps.push_back(spin::polarization_context({a * kDeg2Rad}));
  return chain;
}

void run_chain(const Scenario& s, const ChainSpec& c, RunReport& rep) {
  const double tol = s.tol.value_or(1e-12);
  const seq::Chain chain = build_chain(c);
  const seq::OutcomeDistribution dist = seq::run_chain_exact(chain);

  seq::SampleCounts counts;
  if (c.samples > 0) counts = seq::sample_chain(chain, c.samples, s.seed);

  Json tuples = Json::array();
  for (std::size_t f = 0; f < dist.size(); ++f) {
    Json row;
    row["path"] = path_string(dist.tuple_at(f));
    row["prob"] = dist.probs[f];
    if (c.samples > 0) {
      row["count"] = counts.counts[f];
      row["freq"] = static_cast<double>(counts.counts[f]) /
                    static_cast<double>(c.samples);
    }
    tuples.push_back(std::move(row));
  }
  rep.results["total_probability"] = dist.total();
  rep.results["tuples"] = std::move(tuples);

  rep.checks.push_back(
      check_le("total-probability-deviation", std::abs(dist.total() - 1.0), tol));
  for (const Expectation& e : c.expect)
    rep.checks.push_back(check_le("path-" + path_string(e.path),
                                  std::abs(dist.prob(e.path) - e.prob), e.tol));

  if (c.samples > 0) {
    const double m = static_cast<double>(c.samples);
    double max_z = 0.0;
    for (std::size_t f = 0; f < dist.size(); ++f) {
      const double p = dist.probs[f];
      const double cnt = static_cast<double>(counts.counts[f]);
      double z;
      if (p <= 0.0)
        z = cnt == 0.0 ? 0.0 : 1e300;  // impossible tuples must never occur
      else if (p >= 1.0)
        z = cnt == m ? 0.0 : 1e300;
      else
        z = std::abs(cnt - p * m) / std::sqrt(m * p * (1.0 - p));
      max_z = std::max(max_z, z);
    }
    Json sampling;
    sampling["samples"] = c.samples;
    sampling["max_z"] = max_z;
    rep.results["sampling"] = std::move(sampling);
    rep.checks.push_back(check_le("sampling-z-score", max_z, 5.0));
  }
}

double double_stochastic_residual(const RealMatrix& p) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    worst = std::max(worst, std::abs(p.row(r).sum() - 1.0));
  for (Eigen::Index c = 0; c < p.cols(); ++c)
    worst = std::max(worst, std::abs(p.col(c).sum() - 1.0));
  return worst;
}

void run_spin(const Scenario& s, const SpinSpec& spec, RunReport& rep) {
  if (spec.mode == SpinSpec::Mode::MalusSweep) {
    const double tol = s.tol.value_or(1e-12);
    const Context h0 = spin::polarization_context({0.0});
    const Modality h0_transmitted = modality(h0, 0);
    double max_malus = 0.0;
    double max_table = 0.0;
    for (int k = 0; k < spec.angles; ++k) {
      const double theta = k * (360.0 / spec.angles) * kDeg2Rad;
      const Context ct = spin::polarization_context({theta});
      const double born = born_probability(h0_transmitted, modality(ct, 0));
      const double law = std::cos(theta) * std::cos(theta);
      max_malus = std::max(max_malus, std::abs(born - law));
      max_table =
          std::max(max_table, double_stochastic_residual(transition_table(h0, ct).p));
    }
    rep.results["angles"] = spec.angles;
    rep.results["max_malus_deviation"] = max_malus;
    rep.results["max_table_residual"] = max_table;
    rep.checks.push_back(check_le("malus-law-deviation", max_malus, tol));
    rep.checks.push_back(check_le("transition-table-residual", max_table, tol));
    return;
  }

  const double tol = s.tol.value_or(1e-10);
  const int dim = static_cast<int>(std::lround(2.0 * spec.j)) + 1;
  const Context base = spin::spin_direction_context({spec.j, 0.0, 0.0});
  rng::Stream st = rng::stream_for(s.seed, 0);
  int count_errors = 0;
  double worst_residual = 0.0;
  std::vector<Modality> pool;
  for (int k = 0; k < spec.rotations; ++k) {
    const double z = 2.0 * st.uniform01() - 1.0;
    const double phi = 2.0 * std::numbers::pi * st.uniform01();
    const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Eigen::Vector3d axis(rxy * std::cos(phi), rxy * std::sin(phi), z);
    const double angle = 2.0 * std::numbers::pi * st.uniform01();
    const Context rotated =
        transform_context(base, spin::rotation_transformation(spec.j, axis, angle));
    if (static_cast<int>(rotated.projectors.size()) != dim) ++count_errors;
    worst_residual = std::max(worst_residual, context_residual(rotated));
    if (k < spec.pool)
      for (int n = 0; n < dim; ++n) pool.push_back(modality(rotated, n));
  }
  const int max_set = max_exclusive_set(pool);
  rep.results["j"] = spec.j;
  rep.results["dim"] = dim;
  rep.results["rotations"] = spec.rotations;
  rep.results["projector_count_errors"] = count_errors;
  rep.results["max_context_residual"] = worst_residual;
  rep.results["pooled_modalities"] = static_cast<int>(pool.size());
  rep.results["max_exclusive_set"] = max_set;
  rep.checks.push_back(check_le("projector-count-errors", count_errors, 0.0));
  rep.checks.push_back(check_le("context-invariant-residual", worst_residual, tol));
  rep.checks.push_back(check_le("max-exclusive-set-bound", max_set, dim));
}

void run_epr(const Scenario& s, const EprSpec& spec, RunReport& rep) {
  const double tol = s.tol.value_or(1e-12);
  const Modality singlet = epr::singlet_modality().modality;

  double acc_consistency = 0.0;
  double acc_no_signalling = 0.0;
  double acc_reduction = 0.0;
  double acc_correlation = 0.0;
  int skipped = 0;

  auto accumulate = [&](const epr::SettingsFamily& family) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const Context& a = family.alice[static_cast<std::size_t>(i)];
        const Context& b = family.bob[static_cast<std::size_t>(j)];
        const epr::ConsistencyReport cons = epr::check_consistency(singlet, a, b);
        acc_consistency = std::max(acc_consistency, cons.max_deviation);
        skipped += cons.skipped;
        const epr::ReductionReport red = epr::malus_reduction_check(singlet, a, b);
        acc_reduction = std::max(acc_reduction, red.max_deviation);
        skipped += red.skipped;
        const double e = epr::correlation(family.tables[static_cast<std::size_t>(i * 2 + j)]);
        const double law = -std::cos(family.alice_angles[static_cast<std::size_t>(i)] -
                                     family.bob_angles[static_cast<std::size_t>(j)]);
        acc_correlation = std::max(acc_correlation, std::abs(e - law));
      }
    acc_no_signalling = std::max(acc_no_signalling, epr::check_no_signalling(family));
  };

  const epr::SettingsFamily base =
      epr::settings_family(singlet, spec.alice_deg[0] * kDeg2Rad,
                           spec.alice_deg[1] * kDeg2Rad, spec.bob_deg[0] * kDeg2Rad,
                           spec.bob_deg[1] * kDeg2Rad);
  accumulate(base);

  rng::Stream st = rng::stream_for(s.seed, 1);
  for (int k = 0; k < spec.random_pairs; ++k) {
    const double a0 = 2.0 * std::numbers::pi * st.uniform01();
    const double a1 = 2.0 * std::numbers::pi * st.uniform01();
    const double b0 = 2.0 * std::numbers::pi * st.uniform01();
    const double b1 = 2.0 * std::numbers::pi * st.uniform01();
    accumulate(epr::settings_family(singlet, a0, a1, b0, b1));
  }

  const epr::PolytopeResult poly = epr::local_polytope_membership(base);
  const std::array<double, 4> corr = epr::correlations(base);

  rep.results["correlations"] = corr;
  rep.results["chsh_patterns"] = poly.chsh;
  rep.results["max_abs_chsh"] = poly.max_abs_chsh;
  rep.results["membership"] = poly.local ? "local" : "nonlocal";
  rep.results["consistency_residual"] = acc_consistency;
  rep.results["no_signalling_residual"] = acc_no_signalling;
  rep.results["malus_reduction_residual"] = acc_reduction;
  rep.results["correlation_law_residual"] = acc_correlation;
  rep.results["random_pairs"] = spec.random_pairs;
  rep.results["skipped_branches"] = skipped;

  rep.checks.push_back(check_le("consistency-residual", acc_consistency, tol));
  rep.checks.push_back(check_le("no-signalling-residual", acc_no_signalling, tol));
  rep.checks.push_back(check_le("malus-reduction-residual", acc_reduction, tol));
  rep.checks.push_back(check_le("correlation-law-residual", acc_correlation, tol));
  if (spec.membership) {
    const double bound = 2.0 + 1e-9;
    if (*spec.membership == "local")
      rep.checks.push_back(check_le("chsh-facet-magnitude", poly.max_abs_chsh, bound));
    else
      rep.checks.push_back(check_ge("chsh-facet-magnitude", poly.max_abs_chsh, bound));
  }
  if (spec.chsh_abs)
    rep.checks.push_back(check_le("chsh-magnitude-deviation",
                                  std::abs(poly.max_abs_chsh - *spec.chsh_abs),
                                  spec.chsh_tol));
}

Matrix random_mixed_density(Eigen::Index dim, rng::Stream& st) {
  Matrix rho = Matrix::Zero(dim, dim);
  double total = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double w = st.uniform01() + 1e-3;
    rho += w * outer(gleason::random_unit_vector(dim, st));
    total += w;
  }
  return rho / total;
}

void run_gleason(const Scenario& s, const GleasonSpec& spec, RunReport& rep) {
  const double tol = s.tol.value_or(1e-10);
  const Eigen::Index dim = spec.dim;
  rng::Stream density_stream = rng::stream_for(s.seed, 0xD);
  const Matrix mixed = Matrix::Identity(dim, dim) / static_cast<double>(dim);

  Json assignment_rows = Json::array();
  for (std::size_t idx = 0; idx < spec.assignments.size(); ++idx) {
    const std::string& name = spec.assignments[idx];
    gleason::ProbabilityAssignment f;
    if (name == "born-random-pure")
      f = gleason::born_assignment(outer(gleason::random_unit_vector(dim, density_stream)));
    else if (name == "born-maximally-mixed")
      f = gleason::born_assignment(mixed);
    else if (name == "born-random-mixed")
      f = gleason::born_assignment(random_mixed_density(dim, density_stream));
    else
      f = gleason::squared_born_assignment(mixed);

    const gleason::FrameTestReport r = gleason::additivity_test(
        f, dim, spec.bases, rng::derive(s.seed, idx + 1));
    Json row;
    row["name"] = name;
    row["max_violation"] = r.max_violation;
    row["mean_violation"] = r.mean_violation;
    row["max_out_of_range"] = r.max_out_of_range;
    assignment_rows.push_back(std::move(row));

    if (name == "squared-maximally-mixed") {
      const double expected = 1.0 - 1.0 / static_cast<double>(dim);
      rep.checks.push_back(check_le("squared-violation-gap",
                                    std::abs(r.max_violation - expected), tol));
    } else {
      rep.checks.push_back(check_le("additivity-" + name, r.max_violation, tol));
    }
  }
  rep.results["dim"] = spec.dim;
  rep.results["bases"] = spec.bases;
  rep.results["assignments"] = std::move(assignment_rows);

  if (spec.fit) {
    const Matrix generator = random_mixed_density(dim, density_stream);
    const gleason::DensityFit born_fit = gleason::fit_density(
        gleason::born_assignment(generator), dim, rng::derive(s.seed, 101));
    const double recovery = max_abs_diff(born_fit.rho, generator);
    const gleason::DensityFit squared_fit = gleason::fit_density(
        gleason::squared_born_assignment(mixed), dim, rng::derive(s.seed, 202));

    Json fit;
    fit["recovery_error"] = recovery;
    fit["born_residual"] = born_fit.held_out_residual;
    fit["squared_residual"] = squared_fit.held_out_residual;
    rep.results["fit"] = std::move(fit);

    rep.checks.push_back(check_le("fit-recovery-error", recovery, 1e-8));
    rep.checks.push_back(
        check_le("fit-born-residual", born_fit.held_out_residual, 1e-8));
    rep.checks.push_back(
        check_ge("fit-separation-residual", squared_fit.held_out_residual, 0.05));
  }
}

// ---- emitters ----

Json check_to_json(const Check& c) {
  Json j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["threshold"] = c.threshold;
  j["op"] = c.op;
  j["pass"] = c.pass;
  return j;
}

Json report_to_json(const RunReport& r) {
  Json j;
  j["name"] = r.name;
  j["kind"] = r.kind;
  j["version"] = r.version;
  j["seed"] = r.seed;
  j["scenario"] = r.scenario;
  j["results"] = r.results;
  Json checks = Json::array();
  for (const Check& c : r.checks) checks.push_back(check_to_json(c));
  j["checks"] = std::move(checks);
  j["all_pass"] = r.all_pass();
  return j;
}

void flatten_numeric(const Json& j, const std::string& prefix,
                     std::vector<std::pair<std::string, double>>& rows) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten_numeric(value, prefix.empty() ? key : prefix + "." + key, rows);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten_numeric(j[i], prefix + "." + std::to_string(i), rows);
  } else if (j.is_number()) {
    rows.emplace_back(prefix, j.get<double>());
  }
}

std::string emit_csv(const RunReport& r) {
  std::string out = "scenario,item,value\n";
  std::vector<std::pair<std::string, double>> rows;
  flatten_numeric(r.results, "", rows);
  for (const auto& [item, value] : rows)
    out += r.name + "," + item + "," + format_num(value) + "\n";
  for (const Check& c : r.checks)
    out += r.name + ",check." + c.name + "," + format_num(c.value) + "\n";
  return out;
}

std::string scalar_to_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Aligned rendering of a results object: scalars as key/value lines, arrays
// of uniform objects as small tables, everything else as dumped json.
void render_results(std::ostringstream& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      out << pad << key << ":\n";
      render_results(out, value, indent + 2);
    } else if (value.is_array() && !value.empty() && value[0].is_object()) {
      out << pad << key << ":\n";
      std::vector<std::string> cols;
      for (const auto& [col, unused] : value[0].items()) cols.push_back(col);
      std::vector<std::size_t> width(cols.size());
      for (std::size_t c = 0; c < cols.size(); ++c) {
        width[c] = cols[c].size();
        for (const Json& row : value)
          width[c] = std::max(width[c],
                              scalar_to_text(row.value(cols[c], Json())).size());
      }
      out << pad << "  ";
      for (std::size_t c = 0; c < cols.size(); ++c) {
        out << cols[c] << std::string(width[c] - cols[c].size() + 2, ' ');
      }
      out << "\n";
      for (const Json& row : value) {
        out << pad << "  ";
        for (std::size_t c = 0; c < cols.size(); ++c) {
          const std::string cell = scalar_to_text(row.value(cols[c], Json()));
          out << cell << std::string(width[c] - cell.size() + 2, ' ');
        }
        out << "\n";
      }
    } else {
      out << pad << key << ": " << scalar_to_text(value) << "\n";
    }
  }
}

std::string emit_table(const RunReport& r) {
  std::ostringstream out;
  out << "scenario: " << r.name << " (" << r.kind << ")\n";
  if (r.scenario.contains("title"))
    out << "title: " << r.scenario.at("title").get<std::string>() << "\n";
  out << "version: " << r.version << "  seed: " << r.seed << "\n\n";
  out << "results:\n";
  render_results(out, r.results, 2);
  out << "\nchecks:\n";
  std::size_t name_w = 4;
  for (const Check& c : r.checks) name_w = std::max(name_w, c.name.size());
  char line[256];
  std::snprintf(line, sizeof line, "  %-*s  %-22s %-3s %-22s %s\n",
                static_cast<int>(name_w), "name", "value", "op", "threshold",
                "result");
  out << line;
  for (const Check& c : r.checks) {
    std::snprintf(line, sizeof line, "  %-*s  %-22.15g %-3s %-22.15g %s\n",
                  static_cast<int>(name_w), c.name.c_str(), c.value,
                  c.op.c_str(), c.threshold, c.pass ? "PASS" : "FAIL");
    out << line;
  }
  int failed = 0;
  for (const Check& c : r.checks)
    if (!c.pass) ++failed;
  if (failed == 0)
    out << "\nall " << r.checks.size() << " checks passed\n";
  else
    out << "\n" << failed << " of " << r.checks.size() << " checks FAILED\n";
  return out.str();
}

// ---- bundled fixtures ----

struct Fixture {
  const char* name;
  const char* text;
};

const Fixture kFixtures[] = {
    {"fig1a", R"json({
  "kind": "chain",
  "name": "fig1a",
  "title": "photon through polarizers at 0/45/90 degrees: a quarter comes through",
  "seed": 20240501,
  "initial": {"angle": 0.0, "outcome": 0},
  "steps": [0.0, 45.0, 90.0],
  "samples": 0,
  "expect": [{"path": [0, 0, 0], "prob": 0.25, "tol": 1e-12}]
})json"},
    {"fig1b", R"json({
  "kind": "chain",
  "name": "fig1b",
  "title": "crossed polarizers with the diagonal one last: nothing comes through",
  "seed": 20240501,
  "initial": {"angle": 0.0, "outcome": 0},
  "steps": [0.0, 90.0, 45.0],
  "samples": 0,
  "expect": [{"path": [0, 0, 0], "prob": 0.0, "tol": 1e-12}]
})json"},
    {"malus-sweep", R"json({
  "kind": "spin",
  "name": "malus-sweep",
  "title": "cos^2 transmission law swept over 360 polarizer angles",
  "mode": "malus-sweep",
  "angles": 360,
  "tol": 1e-12
})json"},
    {"spin52-rotation", R"json({
  "kind": "spin",
  "name": "spin52-rotation",
  "title": "spin-5/2 direction context under 1000 random rotations keeps 6 outcomes",
  "mode": "rotations",
  "j": 2.5,
  "rotations": 1000,
  "pool": 10,
  "seed": 52,
  "tol": 1e-10
})json"},
    {"singlet-equal", R"json({
  "kind": "epr",
  "name": "singlet-equal",
  "title": "singlet at equal settings: perfect anticorrelation, local family",
  "state": "singlet",
  "alice": [0.0, 0.0],
  "bob": [0.0, 0.0],
  "random_pairs": 0,
  "seed": 6,
  "tol": 1e-12,
  "membership": "local"
})json"},
    {"singlet-tsirelson", R"json({
  "kind": "epr",
  "name": "singlet-tsirelson",
  "title": "singlet at the CHSH-optimal settings: |S| = 2*sqrt(2)",
  "state": "singlet",
  "alice": [0.0, 90.0],
  "bob": [45.0, 135.0],
  "random_pairs": 0,
  "seed": 6,
  "tol": 1e-12,
  "membership": "nonlocal",
  "chsh_abs": 2.8284271247461903,
  "chsh_tol": 1e-10
})json"},
    {"gleason-d3", R"json({
  "kind": "gleason",
  "name": "gleason-d3",
  "title": "frame-function additivity and density fits in dimension 3",
  "dim": 3,
  "bases": 1000,
  "seed": 9,
  "assignments": ["born-random-pure", "born-maximally-mixed", "born-random-mixed", "squared-maximally-mixed"],
  "fit": true,
  "tol": 1e-10
})json"},
    {"selftest-fail", R"json({
  "kind": "chain",
  "name": "selftest-fail",
  "title": "deliberately wrong expectation; exercises the failing exit status",
  "seed": 1,
  "initial": {"angle": 0.0, "outcome": 0},
  "steps": [45.0],
  "samples": 0,
  "expect": [{"path": [0], "prob": 0.75, "tol": 1e-12}]
})json"},
};

}  // namespace

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::Chain: return "chain";
    case Kind::Epr: return "epr";
    case Kind::Spin: return "spin";
    case Kind::Gleason: return "gleason";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("document", e.what());
  }
  if (!j.is_object()) throw SchemaError("document", "top level must be an object");

  Scenario s;
  const std::string kind = need_str(j, "kind");
  if (kind == "chain")
    s.kind = Kind::Chain;
  else if (kind == "epr")
    s.kind = Kind::Epr;
  else if (kind == "spin")
    s.kind = Kind::Spin;
  else if (kind == "gleason")
    s.kind = Kind::Gleason;
  else
    throw UnknownKind("unknown scenario kind '" + kind + "'");

  s.name = opt_str(j, "name", "scenario");
  s.title = opt_str(j, "title", "");
  const long long seed = opt_int(j, "seed", 1);
  if (seed < 0) throw SchemaError("seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  if (j.contains("tol")) {
    const double t = need_num(j, "tol");
    if (t <= 0.0) throw SchemaError("tol", "must be positive");
    s.tol = t;
  }

  switch (s.kind) {
    case Kind::Chain: s.payload = parse_chain(j); break;
    case Kind::Epr: s.payload = parse_epr(j); break;
    case Kind::Spin: s.payload = parse_spin(j); break;
    case Kind::Gleason: s.payload = parse_gleason(j); break;
  }
  return s;
}

Check check_le(const std::string& name, double value, double threshold) {
  Check c;
  c.name = name;
  c.value = finite_or_large(value);
  c.threshold = threshold;
  c.op = "<=";
  c.pass = c.value <= threshold;
  return c;
}

Check check_ge(const std::string& name, double value, double threshold) {
  Check c;
  c.name = name;
  c.value = finite_or_large(value);
  c.threshold = threshold;
  c.op = ">=";
  c.pass = c.value >= threshold;
  return c;
}

bool RunReport::all_pass() const {
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

RunReport run(const Scenario& scenario, const Overrides& overrides) {
  Scenario s = scenario;
  if (overrides.seed) s.seed = *overrides.seed;
  if (overrides.tol) {
    if (*overrides.tol <= 0.0) throw SchemaError("tol", "must be positive");
    s.tol = *overrides.tol;
  }
  if (overrides.samples)
    if (auto* c = std::get_if<ChainSpec>(&s.payload)) c->samples = *overrides.samples;

  RunReport rep;
  rep.name = s.name;
  rep.kind = kind_name(s.kind);
  rep.version = kVersion;
  rep.seed = s.seed;
  rep.scenario = echo_scenario(s);

  if (const auto* c = std::get_if<ChainSpec>(&s.payload))
    run_chain(s, *c, rep);
  else if (const auto* e = std::get_if<EprSpec>(&s.payload))
    run_epr(s, *e, rep);
  else if (const auto* sp = std::get_if<SpinSpec>(&s.payload))
    run_spin(s, *sp, rep);
  else if (const auto* g = std::get_if<GleasonSpec>(&s.payload))
    run_gleason(s, *g, rep);
  return rep;
}

std::string emit(const RunReport& report, Format format) {
  switch (format) {
    case Format::Json: return report_to_json(report).dump(2) + "\n";
    case Format::Csv: return emit_csv(report);
    case Format::Table: return emit_table(report);
  }
  throw Error("unknown output format");
}

RunReport parse_report_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("document", e.what());
  }
  RunReport r;
  r.name = need_str(j, "name");
  r.kind = need_str(j, "kind");
  r.version = need_str(j, "version");
  r.seed = static_cast<std::uint64_t>(need_int(j, "seed"));
  r.scenario = need(j, "scenario");
  r.results = need(j, "results");
  const Json& checks = need(j, "checks");
  if (!checks.is_array()) throw SchemaError("checks", "must be an array");
  for (const Json& cj : checks) {
    Check c;
    c.name = need_str(cj, "name");
    c.value = need_num(cj, "value");
    c.threshold = need_num(cj, "threshold");
    c.op = need_str(cj, "op");
    if (!cj.contains("pass") || !cj.at("pass").is_boolean())
      throw SchemaError("pass", "must be a boolean");
    c.pass = cj.at("pass").get<bool>();
    r.checks.push_back(std::move(c));
  }
  return r;
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const Fixture& f : kFixtures) names.push_back(f.name);
  return names;
}

std::optional<std::string> fixture_text(const std::string& name) {
  for (const Fixture& f : kFixtures)
    if (name == f.name) return std::string(f.text) + "\n";
  return std::nullopt;
}

Scenario load_scenario(const std::string& name_or_path) {
  if (const auto text = fixture_text(name_or_path)) return parse_scenario(*text);
  std::ifstream in(name_or_path);
  if (!in) throw Error("cannot open scenario file '" + name_or_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace csm::scenario
