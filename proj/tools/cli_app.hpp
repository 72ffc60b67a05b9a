#pragma once

// Command-line experiments. run() is kept free of process state so tests can
// drive it directly; main.cpp only forwards argv.

#include "dirbit/angle_tomography.hpp"
#include "dirbit/composite.hpp"
#include "dirbit/framebit.hpp"
#include "dirbit/gpt_core.hpp"
#include "dirbit/interaction.hpp"
#include "dirbit/protocol.hpp"
#include "dirbit/so_group.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dirbit::cli {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string experiment;
  std::optional<int> dim;
  double visibility = 1.0;
  double noise = 0.5;
  std::optional<std::int64_t> shots;
  std::uint64_t seed = 0;
  std::optional<int> grid;
  std::optional<int> samples;
  std::string out;
  std::string format = "json";
  std::string config;
  // Experiment-specific.
  std::string input;
  std::string space = "ball";
  std::string regime = "max";
  std::string records;
  bool hide_truth = false;
};

namespace detail {

inline std::string rational_string(const Rational& r) {
  std::ostringstream s;
  s << r.numerator() << "/" << r.denominator();
  return s.str();
}

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json mat_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

inline std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t k = std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(q * v.size())) - 1);
  return v[k];
}

// Primary output goes to --out when given, otherwise to the stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
  void write(const std::string& text) const { write_to(path_, text); }
  void write_to(const std::string& path, const std::string& text) const {
    if (path.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open output file: " + path);
    f << text;
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ostream& fallback_;
};

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Resolved configuration after per-experiment defaults.
inline Json config_json(const RunConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["dim"] = c.dim ? Json(*c.dim) : Json(nullptr);
  j["visibility"] = c.visibility;
  j["noise"] = c.noise;
  j["shots"] = c.shots ? Json(*c.shots) : Json(nullptr);
  j["seed"] = c.seed;
  j["grid"] = c.grid ? Json(*c.grid) : Json(nullptr);
  j["samples"] = c.samples ? Json(*c.samples) : Json(nullptr);
  j["format"] = c.format;
  if (!c.input.empty()) j["input"] = c.input;
  if (c.experiment == "capacity") j["space"] = c.space;
  if (c.experiment == "composite-check") j["regime"] = c.regime;
  if (c.experiment == "angle") j["hide_truth"] = c.hide_truth;
  return j;
}

inline Json report_header(const RunConfig& c) {
  Json j;
  j["toolkit"] = std::string(kVersion);
  j["config"] = config_json(c);
  return j;
}

namespace detail {

template <class T>
void set_default(std::optional<T>& field, T value) {
  if (!field) field = value;
}

inline BallSpace ball_space(const RunConfig& c) { return BallSpace(*c.dim, c.visibility, c.noise); }

inline void require_positive(const std::optional<int>& v, const std::string& name) {
  require(v && *v >= 1, "--" + name + " must be >= 1");
}

// ---------------------------------------------------------------------------

inline int transmit(RunConfig& c, const Sink& sink) {
  set_default(c.dim, 3);
  set_default<std::int64_t>(c.shots, 100000);
  set_default(c.grid, 20);
  set_default(c.samples, 100);
  require_positive(c.dim, "dim");
  require_positive(c.grid, "grid");
  require_positive(c.samples, "samples");
  require(*c.shots >= 1, "--shots must be >= 1");
  const BallSpace space = ball_space(c);
  const auto trials = run_transmission(space, 1.0, *c.grid, *c.shots, *c.samples, c.seed);
  std::vector<double> errors_deg;
  int consistent = 0;
  for (const auto& t : trials) {
    errors_deg.push_back(degrees(t.angular_error));
    consistent += t.consistent ? 1 : 0;
  }
  Json summary = report_header(c);
  summary["trials"] = trials.size();
  summary["median_error_deg"] = median(errors_deg);
  summary["p95_error_deg"] = quantile(errors_deg, 0.95);
  summary["max_error_deg"] = *std::max_element(errors_deg.begin(), errors_deg.end());
  summary["consistent_fraction"] = static_cast<double>(consistent) / trials.size();

  if (!c.records.empty()) {
    const auto shots = transmission_shots(space, 1.0, *c.grid, *c.shots, c.seed, 0).second;
    std::ostringstream csv;
    csv << "dir_index";
    for (int i = 1; i <= *c.dim; ++i) csv << ",y_" << i;
    csv << ",trials,successes\n";
    for (std::size_t k = 0; k < shots.size(); ++k) {
      csv << k;
      for (Eigen::Index i = 0; i < shots[k].direction.size(); ++i) csv << "," << num(shots[k].direction(i));
      csv << "," << shots[k].trials << "," << shots[k].successes << "\n";
    }
    sink.write_to(c.records, csv.str());
  }

  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "trial";
    for (int i = 1; i <= *c.dim; ++i) csv << ",sent_" << i;
    for (int i = 1; i <= *c.dim; ++i) csv << ",received_" << i;
    csv << ",angular_error_deg,bloch_norm,consistent\n";
    for (std::size_t t = 0; t < trials.size(); ++t) {
      csv << t;
      for (Eigen::Index i = 0; i < trials[t].sent.size(); ++i) csv << "," << num(trials[t].sent(i));
      for (Eigen::Index i = 0; i < trials[t].received.size(); ++i) csv << "," << num(trials[t].received(i));
      csv << "," << num(errors_deg[t]) << "," << num(trials[t].bloch_norm) << "," << (trials[t].consistent ? 1 : 0)
          << "\n";
    }
    sink.write(csv.str());
    // The summary sits next to the table, or follows it on the stream.
    sink.write_to(sink.path().empty() ? "" : sink.path() + ".summary.json", dump(summary));
  } else {
    Json rows = Json::array();
    for (std::size_t t = 0; t < trials.size(); ++t) {
      rows.push_back({{"sent", vec_json(trials[t].sent)},
                      {"received", vec_json(trials[t].received)},
                      {"angular_error_deg", errors_deg[t]},
                      {"bloch_norm", trials[t].bloch_norm},
                      {"consistent", trials[t].consistent}});
    }
    summary["per_trial"] = rows;
    sink.write(dump(summary));
  }
  return 0;
}

inline int angle(RunConfig& c, const Sink& sink) {
  set_default(c.dim, 3);
  set_default<std::int64_t>(c.shots, 1000000);
  set_default(c.grid, 400);
  require_positive(c.dim, "dim");
  require_positive(c.grid, "grid");
  require(*c.dim >= 2, "angle: --dim must be >= 2");
  require(*c.shots >= 0, "--shots must be >= 0");
  const int d = *c.dim;
  const BallSpace space(d, c.visibility, c.noise, haar_sample(d, derive_seed(c.seed, 1)).matrix());
  Rng rng = make_rng(derive_seed(c.seed, 2));
  const HiddenDevice y(space, random_unit_vector(d, rng), 1);
  const HiddenDevice z(space, random_unit_vector(d, rng), 2);
  TomographyBudget budget;
  budget.shots = *c.shots;
  budget.coarse_grid = *c.grid;
  budget.max_condition = 100.0;
  const AngleEstimate r = protocol_c1_repeated(
      y, z, [&](int attempt) { return random_preparations(space, derive_seed(c.seed, 3, attempt)); }, budget,
      derive_seed(c.seed, 4));
  Json j = report_header(c);
  j["estimated_angle_rad"] = r.angle;
  if (!c.hide_truth) j["true_angle_rad"] = true_angle(y, z);
  j["error_bar"] = r.error_bar;
  j["gram_condition_number"] = r.gram_condition_number;
  j["shots_used"] = r.shots_used;
  j["attempts"] = r.attempts;
  j["warnings"] = r.warnings;
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "estimated_angle_rad,true_angle_rad,error_bar,gram_condition_number,shots_used,attempts\n";
    csv << num(r.angle) << "," << (c.hide_truth ? std::string() : num(true_angle(y, z))) << "," << num(r.error_bar)
        << "," << num(r.gram_condition_number) << "," << r.shots_used << "," << r.attempts << "\n";
    sink.write(csv.str());
  } else {
    sink.write(dump(j));
  }
  return 0;
}

inline int majorize(RunConfig& c, const Sink& sink) {
  set_default(c.dim, 3);
  set_default(c.samples, 1000);
  set_default(c.grid, 200);
  require_positive(c.dim, "dim");
  require_positive(c.samples, "samples");
  require(*c.grid >= 0, "--grid must be >= 0");
  const int d = *c.dim;
  const BallSpace space = ball_space(c);
  struct Row {
    double phi_norm, omega_norm;
    bool norm_order, certified, purity_order;
    double residual;
  };
  std::vector<Row> rows(*c.samples);
  parallel_for(rows.size(), [&](std::size_t i) {
    Rng rng = make_rng(derive_seed(c.seed, i));
    const BallState phi(random_ball_point(d, rng));
    const BallState omega(random_ball_point(d, rng));
    const auto cert = majorization_certificate(space, phi, omega, *c.grid, derive_seed(c.seed, i, 1));
    Row r{phi.norm(), omega.norm(), majorization_le(space, phi, omega), cert.has_value(), false,
          cert ? cert->residual : -1.0};
    if (d == 3) {
      const CMat rp = 0.5 * (pauli(0) + phi.bloch()(0) * pauli(1) + phi.bloch()(1) * pauli(2) + phi.bloch()(2) * pauli(3));
      const CMat ro =
          0.5 * (pauli(0) + omega.bloch()(0) * pauli(1) + omega.bloch()(1) * pauli(2) + omega.bloch()(2) * pauli(3));
      r.purity_order = (rp * rp).trace().real() <= (ro * ro).trace().real();
    }
    rows[i] = r;
  });
  int agree = 0;
  int purity_agree = 0;
  for (const Row& r : rows) {
    agree += r.norm_order == r.certified ? 1 : 0;
    purity_agree += r.norm_order == r.purity_order ? 1 : 0;
  }
  const bool ok = agree == static_cast<int>(rows.size()) && (d != 3 || purity_agree == static_cast<int>(rows.size()));
  Json j = report_header(c);
  j["pairs"] = rows.size();
  j["lp_agreement"] = agree;
  if (d == 3) j["purity_agreement"] = purity_agree;
  j["verified"] = ok;
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "pair,phi_norm,omega_norm,norm_order,lp_certified,lp_residual,purity_order\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      csv << i << "," << num(r.phi_norm) << "," << num(r.omega_norm) << "," << r.norm_order << "," << r.certified << ","
          << num(r.residual) << "," << (d == 3 ? std::to_string(r.purity_order) : std::string()) << "\n";
    }
    sink.write(csv.str());
    sink.write_to(sink.path().empty() ? "" : sink.path() + ".summary.json", dump(j));
  } else {
    sink.write(dump(j));
  }
  return ok ? 0 : 1;
}

inline Json codeword_json(const FrameCodewordReport& r) {
  Json j;
  Json ud = Json::array();
  for (const Rational& x : r.u_diagonal) ud.push_back(rational_string(x));
  Json md = Json::array();
  for (const Rational& x : r.m_diagonal) md.push_back(rational_string(x));
  j["u_diagonal"] = ud;
  j["m_diagonal"] = md;
  j["trace_norm_exact"] = rational_string(r.trace_norm_exact);
  j["trace_norm"] = r.trace_norm;
  j["frobenius_squared_exact"] = rational_string(r.frobenius_squared_exact);
  j["frobenius_norm"] = r.frobenius_norm;
  j["maximizer"] = mat_json(r.maximizer.rotation.matrix());
  j["maximizer_unique"] = r.maximizer.unique;
  j["maximizer_value"] = r.maximizer.value;
  j["sampled_best_value"] = r.sampled_best_value;
  return j;
}

inline int framebit_verify(RunConfig& c, const Sink& sink) {
  const Assumption2Counterexample r = assumption2_counterexample(c.seed);
  Json j = report_header(c);
  j["first"] = codeword_json(r.first);
  j["second"] = codeword_json(r.second);
  j["trace_norm_first_larger"] = r.trace_norm_first_larger;
  j["frobenius_first_smaller"] = r.frobenius_first_smaller;
  j["verified"] = r.trace_norm_first_larger && r.frobenius_first_smaller;
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "codeword,trace_norm_exact,trace_norm,frobenius_squared_exact,frobenius_norm,maximizer_unique\n";
    for (const auto& [name, cw] : {std::pair{"first", &r.first}, std::pair{"second", &r.second}}) {
      csv << name << "," << rational_string(cw->trace_norm_exact) << "," << num(cw->trace_norm) << ","
          << rational_string(cw->frobenius_squared_exact) << "," << num(cw->frobenius_norm) << ","
          << cw->maximizer.unique << "\n";
    }
    sink.write(csv.str());
  } else {
    sink.write(dump(j));
  }
  return 0;
}

// Coefficients from "i,j,value" CSV rows or {"dim_a", "dim_b", "coefficients"} JSON.
inline BipartiteVector read_bipartite(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open input file: " + path);
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  if (is_json) {
    Json j;
    try {
      j = Json::parse(f);
    } catch (const std::exception& e) {
      throw InputError(std::string("input JSON: ") + e.what());
    }
    try {
      const int da = j.at("dim_a").get<int>();
      const int db = j.at("dim_b").get<int>();
      const auto rows = j.at("coefficients").get<std::vector<std::vector<double>>>();
      require(static_cast<int>(rows.size()) == da + 1, "input JSON: coefficients need dim_a + 1 rows");
      Mat m(da + 1, db + 1);
      for (int i = 0; i <= da; ++i) {
        require(static_cast<int>(rows[i].size()) == db + 1, "input JSON: coefficients need dim_b + 1 columns");
        for (int k = 0; k <= db; ++k) m(i, k) = rows[i][k];
      }
      return BipartiteVector::from_matrix(m);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("input JSON: ") + e.what());
    }
  }
  std::string line;
  std::getline(f, line);
  if (line.rfind("i,j,value", 0) != 0) throw InputError("input CSV: header must be i,j,value");
  std::vector<std::tuple<int, int, double>> entries;
  int max_i = 0;
  int max_j = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string a, b, v;
    if (!std::getline(s, a, ',') || !std::getline(s, b, ',') || !std::getline(s, v)) {
      throw InputError("input CSV: malformed row: " + line);
    }
    try {
      const int i = std::stoi(a);
      const int k = std::stoi(b);
      require(i >= 0 && k >= 0, "input CSV: negative index");
      entries.emplace_back(i, k, std::stod(v));
      max_i = std::max(max_i, i);
      max_j = std::max(max_j, k);
    } catch (const std::logic_error&) {
      throw InputError("input CSV: malformed row: " + line);
    }
  }
  require(max_i >= 1 && max_j >= 1, "input CSV: both systems need dimension >= 1");
  Mat m = Mat::Zero(max_i + 1, max_j + 1);
  for (const auto& [i, k, v] : entries) m(i, k) = v;
  return BipartiteVector::from_matrix(m);
}

inline Json membership_json(const MembershipReport& r) {
  Json j;
  j["regime"] = to_string(r.regime);
  j["margin"] = r.margin;
  j["member"] = r.member;
  j["inconclusive"] = r.inconclusive;
  if (r.witness) {
    j["witness"] = {{"kind", r.witness->kind},
                    {"a_direction", vec_json(r.witness->a_direction)},
                    {"b_direction", vec_json(r.witness->b_direction)},
                    {"value", r.witness->value}};
  }
  j["grid_resolution"] = r.grid_resolution;
  j["refinement_depth"] = r.refinement_depth;
  j["pool_size"] = r.pool_size;
  return j;
}

inline Regime parse_regime(const std::string& s) {
  if (s == "min") return Regime::min;
  if (s == "max") return Regime::max;
  if (s == "quantum" || s == "quantum-d3") return Regime::quantum_d3;
  throw InputError("--regime must be one of min, max, quantum");
}

inline int composite_check(RunConfig& c, const Sink& sink) {
  set_default(c.grid, 2000);
  set_default(c.samples, 10000);
  require_positive(c.grid, "grid");
  require_positive(c.samples, "samples");
  MembershipOptions opt;
  opt.grid = *c.grid;
  opt.pool = *c.samples;
  opt.seed = c.seed;
  Json j = report_header(c);
  if (!c.input.empty()) {
    const BipartiteVector w = read_bipartite(c.input);
    const Regime regime = parse_regime(c.regime);
    const CompositeSpace space = regime == Regime::quantum_d3 ? CompositeSpace::quantum()
                                                               : CompositeSpace::noiseless(w.dim_a(), w.dim_b(), regime);
    j["dim_a"] = w.dim_a();
    j["dim_b"] = w.dim_b();
    j["membership"] = membership_json(omega_membership(space, w, opt));
  } else {
    const TetrahedronReport t = tetrahedron_d1();
    Json verts = Json::array();
    for (const auto& v : t.vertices) {
      Json row = Json::array();
      for (const Rational& x : v) row.push_back(rational_string(x));
      verts.push_back(row);
    }
    j["tetrahedron"] = {{"vertices", verts},
                        {"dimension", t.dimension},
                        {"composite_dimension", t.composite_dimension},
                        {"vertices_are_pure_products", t.vertices_are_pure_products}};
    const BipartiteVector s = singlet();
    Json singlet_reports = Json::array();
    for (Regime r : {Regime::min, Regime::max, Regime::quantum_d3}) {
      const CompositeSpace space = r == Regime::quantum_d3 ? CompositeSpace::quantum() : CompositeSpace::noiseless(3, 3, r);
      singlet_reports.push_back(membership_json(omega_membership(space, s, opt)));
    }
    j["singlet"] = singlet_reports;
    j["chsh"] = {{"pr_box", chsh_value(pr_box())}, {"max_deterministic", max_deterministic_chsh()}};
  }
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "regime,margin,member,inconclusive,witness_kind\n";
    auto line = [&](const Json& m) {
      csv << m["regime"].get<std::string>() << "," << num(m["margin"].get<double>()) << "," << m["member"].get<bool>()
          << "," << m["inconclusive"].get<bool>() << "," << (m.contains("witness") ? m["witness"]["kind"].get<std::string>() : "")
          << "\n";
    };
    if (j.contains("membership")) line(j["membership"]);
    else
      for (const Json& m : j["singlet"]) line(m);
    sink.write(csv.str());
  } else {
    sink.write(dump(j));
  }
  return 0;
}

inline int interaction_scan(RunConfig& c, const Sink& sink) {
  set_default(c.dim, 2);
  set_default(c.samples, 10000);
  set_default(c.grid, 200);
  require_positive(c.dim, "dim");
  require_positive(c.samples, "samples");
  require_positive(c.grid, "grid");
  require(*c.dim <= 5, "interaction-scan: --dim above 5 is out of scope");
  const int d = *c.dim;
  // Enough random pairs for three constraint rows per unknown.
  const int params = ((d + 1) * (d + 1) - 1) * ((d + 1) * (d + 1) - 2) / 2;
  const int constraint_samples = std::max(20, (3 * params + 2 * (d + 1) - 1) / (2 * (d + 1)));
  ScanOptions scan;
  scan.max_samples = *c.samples;
  scan.effect_grid = *c.grid;
  scan.times = 16;
  scan.pairs = std::max(1, *c.samples / scan.times);
  scan.seed = derive_seed(c.seed, 2);
  const FeasibleSpaceReport r = feasible_generator_space(d, constraint_samples, c.seed, scan);
  Json j = report_header(c);
  j["constraint_samples"] = constraint_samples;
  j["parameters"] = r.parameters;
  j["feasible_dim"] = r.feasible_dim;
  j["local_dim"] = r.local_dim;
  j["intersection_dim"] = r.intersection_dim;
  j["inconclusive"] = r.inconclusive;
  j["singular_gap"] = r.singular_gap;
  Json verdicts = Json::array();
  Json witnesses = Json::array();
  for (std::size_t k = 0; k < r.nonlocal_verdicts.size(); ++k) {
    const ScanResult& v = r.nonlocal_verdicts[k];
    verdicts.push_back({{"candidate", k},
                        {"pass", v.pass},
                        {"samples_checked", v.samples_checked},
                        {"min_probability", v.min_probability},
                        {"max_probability", v.max_probability}});
    if (v.witness) {
      const ScanWitness& w = *v.witness;
      witnesses.push_back({{"candidate", k},
                           {"x", vec_json(w.x)},
                           {"y", vec_json(w.y)},
                           {"t", w.t},
                           {"effect_a", vec_json(w.u)},
                           {"effect_b", vec_json(w.v)},
                           {"value", w.value},
                           {"sample_index", w.sample_index}});
    }
  }
  j["nonlocal_verdicts"] = verdicts;
  j["witnesses"] = witnesses;
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "candidate,pass,samples_checked,min_probability,max_probability\n";
    for (const Json& v : verdicts) {
      csv << v["candidate"].get<std::size_t>() << "," << v["pass"].get<bool>() << ","
          << v["samples_checked"].get<std::size_t>() << "," << num(v["min_probability"].get<double>()) << ","
          << num(v["max_probability"].get<double>()) << "\n";
    }
    sink.write(csv.str());
    sink.write_to(sink.path().empty() ? "" : sink.path() + ".summary.json", dump(j));
  } else {
    sink.write(dump(j));
  }
  return 0;
}

inline int capacity_cmd(RunConfig& c, const Sink& sink) {
  GenericStateSpace space;
  int limit = 3;
  if (c.space == "ball") {
    set_default(c.dim, 3);
    require_positive(c.dim, "dim");
    space = ball_state_space(*c.dim, 64, c.seed);
  } else if (c.space == "simplex") {
    set_default(c.dim, 3);
    require_positive(c.dim, "dim");
    space = simplex_state_space(*c.dim);
    limit = *c.dim + 1;
  } else if (c.space == "square") {
    space = square_state_space();
  } else if (c.space == "polygon") {
    set_default(c.dim, 5);
    require(*c.dim >= 3, "capacity: polygon needs --dim >= 3 vertices");
    space = polygon_state_space(*c.dim);
  } else {
    throw InputError("--space must be one of ball, simplex, square, polygon");
  }
  const CapacityResult r = capacity(space, limit);
  Json j = report_header(c);
  j["space"] = space.description;
  j["capacity"] = r.value;
  j["exact"] = r.exact;
  j["method"] = r.method;
  j["search_limit"] = limit;
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "space,capacity,exact,method\n" << c.space << "," << r.value << "," << r.exact << "," << r.method << "\n";
    sink.write(csv.str());
  } else {
    sink.write(dump(j));
  }
  return 0;
}

}  // namespace detail

inline const std::vector<std::pair<std::string, std::string>>& experiments() {
  static const std::vector<std::pair<std::string, std::string>> names{
      {"transmit", "send random directions through ball states and decode them"},
      {"angle", "estimate the angle between two hidden measurement devices"},
      {"majorize", "compare the norm order with LP mixing certificates"},
      {"framebit-verify", "exact frame-bit codeword counterexample"},
      {"composite-check", "membership of a bipartite vector, or the built-in composite checks"},
      {"interaction-scan", "feasible interaction generators and admissibility witnesses"},
      {"capacity", "number of perfectly distinguishable states"},
  };
  return names;
}

/// Parses argv, runs one experiment and returns the exit code: 0 success,
/// 1 verification or numerical failure, 2 input error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Direction-bit toolkit experiments", "dirbit"};
  app.set_version_flag("--version", std::string(kVersion));
  RunConfig c;
  app.set_config("--config", "", "flat key = value file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--dim", c.dim, "dimension d");
  app.add_option("--visibility", c.visibility, "visibility a");
  app.add_option("--noise", c.noise, "noise c");
  app.add_option("--shots", c.shots, "shots per probability");
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--grid", c.grid, "grid resolution (directions, pool or effect grid)");
  app.add_option("--samples", c.samples, "sample count (trials, pairs or scan budget)");
  app.add_option("--out", c.out, "output path; stdout if omitted");
  app.add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--input", c.input, "composite-check: coefficient file (.csv or .json)");
  app.add_option("--space", c.space, "capacity: ball, simplex, square or polygon");
  app.add_option("--regime", c.regime, "composite-check: min, max or quantum");
  app.add_option("--records", c.records, "transmit: CSV of shot records for the first trial");
  app.add_flag("--hide-truth", c.hide_truth, "angle: omit the true angle");
  app.require_subcommand(1);
  for (const auto& [name, help] : experiments()) app.add_subcommand(name, help)->fallthrough();
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  c.experiment = app.get_subcommands().front()->get_name();
  const detail::Sink sink(c.out, out);
  try {
    if (c.experiment == "transmit") return detail::transmit(c, sink);
    if (c.experiment == "angle") return detail::angle(c, sink);
    if (c.experiment == "majorize") return detail::majorize(c, sink);
    if (c.experiment == "framebit-verify") return detail::framebit_verify(c, sink);
    if (c.experiment == "composite-check") return detail::composite_check(c, sink);
    if (c.experiment == "interaction-scan") return detail::interaction_scan(c, sink);
    if (c.experiment == "capacity") return detail::capacity_cmd(c, sink);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 1;
  }
  err << "unknown experiment\n";
  return 2;
}

}  // namespace dirbit::cli
