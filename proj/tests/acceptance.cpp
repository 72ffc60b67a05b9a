// One pass/fail line per acceptance criterion. Exit status is non-zero if
// any criterion fails.

#include "dirbit/angle_tomography.hpp"
#include "dirbit/composite.hpp"
#include "dirbit/framebit.hpp"
#include "dirbit/gpt_core.hpp"
#include "dirbit/interaction.hpp"
#include "dirbit/protocol.hpp"
#include "dirbit/so_group.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dirbit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

// 1. Frame-bit counterexample.
Outcome frame_bit() {
  const Assumption2Counterexample c = assumption2_counterexample(0);
  const double t1 = c.first.trace_norm, t2 = c.second.trace_norm;
  const double f1 = c.first.frobenius_norm, f2 = c.second.frobenius_norm;
  const bool values = std::abs(t1 - 11.0 / 13.0) <= 1e-12 && std::abs(t2 - 4.0 / 5.0) <= 1e-12 &&
                      std::abs(f1 - std::sqrt(59.0) / 13.0) <= 1e-12 && std::abs(f2 - std::sqrt(198.0) / 20.0) <= 1e-12;
  const bool exact = c.first.trace_norm_exact == Rational(11, 13) && c.second.trace_norm_exact == Rational(4, 5) &&
                     c.first.frobenius_squared_exact == Rational(59, 169) &&
                     c.second.frobenius_squared_exact == Rational(198, 400);
  const bool order = t1 > t2 && f1 < f2;
  const Mat id = Mat::Identity(3, 3);
  const double dev = std::max((c.first.maximizer.rotation.matrix() - id).cwiseAbs().maxCoeff(),
                              (c.second.maximizer.rotation.matrix() - id).cwiseAbs().maxCoeff());
  const bool maximizers = c.first.maximizer.unique && c.second.maximizer.unique && dev <= 1e-10;
  return {values && exact && order && maximizers,
          "trace norms 11/13 vs 4/5, Frobenius sqrt59/13 vs sqrt198/20, maximizer deviation " + fmt(dev)};
}

// 2. Tetrahedron for two noiseless 1-balls.
Outcome tetrahedron() {
  const TetrahedronReport r = tetrahedron_d1();
  const std::set<std::array<Rational, 4>> got(r.vertices.begin(), r.vertices.end());
  const std::set<std::array<Rational, 4>> listed = {
      {Rational(1), Rational(1), Rational(1), Rational(1)},
      {Rational(1), Rational(-1), Rational(1), Rational(-1)},
      {Rational(1), Rational(1), Rational(-1), Rational(-1)},
      {Rational(1), Rational(-1), Rational(-1), Rational(1)},
  };
  const bool ok = r.vertices.size() == 4 && got == listed && r.composite_dimension == (1 + 1) * (1 + 1) - 1 &&
                  r.dimension == r.composite_dimension;
  return {ok, std::to_string(r.vertices.size()) + " vertices, dimension " + std::to_string(r.dimension)};
}

// 3. Direction transmission.
Outcome transmission() {
  const BallSpace space(3, 1.0, 0.5);
  std::vector<double> errors;
  for (const auto& t : run_transmission(space, 1.0, 20, 100000, 100, 2024)) errors.push_back(degrees(t.angular_error));
  const double med = median(errors);
  std::vector<double> lx, ly;
  for (std::int64_t shots : {1000, 10000, 100000, 1000000}) {
    std::vector<double> e;
    for (const auto& t : run_transmission(space, 1.0, 20, shots, 100, 77)) e.push_back(t.angular_error);
    lx.push_back(std::log10(static_cast<double>(shots)));
    ly.push_back(std::log10(median(e)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = num / den;
  return {med <= 1.0 && slope >= -0.65 && slope <= -0.35,
          "median error " + fmt(med) + " deg (<= 1), slope " + fmt(slope) + " (in [-0.65, -0.35])"};
}

// 4. Angle tomography.
Outcome angle_tomography() {
  std::string detail;
  bool ok = true;
  for (int d : {2, 3, 5}) {
    int good = 0;
    for (int run = 0; run < 50; ++run) {
      const std::uint64_t seed = derive_seed(4000 + d, run);
      const BallSpace space(d, 1.0, 0.5, haar_sample(d, derive_seed(seed, 1)).matrix());
      Rng rng = make_rng(derive_seed(seed, 2));
      const HiddenDevice y(space, random_unit_vector(d, rng), 1);
      const HiddenDevice z(space, random_unit_vector(d, rng), 2);
      TomographyBudget budget;
      budget.shots = 1000000;
      budget.max_condition = 100.0;
      const AngleEstimate r = protocol_c1_repeated(
          y, z, [&](int attempt) { return random_preparations(space, derive_seed(seed, 3, attempt)); }, budget,
          derive_seed(seed, 4));
      good += std::abs(degrees(r.angle - true_angle(y, z))) <= 2.0 ? 1 : 0;
    }
    ok = ok && good >= 48;  // 95% of 50, rounded up
    detail += "d=" + std::to_string(d) + ": " + std::to_string(good) + "/50 ";
  }
  return {ok, detail + "within 2 deg"};
}

// 5. Majorization cross-validation.
Outcome majorization() {
  const BallSpace space(3, 1.0, 0.5);
  int lp_agree = 0, purity_agree = 0;
  const int pairs = 1000;
  for (int i = 0; i < pairs; ++i) {
    Rng rng = make_rng(derive_seed(5000, i));
    const BallState phi(random_ball_point(3, rng));
    const BallState omega(random_ball_point(3, rng));
    const bool norm_order = majorization_le(space, phi, omega);
    const bool certified = majorization_certificate(space, phi, omega, 200, derive_seed(5001, i)).has_value();
    auto density = [](const Vec& b) {
      return CMat(0.5 * (pauli(0) + b(0) * pauli(1) + b(1) * pauli(2) + b(2) * pauli(3)));
    };
    const CMat rp = density(phi.bloch());
    const CMat ro = density(omega.bloch());
    const bool purity = (rp * rp).trace().real() <= (ro * ro).trace().real();
    lp_agree += norm_order == certified ? 1 : 0;
    purity_agree += norm_order == purity ? 1 : 0;
  }
  return {lp_agree == pairs && purity_agree == pairs,
          "LP agreement " + std::to_string(lp_agree) + "/1000, purity agreement " + std::to_string(purity_agree) + "/1000"};
}

// 6. Quantum generators satisfy every constraint.
Outcome interaction_positive() {
  const auto samples = random_direction_pairs(3, 200, 6000);
  double worst_first = 0.0;
  int passed = 0;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      if (mu == 0 && nu == 0) continue;
      const Generator g = quantum_generator(pauli2(mu, nu));
      worst_first = std::max(worst_first, derivative_constraints(g, samples).max_abs_first);
      ScanOptions opt;
      opt.seed = derive_seed(6001, mu, nu);
      passed += admissibility_scan(g, opt).pass ? 1 : 0;
    }
  CMat h = CMat::Zero(4, 4);
  h(3, 3) = std::numbers::pi;
  const CMat u = CMat(Complex(0.0, -1.0) * h).exp();
  CVec plus = CVec::Constant(4, Complex(0.5, 0.0));
  const CMat rho = u * (plus * plus.adjoint()) * u.adjoint();
  const double direct = negativity(rho);
  const BipartiteVector evolved = evolve(quantum_generator(h), from_density(plus * plus.adjoint()), 1.0);
  const double neg = negativity(to_density(evolved));
  return {worst_first <= 1e-10 && passed == 15 && std::abs(neg - 0.5) <= 1e-9 && std::abs(direct - 0.5) <= 1e-9,
          "max |f'(0)| " + fmt(worst_first) + ", scans passed " + std::to_string(passed) + "/15, negativity " +
              fmt(neg, 12)};
}

// 7. Block-diagonal generators are rejected.
Outcome interaction_negative() {
  int rejected = 0, total = 0;
  double worst_trace = 0.0;
  std::size_t most_samples = 0;
  for (int d : {2, 4, 5}) {
    for (int k = 0; k < 50; ++k) {
      ++total;
      const Generator g = random_block_diagonal(d, derive_seed(7000 + d, k));
      ScanOptions opt;
      opt.seed = derive_seed(7100 + d, k);
      opt.max_samples = 10000;
      const BlockDiagonalRejection r = reject_block_diagonal(g, opt);
      const double v2 = r.blocks.v.squaredNorm();
      worst_trace = std::max(worst_trace, std::abs(r.second_order.trace_v2 + v2));
      // The same scan without the second-order seed, random pairs only.
      const Mat zero = Mat::Zero(d, d);
      const ScanResult blind = admissibility_scan(block_diagonal_generator(zero, zero, r.blocks.v), opt);
      const bool witnessed = !r.second_order.pass && r.second_order.value < 0.0 && !r.scan.pass &&
                             r.scan.witness.has_value() && r.scan.samples_checked <= 10000 && !blind.pass &&
                             blind.samples_checked <= 10000 && std::abs(r.blocks.v.norm() - 1.0) <= 1e-12;
      if (witnessed) most_samples = std::max(most_samples, blind.samples_checked);
      rejected += witnessed ? 1 : 0;
    }
  }
  return {rejected == total && worst_trace <= 1e-10,
          std::to_string(rejected) + "/" + std::to_string(total) + " rejected with witnesses (unseeded scan needed at most " +
              std::to_string(most_samples) + " samples), max |tr(V^2) + |V|^2| " + fmt(worst_trace)};
}

// 8. Capacity.
Outcome capacity_values() {
  bool ok = true;
  std::string detail;
  for (int d = 1; d <= 5; ++d) ok = ok && capacity(ball_state_space(d), 3).value == 2;
  for (int n = 1; n <= 5; ++n) ok = ok && capacity(simplex_state_space(n), n + 1).value == n;
  const int square = capacity(square_state_space(), 3).value;
  ok = ok && square == 2;
  return {ok, "balls d<=5 -> 2, simplices n<=5 -> n, square -> " + std::to_string(square)};
}

// 9. CLI determinism.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

Outcome determinism() {
  const char* cli = std::getenv("DIRBIT_CLI_PATH");
  if (!cli) return {false, "DIRBIT_CLI_PATH not set"};
  const auto dir = std::filesystem::temp_directory_path() / "dirbit_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"transmit", "transmit --dim 3 --shots 100000 --seed 7 --samples 20 --format csv"},
      {"angle", "angle --dim 3 --shots 100000 --seed 3"},
      {"majorize", "majorize --samples 200 --seed 5"},
      {"framebit", "framebit-verify"},
      {"composite", "composite-check --seed 2"},
      {"interaction", "interaction-scan --dim 2 --seed 1 --samples 5000"},
      {"capacity", "capacity --space simplex --dim 4"},
  };
  int identical = 0;
  std::string failed;
  for (const auto& [name, args] : runs) {
    std::vector<std::string> contents;
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = dir / (name + "_" + std::to_string(rep) + ".out");
      std::filesystem::remove(out);
      std::filesystem::remove(out.string() + ".summary.json");
      // Different worker counts on the two runs as well.
      const std::string cmd = std::string("DIRBIT_THREADS=") + (rep ? "3" : "1") + " \"" + cli + "\" " + args +
                              " --out \"" + out.string() + "\" > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      contents.push_back(rc == 0 ? slurp(out) + "\n--\n" + slurp(out.string() + ".summary.json") : "rc!=0");
    }
    if (contents[0] == contents[1] && contents[0] != "rc!=0" && !contents[0].empty()) ++identical;
    else failed += " " + name;
  }
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " experiments byte-identical" +
              (failed.empty() ? "" : "; differing:" + failed)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "frame-bit counterexample", 1.0, frame_bit},
      {2, "d=1 tetrahedron", 1.0, tetrahedron},
      {3, "direction transmission", 120.0, transmission},
      {4, "angle tomography", 300.0, angle_tomography},
      {5, "majorization cross-validation", 60.0, majorization},
      {6, "interaction, quantum generators", 60.0, interaction_positive},
      {7, "interaction, block-diagonal rejection", 120.0, interaction_negative},
      {8, "capacity", 10.0, capacity_values},
      {9, "CLI determinism", 600.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << "criterion " << c.id << " [" << (pass ? "PASS" : "FAIL") << "] " << c.name << ": " << o.detail
              << " (" << fmt(secs, 3) << " s, limit " << c.limit_seconds << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
