// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "monosplit/commands.hpp"

using namespace monosplit;
using monosplit::io::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

// One exact step of a run: kept for the descent check.
struct Step {
  Vector x_prev, y, x_next;
};

struct ExactRun {
  std::string label;
  Vector x_star;
  double sigma;
  std::vector<Step> steps;
};

std::vector<ExactRun> g_exact_runs;

std::string fmt(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", d);
  return buf;
}

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

// Problems shared by criteria 2, 4 and 7.
std::vector<Problem> vi_problems() {
  return {make_rotation_vi(), make_random_affine_box_vi(4, 1), make_random_affine_box_vi(6, 2),
          make_random_affine_box_vi(8, 3)};
}

// -- 1 ------------------------------------------------------------------------
Outcome fb_equality() {
  const auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(2026);
  const Problem p = make_quadratic_l1(oracle::gaussian_vector(rng, 50, 3.0), 1.0);
  const double lambda = 1.0;
  const auto split = make_split(p, Method::fb, lambda, lambda);
  const double sigma = method_sigma(split, lambda);
  ExactRun run{"quadratic_l1/fb", p.reference_solution, sigma, {}};
  Vector x = oracle::gaussian_vector(rng, 50, 5.0);
  double worst = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    const auto out = fb_step(split, lambda, x);
    const auto rep = check_sigma_resolvent(x, lambda, sigma, out.cert);
    const double excess = std::abs(rep.lhs - rep.rhs) / tol_ineq(rep.step_norm);
    worst = std::max(worst, excess);
    if (excess > 1.0) fail(o, "step " + std::to_string(k) + ": |lhs - rhs| exceeds tolerance");
    run.steps.push_back({x, out.cert.y, out.x_next});
    x = out.x_next;
  }
  g_exact_runs.push_back(std::move(run));
  const double t = seconds_since(t0);
  if (t >= 1.0) fail(o, "runtime " + fmt(t) + " s >= 1 s");
  if (o.pass) o.detail = "1000 steps, max |lhs-rhs|/tol = " + fmt(worst) + ", " + fmt(t) + " s";
  return o;
}

// -- 2 ------------------------------------------------------------------------
Outcome lipschitz_inequality() {
  const auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(7);
  double min_korp_eps = 0.0;
  std::size_t steps = 0;
  for (const Problem& p : vi_problems()) {
    for (Method m : {Method::tseng, Method::korpelevich}) {
      const double lambda = 0.9 * p.lambda_limit(m);
      const auto split = make_split(p, m, lambda, lambda);
      const double sigma = method_sigma(split, lambda);
      ExactRun run{p.name + "/" + to_string(m), p.reference_solution, sigma, {}};
      Vector x = oracle::gaussian_vector(rng, p.dim(), 3.0);
      for (int k = 1; k <= 2000; ++k, ++steps) {
        const auto out = split_step(split, lambda, x);
        const auto rep = check_sigma_resolvent(x, lambda, sigma, out.cert);
        const std::string where = run.label + " step " + std::to_string(k);
        if (!rep.satisfied) fail(o, where + ": lhs > rhs + tol");
        if (m == Method::tseng && out.cert.eps != 0.0) fail(o, where + ": Tseng eps != 0");
        if (m == Method::korpelevich) {
          min_korp_eps = std::min(min_korp_eps, out.cert.eps);
          if (out.cert.eps < -1e-12) fail(o, where + ": Korpelevich eps < -1e-12");
        }
        run.steps.push_back({x, out.cert.y, out.x_next});
        x = out.x_next;
      }
      g_exact_runs.push_back(std::move(run));
    }
  }
  const double t = seconds_since(t0);
  if (t >= 2.0) fail(o, "runtime " + fmt(t) + " s >= 2 s");
  if (o.pass) {
    o.detail = std::to_string(steps) + " steps on 4 problems, min Korpelevich eps = " + fmt(min_korp_eps) + ", " +
               fmt(t) + " s";
  }
  return o;
}

// -- 3 ------------------------------------------------------------------------
Outcome per_step_descent() {
  Outcome o;
  if (g_exact_runs.empty()) fail(o, "no exact runs recorded");
  std::size_t checked = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& run : g_exact_runs) {
    for (std::size_t k = 0; k < run.steps.size(); ++k, ++checked) {
      const auto& s = run.steps[k];
      const double d_prev = (run.x_star - s.x_prev).squaredNorm();
      const double d_next = (run.x_star - s.x_next).squaredNorm();
      const double gain = (1.0 - run.sigma * run.sigma) * (s.y - s.x_prev).squaredNorm();
      const double slack = (d_prev - d_next - gain) / (1.0 + d_prev);
      min_slack = std::min(min_slack, slack);
      if (slack < -1e-9) fail(o, run.label + " step " + std::to_string(k + 1) + ": descent inequality fails");
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " steps, min scaled slack = " + fmt(min_slack);
  return o;
}

// -- 4 ------------------------------------------------------------------------
SolveTrace solve(const SplitProblem& split, double lambda, const Vector& x0, std::size_t iters, double stop_tol,
                 std::optional<ErrorSchedule> errors = {}) {
  HpeConfig cfg(method_sigma(split, lambda), LambdaSchedule::constant(lambda), iters, stop_tol);
  cfg.errors = errors;
  return hpe_solve(split_oracle(split), x0, cfg);
}

Outcome convergence() {
  Outcome o;
  std::mt19937_64 rng(44);
  std::vector<std::string> notes;

  const Problem ql1 = make_quadratic_l1(oracle::gaussian_vector(rng, 50, 3.0), 1.0);
  for (double lambda : {1.0, 0.5, 1.9}) {
    const auto tr = solve(make_split(ql1, Method::fb, lambda, lambda), lambda, Vector::Zero(50), 5000, 1e-13);
    const double d = (tr.x_final - ql1.reference_solution).norm();
    if (d > 1e-8) fail(o, "fb quadratic_l1 lambda " + fmt(lambda) + ": distance " + fmt(d));
    if (lambda == 1.9) notes.push_back("fb(1.9) " + std::to_string(tr.records.size()) + " it");
  }

  const Problem rot = make_rotation_vi();
  for (Method m : {Method::tseng, Method::korpelevich}) {
    for (const Vector& x0 : {Vector(Vector::Unit(2, 0)), Vector(Vector::Ones(2))}) {
      const auto tr = solve(make_split(rot, m, 0.9, 0.9), 0.9, x0, 5000, 1e-12);
      if (tr.x_final.norm() > 1e-6) fail(o, std::string("rotation ") + to_string(m) + ": |x| = " + fmt(tr.x_final.norm()));
    }
  }

  std::size_t max_it = 0;
  for (const Problem& p : vi_problems()) {
    if (p.provenance != Provenance::active_set_oracle) continue;
    for (Method m : {Method::tseng, Method::korpelevich}) {
      const double lambda = 0.9 * p.lambda_limit(m);
      const auto tr = solve(make_split(p, m, lambda, lambda), lambda, oracle::gaussian_vector(rng, p.dim(), 2.0), 5000,
                            1e-12);
      max_it = std::max(max_it, tr.records.size());
      const double d = (tr.x_final - p.reference_solution).norm();
      if (d > 1e-6) fail(o, "box VI n=" + std::to_string(p.dim()) + " " + to_string(m) + ": distance " + fmt(d));
    }
  }
  if (o.pass) o.detail = "fb, rotation and 3 box VIs within tolerance; box VIs took <= " + std::to_string(max_it) + " it";
  return o;
}

// -- 5 ------------------------------------------------------------------------
Outcome summable_errors() {
  Outcome o;
  std::mt19937_64 rng(55);
  struct Case {
    std::string label;
    Problem problem;
    Method method;
  };
  const Problem ql1 = make_quadratic_l1(oracle::gaussian_vector(rng, 20, 3.0), 1.0);
  const Problem box = make_random_affine_box_vi(5, 9);
  const std::vector<Case> cases{{"quadratic_l1/fb", ql1, Method::fb},
                                {"quadratic_l1/tseng", ql1, Method::tseng},
                                {"rotation_vi/tseng", make_rotation_vi(), Method::tseng},
                                {"rotation_vi/korpelevich", make_rotation_vi(), Method::korpelevich},
                                {"box_vi/tseng", box, Method::tseng},
                                {"box_vi/korpelevich", box, Method::korpelevich}};
  double worst_final = 0.0;
  std::size_t runs = 0;
  for (const auto& c : cases) {
    for (double p : {2.0, 1.0}) {
      ++runs;
      const double lambda = c.method == Method::fb ? 1.0 : 0.9 * c.problem.lambda_limit(c.method);
      const auto split = make_split(c.problem, c.method, lambda, lambda);
      const auto tr = solve(split, lambda, oracle::gaussian_vector(rng, c.problem.dim(), 2.0), 10000, 1e-10,
                            make_error_schedule(0.1, p, 1000 + runs));
      const std::string where = c.label + " p=" + fmt(p);
      const Vector& xs = c.problem.reference_solution;
      double d_prev = (xs - tr.records.front().x_prev).norm();
      for (const auto& rec : tr.records) {
        const double d = (xs - rec.x_next).norm();
        if (d > d_prev + rec.injected_error.norm() + 1e-9) {
          fail(o, where + " step " + std::to_string(rec.k) + ": quasi-Fejer inequality fails");
        }
        d_prev = d;
      }
      if (p == 2.0) {
        const double final_d = (tr.x_final - xs).norm();
        worst_final = std::max(worst_final, final_d);
        if (final_d > 1e-3) fail(o, where + ": final distance " + fmt(final_d));
        double rho_sum = 0.0;
        for (const auto& rec : tr.records) rho_sum += rec.injected_error.norm();
        if (rho_sum > oracle::basel(0.1) + 1e-12) fail(o, where + ": error sum exceeds c*pi^2/6");
      }
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs, worst final distance (p=2) = " + fmt(worst_final);
  return o;
}

// -- 6 ------------------------------------------------------------------------
Outcome exact_prox_sequence() {
  Outcome o;
  std::mt19937_64 rng(66);
  const Vector x0 = oracle::gaussian_vector(rng, 6, 10.0);
  double worst = 0.0;
  for (double lambda : {1.0, 0.3}) {
    HpeConfig cfg(0.0, LambdaSchedule::constant(lambda), 100, 1e-300);
    const auto tr = hpe_solve(exact_prox_oracle(affine(Matrix::Identity(6, 6), Vector::Zero(6))), x0, cfg);
    if (tr.records.size() != 100) fail(o, "run stopped after " + std::to_string(tr.records.size()) + " steps");
    for (const auto& rec : tr.records) {
      const Vector expected = x0 / std::pow(1.0 + lambda, static_cast<double>(rec.k));
      const double err = (rec.x_next - expected).cwiseAbs().maxCoeff();
      worst = std::max(worst, err);
      if (err > 1e-13) fail(o, "lambda " + fmt(lambda) + " step " + std::to_string(rec.k) + ": error " + fmt(err));
    }
  }
  if (o.pass) o.detail = "max coordinate error " + fmt(worst);
  return o;
}

// -- 7 ------------------------------------------------------------------------
Outcome falsifier_soundness() {
  Outcome o;
  constexpr std::size_t m = 1000;
  std::mt19937_64 rng(77);
  std::size_t certs = 0, caught = 0;
  const Problem ql1 = make_quadratic_l1(oracle::gaussian_vector(rng, 5, 3.0), 1.0);
  const auto vis = vi_problems();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::string s = " seed " + std::to_string(seed);
    auto expect_pass = [&](const MonotoneOp& op, const Certificate& cert, double lambda, const std::string& what) {
      ++certs;
      const auto v = check_certificate(op, cert, lambda, seed, m);
      if (!v.passed) fail(o, what + s + ": falsified, gap " + fmt(v.worst_gap));
    };

    Matrix G = Matrix::Zero(4, 4);
    for (Eigen::Index j = 0; j < 4; ++j) G.col(j) = oracle::gaussian_vector(rng, 4);
    const auto A = grad_quadratic(G.transpose() * G, oracle::gaussian_vector(rng, 4));
    expect_pass(A, transport_cocoercive(A, oracle::gaussian_vector(rng, 4, 2.0), oracle::gaussian_vector(rng, 4, 2.0)),
                1.0, "transport");

    const auto fb = make_split(ql1, Method::fb, 1.5, 1.5);
    expect_pass(total_operator(fb), fb_step(fb, 1.5, oracle::gaussian_vector(rng, 5, 4.0)).cert, 1.5, "fb_step");

    const Problem& p = vis[seed % vis.size()];
    for (Method meth : {Method::tseng, Method::korpelevich}) {
      const double lambda = 0.9 * p.lambda_limit(meth);
      const auto split = make_split(p, meth, lambda, lambda);
      const auto out = split_step(split, lambda, oracle::gaussian_vector(rng, p.dim(), 3.0));
      expect_pass(total_operator(split), out.cert, lambda, std::string(to_string(meth)) + "_step");
    }

    // v scaled by 1.5 at eps = 0 on the identity.
    const Vector y = oracle::gaussian_vector(rng, 2);
    const auto bad = check_certificate(affine(Matrix::Identity(2, 2), Vector::Zero(2)),
                                       make_certificate(y, 1.5 * y, 0.0), 1.0, seed, m);
    if (bad.passed) fail(o, "corrupted certificate not falsified" + s);
    caught += !bad.passed;
  }
  if (o.pass) {
    o.detail = std::to_string(certs) + " certificates passed, " + std::to_string(caught) +
               "/20 corrupted certificates falsified";
  }
  return o;
}

// -- 8 ------------------------------------------------------------------------
Outcome calculus_identities() {
  Outcome o;
  constexpr std::size_t m = 200;
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::size_t scaled_checked = 0, combined_checked = 0;
  const Vector w3 = Vector::Constant(3, 0.7);
  Matrix skew(3, 3);
  skew << 1.0, 2.0, 0.0, -2.0, 1.0, 0.5, 0.0, -0.5, 0.2;
  const std::vector<MonotoneOp> ops{subdiff_l1(w3), normal_cone_box(-Vector::Ones(3), Vector::Ones(3)),
                                    normal_cone_ball(1.5, 3), affine(skew, Vector::Ones(3))};

  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    const std::string t = " trial " + std::to_string(trial);
    // scale_certificate: a graph point of T with slack ε is lifted to f·T.
    {
      const MonotoneOp& T = ops[trial % ops.size()];
      const auto g = graph_sample(T, 1.0, trial, 1, {Vector::Zero(3), 2.0}).front();
      const Certificate cert = make_certificate(g.z, g.u, U(rng));
      if (check_certificate(T, cert, 1.0, trial, m).passed) {
        const double f = 0.1 + 9.9 * U(rng);
        ++scaled_checked;
        if (!check_certificate(scaled(f, T), scale_certificate(cert, f), 1.0, trial, m).passed) {
          fail(o, "scale_certificate" + t);
        }
      }
    }
    // combine_sum: transport certificate for A plus exact point of B at the same y.
    {
      Matrix G(3, 3);
      for (Eigen::Index j = 0; j < 3; ++j) G.col(j) = oracle::gaussian_vector(rng, 3);
      const auto A = grad_quadratic(G.transpose() * G, oracle::gaussian_vector(rng, 3));
      const MonotoneOp& B = ops[trial % 3];  // the ones with resolvents
      const Vector w = oracle::gaussian_vector(rng, 3, 2.0);
      const Vector y = resolvent(B, 1.0, w);
      const Certificate ca = transport_cocoercive(A, y, oracle::gaussian_vector(rng, 3, 2.0));
      const Certificate cb = make_certificate(y, w - y, 0.5 * U(rng));
      if (check_certificate(A, ca, 1.0, trial, m).passed && check_certificate(B, cb, 1.0, trial, m).passed) {
        ++combined_checked;
        if (!check_certificate(sum(A, B), combine_sum(ca, cb), 1.0, trial, m).passed) fail(o, "combine_sum" + t);
      }
    }
  }
  if (scaled_checked < 900 || combined_checked < 900) fail(o, "too few trials had passing inputs");
  if (o.pass) {
    o.detail = std::to_string(scaled_checked) + " scaled and " + std::to_string(combined_checked) +
               " summed certificates passed";
  }
  return o;
}

// -- 9 ------------------------------------------------------------------------
Outcome boundary_fixture() {
  Outcome o;
  const auto fx = p2_counterexample();
  const auto xs = fx.iterates(1.0, 60);
  std::vector<double> d;
  for (double x : xs) d.push_back(std::abs(x));
  if (!quasi_fejer_check(d, std::vector<double>(d.size() - 1, 0.0))) fail(o, "iterates are not Fejer");
  if (d.back() > 1e-12) fail(o, "|x_60| = " + fmt(d.back()));
  if (fx.witness_point != 1.0 || fx.witness_image() != -1.0) fail(o, "witness is not (1, -1)");
  if (fx.witness_progress() != 0.0) fail(o, "witness progress " + fmt(fx.witness_progress()));
  if (fx.witness_limit_in_omega()) fail(o, "witness limit lies in the solution set");
  if (o.pass) o.detail = "|x_60| = " + fmt(d.back()) + ", witness progress 0, limit 1 not a solution";
  return o;
}

// -- 10 -----------------------------------------------------------------------
// Perturbs one field of a trace step line.
json corrupt(json step, const std::string& field) {
  json& f = step[field];
  if (f.is_boolean()) {
    f = !f.get<bool>();
  } else if (f.is_number_unsigned()) {
    f = f.get<std::size_t>() + 1;
  } else if (f.is_number()) {
    f = 1.1 * f.get<double>() + 0.1;
  } else {
    f[0] = 1.1 * f[0].get<double>() + 0.1;
  }
  return step;
}

Outcome cli_round_trip() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("monosplit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ostringstream log;
  const json suite = cli::default_suite();
  std::size_t runs = 0, corruptions = 0;
  const std::vector<std::string> fields{"k", "lambda", "y", "v", "eps", "x_prev", "x_next", "r", "lhs", "rhs",
                                        "satisfied"};
  for (const auto& cfg : suite.at("runs")) {
    const std::string tag = "run " + std::to_string(++runs);
    const fs::path rd = dir / tag;
    fs::create_directories(rd);
    const std::string cfg_path = (rd / "config.json").string();
    std::ofstream(cfg_path) << cfg.dump();
    const int solve_code = cli::cmd_solve(cfg_path, (rd / "out").string(), log);
    if (solve_code != cli::exit_code::ok) fail(o, tag + ": solve exit " + std::to_string(solve_code));
    const std::string trace = (rd / "out" / "trace.jsonl").string();
    const int cert_code = cli::cmd_certify(trace, cfg_path, "", log);
    if (cert_code != cli::exit_code::ok) fail(o, tag + ": certify exit " + std::to_string(cert_code));

    std::vector<std::string> lines;
    {
      std::ifstream in(trace);
      for (std::string s; std::getline(in, s);) lines.push_back(s);
    }
    if (lines.size() < 2) {
      fail(o, tag + ": empty trace");
      continue;
    }
    const std::size_t target = 1 + (lines.size() - 1) / 2;
    for (const auto& field : fields) {
      auto edited = lines;
      edited[target] = corrupt(json::parse(lines[target]), field).dump();
      const fs::path bad = rd / ("bad_" + field + ".jsonl");
      {
        std::ofstream out(bad);
        for (const auto& s : edited) out << s << '\n';
      }
      ++corruptions;
      const int code = cli::cmd_certify(bad.string(), cfg_path, (rd / ("bad_" + field + ".json")).string(), log);
      if (code != cli::exit_code::violation) {
        fail(o, tag + ": corrupting '" + field + "' gave certify exit " + std::to_string(code));
      }
    }
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (o.pass) {
    o.detail = std::to_string(runs) + " suite runs certified, " + std::to_string(corruptions) +
               " single-field corruptions rejected";
  }
  return o;
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"FB certificate equality", fb_equality},
      {"Tseng/Korpelevich sigma inequality", lipschitz_inequality},
      {"per-step descent", per_step_descent},
      {"convergence to reference solutions", convergence},
      {"summable-error robustness", summable_errors},
      {"sigma = 0 exactness", exact_prox_sequence},
      {"enlargement falsifier soundness", falsifier_soundness},
      {"calculus identities", calculus_identities},
      {"Fejer-but-not-P2 fixture", boundary_fixture},
      {"CLI round-trip", cli_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (i + 1 == criteria.size()) {
      const double total = seconds_since(t0);
      if (total >= 60.0) fail(out, "whole suite took " + fmt(total) + " s >= 60 s");
      else if (out.pass) out.detail += "; whole suite " + fmt(total) + " s";
    }
    failures += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " -- " << out.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
