// Acceptance run: one PASS/FAIL line per criterion, sub-lines for the details.
// Usage: acceptance [--criterion N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "golden/extrinsic.hpp"
#include "golden/scenario.hpp"
#include "golden/slant.hpp"
#include "golden/spaceform.hpp"
#include "golden/submanifold.hpp"
#include "golden_cli.hpp"

using namespace golden;

namespace {

using scenario_detail::fmt;

struct Check {
  std::vector<std::string> lines;
  bool pass = true;

  void item(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { lines.push_back("note " + what); }
};

VecD pt(std::initializer_list<double> v) {
  VecD p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

std::vector<VecD> grid2() { return SampleSpec{{{-1, 1, 3}, {-1, 1, 3}}, {}}.points(2); }

const double kPsi = golden_ratio<double>();

Scenario bundled(const std::string& name) { return load_scenario(cli::bundled_dir() / (name + ".cfg")); }

// 1: exact axioms for the two diagonal structures.
Check criterion1() {
  Check c;
  for (const auto& pattern : {std::vector<bool>{true, true, false, false}, std::vector<bool>{true, false, true, false}}) {
    const auto s = diagonal_golden<QuadRat>(pattern);
    const auto r = verify_golden<QuadRat>(s.phi(), s.metric());
    std::string label = "diag(";
    for (bool b : pattern) label += b ? "psi," : "1-psi,";
    label.back() = ')';
    c.item(r.axiom_residual.is_zero() && r.compatibility_residual.is_zero() && r.metric_identity_residual.is_zero(),
           label + ": |phi^2-phi-I| = " + r.axiom_residual.to_string() +
               ", |G phi-phi^T G| = " + r.compatibility_residual.to_string());
  }
  return c;
}

// 2: invariant plane (u1 cos t, u1 sin t, u2, 0).
Check criterion2() {
  Check c;
  const auto s = diagonal_golden<double>({true, true, false, false});
  const auto imm = ImmersionSpec::make({"u1", "u2"}, {"u1*cos(0.5)", "u1*sin(0.5)", "u2", "0"});
  const auto r = classify(imm, s, grid2());
  c.item(r.classification == SlantClass::Invariant, "classification = " + std::string(to_string(r.classification)));
  c.item(r.theta_max <= 1e-9, "max theta = " + fmt(r.theta_max) + " (<= 1e-9)");
  double eig_err = 0, tq = 0;
  for (const auto& u : grid2()) {
    const auto ops = induced_operators(frame_at(imm, u, s.metric()), s);
    Eigen::SelfAdjointEigenSolver<MatD> es(0.5 * (ops.P + ops.P.transpose()));
    const VecD ev = es.eigenvalues();
    eig_err = std::max({eig_err, std::abs(ev(0) - (1 - kPsi)), std::abs(ev(1) - kPsi)});
    tq = std::max(tq, max_abs(MatD(ops.t * ops.Q)));
  }
  c.item(eig_err <= 1e-12, "P eigenvalues {psi, 1-psi}: max error " + fmt(eig_err) + " (<= 1e-12)");
  c.item(tq == 0, "|tQ| = " + fmt(tq));
  return c;
}

// 3: slant plane (psi u1, (1-psi) u1, psi u2, (1-psi) u2) in diag(psi, 1-psi, psi, 1-psi).
Check criterion3() {
  Check c;
  const auto imm = ImmersionSpec::make({"u1", "u2"}, {"psi*u1", "(1-psi)*u1", "psi*u2", "(1-psi)*u2"});
  const auto ex = exact_slant(*imm.exact_jacobian(), diagonal_golden<QuadRat>({true, false, true, false}));
  const MatQ id = MatQ::Identity(2, 2);
  c.item(ex.ops.P == (QuadRat(Rational(4, 3)) * id).eval(), "P = (4/3) I exactly in the raw basis");
  c.item(ex.ops.tQ == (QuadRat(Rational(5, 9)) * id).eval(), "tQ = (5/9) I exactly");
  c.item(ex.slant && ex.lambda == QuadRat(Rational(16, 21)), "lambda = " + ex.lambda.to_string() + " (16/21)");
  c.item(ex.characterization, "P^2 - lambda (P + I) = 0 exactly");
  c.item(ex.lemma_cos && ex.lemma_sin, "cos^2 and sin^2 lemma residuals = 0 exactly");
  const auto r = classify(imm, diagonal_golden<double>({true, false, true, false}), grid2());
  const double err = std::abs(r.cos_theta - 4 / std::sqrt(21.0));
  c.item(err <= 1e-12, "float cos theta = " + fmt(r.cos_theta) + ", |cos theta - 4/sqrt21| = " + fmt(err));
  return c;
}

// 4: scaled plane (k psi u1, k psi u2, (1-psi) u1, (1-psi) u2) in diag(1-psi, 1-psi, psi, psi).
Check criterion4() {
  Check c;
  const auto s_exact = diagonal_golden<QuadRat>({false, false, true, true});
  const auto s = diagonal_golden<double>({false, false, true, true});
  const QuadRat psi = golden_ratio_exact();

  // Exact definitional oracle on e1 = (psi, 0, 1-psi, 0), the first raw tangent at k = 1.
  VecQ e1(4);
  e1 << psi, QuadRat(0), QuadRat(1) - psi, QuadRat(0);
  const VecQ pe1 = s_exact.phi() * e1;
  const QuadRat inner = pe1.dot(e1);
  const QuadRat cos2 = inner * inner / (e1.dot(e1) * pe1.dot(pe1));
  c.item(cos2 == QuadRat(Rational(1, 6)), "exact oracle: cos^2 theta = g(phi e1,e1)^2/(|e1|^2 |phi e1|^2) = " +
                                              cos2.to_string());

  const auto imm = ImmersionSpec::make({"u1", "u2"}, {"psi*u1", "psi*u2", "(1-psi)*u1", "(1-psi)*u2"});
  const auto r = classify(imm, s, grid2());
  const double err = std::abs(r.cos_theta - std::sqrt(cos2.to_double()));
  c.item(err <= 1e-12, "k = 1: cos theta = " + fmt(r.cos_theta) + ", |cos theta - 1/sqrt6| = " + fmt(err));
  const auto ex = exact_slant(*imm.exact_jacobian(), s_exact);
  c.item(ex.slant && ex.lambda == cos2, "k = 1: exact lambda = " + ex.lambda.to_string());

  for (int k : {2, 3}) {
    const std::string ks = std::to_string(k);
    const auto immk =
        ImmersionSpec::make({"u1", "u2"}, {ks + "*psi*u1", ks + "*psi*u2", "(1-psi)*u1", "(1-psi)*u2"});
    const double def = classify(immk, s, grid2()).cos_theta;
    const double printed = (-1 + kPsi - k * k * kPsi) / std::sqrt(k * k + 1.0);
    c.item(std::abs(printed) > 1 && def >= 0 && def <= 1,
           "k = " + ks + ": printed value " + fmt(printed) + " has magnitude > 1, definitional cos theta = " + fmt(def));
  }

  const auto rr = run_scenario(bundled("paper_example_4_k2_paperformula"));
  const auto flags = rr.report["suites"]["slant"]["flags"];
  bool flagged = false;
  if (flags)
    for (const auto& f : flags) flagged = flagged || f.as<std::string>().rfind("reference_out_of_range", 0) == 0;
  c.item(flagged, "report for paper_example_4_k2_paperformula carries reference_out_of_range");
  return c;
}

// 5: structural identities over 100 random (structure, affine immersion) pairs.
Check criterion5() {
  Check c;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  ResidualMap worst;
  int pairs = 0;
  while (pairs < 100) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(4, n - 1)));
    const auto s = random_golden(n, static_cast<int>(rng() % static_cast<unsigned>(n + 1)), rng());
    MatD jac(n, m);
    for (Eigen::Index i = 0; i < jac.size(); ++i) jac.data()[i] = nd(rng);
    try {
      const auto f = frame_from_jacobian(VecD::Zero(n), jac, s.metric());
      const auto ops = induced_operators(f, s);
      worst.merge_max(structural_identity_residuals(ops, f, s, 1e-9, rng()).residuals);
      ++pairs;
    } catch (const RankDeficient&) {
    }
  }
  for (const auto& [name, v] : worst.entries()) c.item(v <= 1e-9, name + ": max " + fmt(v) + " over 100 pairs");
  return c;
}

std::string poly_coef(double v) { return "(" + fmt(v) + ")"; }

// Random immersion of degree <= 2.
ImmersionSpec random_quadratic(int n, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::string> params;
  for (int i = 0; i < m; ++i) params.push_back("u" + std::to_string(i + 1));
  std::vector<std::string> comps;
  for (int k = 0; k < n; ++k) {
    std::string s = poly_coef(u(rng));
    for (int i = 0; i < m; ++i) {
      s += "+" + poly_coef(u(rng)) + "*" + params[static_cast<std::size_t>(i)];
      for (int j = i; j < m; ++j)
        s += "+" + poly_coef(u(rng)) + "*" + params[static_cast<std::size_t>(i)] + "*" +
             params[static_cast<std::size_t>(j)];
    }
    comps.push_back(s);
  }
  return ImmersionSpec::make(params, comps);
}

// Circle of radius r1 in the psi-eigenspace times a circle of radius r2 in the
// (1-psi)-eigenspace: invariant at every point and not totally geodesic.
ImmersionSpec product_of_circles(const EigenSplit<double>& split, double r1, double r2) {
  const auto n = split.psi_space.rows();
  std::vector<std::string> comps;
  for (Eigen::Index k = 0; k < n; ++k) {
    comps.push_back(poly_coef(r1 * split.psi_space(k, 0)) + "*cos(u1)+" + poly_coef(r1 * split.psi_space(k, 1)) +
                    "*sin(u1)+" + poly_coef(r2 * split.conjugate_space(k, 0)) + "*cos(u2)+" +
                    poly_coef(r2 * split.conjugate_space(k, 1)) + "*sin(u2)");
  }
  return ImmersionSpec::make({"u1", "u2"}, comps);
}

// 6: extrinsic identities and the anti-invariant shape probe.
Check criterion6() {
  Check c;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  double tan_max = 0, nor_max = 0;
  int immersions = 0;
  while (immersions < 100) {
    const int n = 3 + static_cast<int>(rng() % 4);
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(3, n - 1)));
    const auto s = random_golden(n, static_cast<int>(rng() % static_cast<unsigned>(n + 1)), rng());
    const auto imm = random_quadratic(n, m, rng);
    VecD u(m);
    for (Eigen::Index i = 0; i < m; ++i) u(i) = 0.3 * nd(rng);
    try {
      const auto g = gauss_split_residual(imm, u, s);
      tan_max = std::max(tan_max, g.tangential);
      nor_max = std::max(nor_max, g.normal);
      ++immersions;
    } catch (const RankDeficient&) {
    }
  }
  c.item(tan_max <= 1e-9, "Gauss split, tangential: max " + fmt(tan_max) + " over 100 quadratic immersions");
  c.item(nor_max <= 1e-9, "Gauss split, normal: max " + fmt(nor_max) + " over 100 quadratic immersions");

  double parallel = 0, commute = 0, curvature = 0;
  int cases = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 5);
    const int p = 2 + static_cast<int>(rng() % static_cast<unsigned>(n - 3));
    const auto s = random_golden(n, p, rng());
    const auto imm = product_of_circles(golden_eigendecomp(s), 0.5 + std::abs(nd(rng)), 0.5 + std::abs(nd(rng)));
    for (int k = 0; k < 3; ++k) {
      const VecD u = pt({nd(rng), nd(rng)});
      const auto rep = invariant_connection_check(imm, u, s);
      parallel = std::max(parallel, rep.parallel_p);
      commute = std::max(commute, rep.h_commutes);
      curvature = std::max(curvature, second_fundamental_form(imm, u, s.metric()).h_raw(0, 0).norm());
      ++cases;
    }
  }
  const auto plane = ImmersionSpec::make({"u1", "u2"}, {"u1*cos(0.5)", "u1*sin(0.5)", "u2", "0"});
  const auto split4 = diagonal_golden<double>({true, true, false, false});
  for (const auto& u : grid2()) {
    const auto rep = invariant_connection_check(plane, u, split4);
    parallel = std::max(parallel, rep.parallel_p);
    commute = std::max(commute, rep.h_commutes);
    ++cases;
  }
  c.item(commute <= 1e-9, "invariant h(X,PY) = s h(X,Y): max " + fmt(commute) + " over " + std::to_string(cases) +
                              " points (|h| up to " + fmt(curvature) + ")");
  c.item(parallel <= 1e-9, "invariant tangential part of phi D2x = P tan(D2x): max " + fmt(parallel));

  const auto alt = diagonal_golden<double>({true, false, true, false});
  const auto helix = ImmersionSpec::make({"u"}, {"sin(u)", "psi*u", "-cos(u)", "0"});
  double helix_max = 0;
  for (double u : {0.0, 0.4, 1.9}) helix_max = std::max(helix_max, anti_invariant_shape_vanishing(helix, pt({u}), alt).max_norm);
  const auto bent =
      ImmersionSpec::make({"u1", "u2"}, {"u1+0.1*psi*u1^2", "psi*u1-0.1*u1^2", "u2", "psi*u2"});
  const auto bent_rep = anti_invariant_shape_vanishing(bent, pt({0, 0}), alt);
  c.note("anti-invariant shape probe, helix-like curve: max |A_{phiY}X| = " + fmt(helix_max) +
         (helix_max <= 1e-9 ? " (vanishes)" : " (does not vanish)"));
  c.note("anti-invariant shape probe, bent plane at origin: max |A_{phiY}X| = " + fmt(bent_rep.max_norm) +
         ", |t h| = " + fmt(bent_rep.th_norm) + (bent_rep.vanishes(1e-9) ? " (vanishes)" : " (does not vanish)"));
  c.item(true, "anti-invariant shape probe reported as a finding");
  return c;
}

// 7: space-form curvature over n in {2,4,6,8} and four (c_p, c_q) pairs.
Check criterion7() {
  Check c;
  const std::vector<std::pair<double, double>> cs{{0, 0}, {1, 1}, {1, -1}, {2, 3}};
  struct Worst {
    double v = 0;
    std::string where;
  };
  std::map<std::string, Worst> worst;
  std::vector<std::string> order;
  auto take = [&](const std::string& group, const ResidualMap& r, const std::string& where) {
    for (const auto& [k, v] : r.entries()) {
      const std::string key = group + k;
      if (!worst.count(key)) order.push_back(key);
      auto& w = worst[key];
      if (v > w.v || w.where.empty()) w = {v, where};
    }
  };
  std::vector<std::pair<bool, std::string>> probes;
  for (int n : {2, 4, 6, 8}) {
    for (const auto& [cp, cq] : cs) {
      const auto m = SpaceFormModel::make(n, n / 2, cp, cq);
      const std::string where = "n=" + std::to_string(n) + " c=(" + fmt(cp) + "," + fmt(cq) + ")";
      take("", ricci_agreement(m), where);
      take("", curvature_commutation_checks(m), where);
      take("", ricci_phi_checks(m), where);
      take("", curvature_symmetry_checks(m), where);
      const auto rds = r_dot_s_checks(m);
      ResidualMap corollary;
      for (const auto& [k, v] : rds.residuals.entries())
        if (k.rfind(curvature_names::kRdsCorollary, 0) == 0) corollary.set(k, v);
      take("", corollary, where);
      if (cp == 1 && cq == -1) {
        probes.emplace_back(rds.probe_max > 1e-6,
                            "non-semi-symmetry probe " + where + ": max |R.S| = " + fmt(rds.probe_max) + " (> 1e-6)");
      }
    }
  }
  auto tol_for = [](const std::string& key) {
    return key == curvature_names::kBianchi || key == curvature_names::kPairSymmetry ? 1e-10 : 1e-9;
  };
  for (const auto& key : order) {
    if (key == curvature_names::kAntisymmetry || key == curvature_names::kSkew) continue;
    const auto& w = worst[key];
    const double tol = tol_for(key);
    c.item(w.v <= tol, key + ": max " + fmt(w.v) + " (<= " + fmt(tol) + ", worst at " + w.where + ")");
  }
  for (const auto& [ok, line] : probes) c.item(ok, line);
  return c;
}

// 8: byte-identical reports for every bundled config.
Check criterion8() {
  Check c;
  const auto dir = std::filesystem::temp_directory_path() / "golden_acceptance";
  std::filesystem::create_directories(dir);
  for (const auto& name : bundled_configs(cli::bundled_dir())) {
    std::string bytes[2];
    for (int i = 0; i < 2; ++i) {
      const auto path = dir / (name + "_" + std::to_string(i) + ".yaml");
      std::ostringstream out, err;
      cli::run({"run", name, "--report", path.string()}, out, err);
      std::ifstream f(path, std::ios::binary);
      bytes[i] = std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    c.item(!bytes[0].empty() && bytes[0] == bytes[1], name + ": " + std::to_string(bytes[0].size()) + " bytes, identical");
  }
  return c;
}

struct Criterion {
  int id;
  const char* title;
  double limit_s;  ///< 0: no runtime bound
  std::function<Check()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "structure axioms exact in Q(sqrt5)", 1, criterion1},
      {2, "invariant plane reproduction", 1, criterion2},
      {3, "slant plane reproduction (cos theta = 4/sqrt21)", 0, criterion3},
      {4, "scaled slant plane at k = 1 and printed-formula flag", 0, criterion4},
      {5, "structural identities over random pairs", 10, criterion5},
      {6, "extrinsic suite", 0, criterion6},
      {7, "space-form curvature program", 30, criterion7},
      {8, "report determinism", 0, criterion8},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc)
      only = std::atoi(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& cr : all) {
    if (only != 0 && cr.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.item(false, std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0) c.item(secs < cr.limit_s, "runtime " + fmt(std::round(secs * 1000) / 1000) + " s (< " + fmt(cr.limit_s) + " s)");
    std::printf("[%s] criterion %d: %s (%.3f s)\n", c.pass ? "PASS" : "FAIL", cr.id, cr.title, secs);
    for (const auto& l : c.lines) std::printf("       %s\n", l.c_str());
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 1;
}
