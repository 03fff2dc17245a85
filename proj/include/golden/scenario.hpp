#pragma once

// Scenario configs (YAML) and the suite runner behind the command-line tool.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "golden/errors.hpp"
#include "golden/expr.hpp"
#include "golden/extrinsic.hpp"
#include "golden/golden_core.hpp"
#include "golden/slant.hpp"
#include "golden/spaceform.hpp"
#include "golden/submanifold.hpp"

namespace golden {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr std::array<const char*, 5> kSuiteOrder = {"structure", "identities", "extrinsic", "slant",
                                                           "curvature"};

struct ScenarioTolerances {
  Tolerances core;
  double reference = 1e-12;   ///< asserted reference cosines
  double symmetry = 1e-10;    ///< antisymmetry, Bianchi, pair symmetry
  double proposition = 1e-8;  ///< R.S / phi identities
  double probe = 1e-6;        ///< non-vanishing threshold for R.S
};

enum class Backend { Exact, Float };

inline const char* to_string(Backend b) { return b == Backend::Exact ? "exact" : "float"; }

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_angle;
  Backend backend = Backend::Exact;
};

struct SlantReference {
  std::string text;
  double value = 0;
  bool assert_role = true;  ///< false: compare and flag only
  std::string label;
};

struct SpaceFormSpec {
  QuadRat c_p, c_q;
  int trials = 100;
  std::optional<std::uint64_t> seed;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::string> suites;  ///< canonical order
  ScenarioTolerances tol;
  std::optional<GoldenStructure<QuadRat>> exact_structure;
  std::optional<GoldenStructure<double>> structure;
  std::optional<ImmersionSpec> immersion;
  std::optional<SlantReference> reference;
  std::optional<SpaceFormSpec> spaceform;

  bool wants(const std::string& suite) const {
    return std::find(suites.begin(), suites.end(), suite) != suites.end();
  }
};

namespace scenario_detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return ".nan";
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline void check_keys(const YAML::Node& n, const std::string& path, const std::vector<std::string>& allowed) {
  if (!n.IsMap()) throw ConfigError(path.empty() ? "/" : path, "expected a mapping");
  for (auto it = n.begin(); it != n.end(); ++it) {
    const auto key = it->first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(path + "/" + key, "unknown key");
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& path) {
  if (!n) throw ConfigError(path, "missing");
  if (!n.IsScalar()) throw ConfigError(path, "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "cannot read '" + n.Scalar() + "'");
  }
}

inline double positive(const YAML::Node& n, const std::string& path) {
  const double v = scalar<double>(n, path);
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(path, "must be a positive finite number");
  return v;
}

/// Exact constant of Q(sqrt5) in the expression language ("psi", "1-psi", "2/3").
inline QuadRat exact_constant(const YAML::Node& n, const std::string& path) {
  const auto text = scalar<std::string>(n, path);
  std::optional<expr::AffineForm> a;
  try {
    a = expr::exact_affine(expr::parse(text, {}));
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  if (!a) throw ConfigError(path, "'" + text + "' is not an exact constant in Q(sqrt5)");
  return a->constant;
}

inline MatQ exact_matrix(const YAML::Node& n, const std::string& path, Eigen::Index dim) {
  if (!n.IsSequence() || static_cast<Eigen::Index>(n.size()) != dim)
    throw ConfigError(path, "expected " + std::to_string(dim) + " rows");
  MatQ m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto row = n[static_cast<std::size_t>(i)];
    const std::string rp = path + "/" + std::to_string(i);
    if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != dim)
      throw ConfigError(rp, "expected " + std::to_string(dim) + " entries");
    for (Eigen::Index j = 0; j < dim; ++j)
      m(i, j) = exact_constant(row[static_cast<std::size_t>(j)], rp + "/" + std::to_string(j));
  }
  return m;
}

inline void parse_ambient(const YAML::Node& n, Scenario& sc) {
  const std::string path = "/ambient";
  if (!n) throw ConfigError(path, "missing section");
  check_keys(n, path, {"dim", "metric", "phi"});
  const int dim = scalar<int>(n["dim"], path + "/dim");
  if (dim < 1 || dim > 64) throw ConfigError(path + "/dim", "dimension must be in [1, 64]");

  MatQ gram = MatQ::Identity(dim, dim);
  if (n["metric"] && !(n["metric"].IsScalar() && n["metric"].Scalar() == "identity"))
    gram = exact_matrix(n["metric"], path + "/metric", dim);
  std::optional<Metric<QuadRat>> metric;
  try {
    metric.emplace(gram);
  } catch (const Error& e) {
    throw ConfigError(path + "/metric", e.what());
  }

  const auto phi = n["phi"];
  const std::string pp = path + "/phi";
  if (!phi) throw ConfigError(pp, "missing");
  check_keys(phi, pp, {"pattern", "matrix", "from_involution"});
  if (phi.size() != 1) throw ConfigError(pp, "give exactly one of pattern, matrix, from_involution");
  if (phi["pattern"]) {
    const auto pat = phi["pattern"];
    if (!pat.IsSequence() || static_cast<int>(pat.size()) != dim)
      throw ConfigError(pp + "/pattern", "expected " + std::to_string(dim) + " entries");
    MatQ m = MatQ::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const std::string ip = pp + "/pattern/" + std::to_string(i);
      const auto v = scalar<std::string>(pat[static_cast<std::size_t>(i)], ip);
      if (v == "psi")
        m(i, i) = golden_ratio_exact();
      else if (v == "one_minus_psi")
        m(i, i) = QuadRat(1) - golden_ratio_exact();
      else
        throw ConfigError(ip, "expected psi or one_minus_psi, got '" + v + "'");
    }
    sc.exact_structure.emplace(GoldenStructure<QuadRat>::unverified(std::move(m), *metric));
  } else if (phi["matrix"]) {
    sc.exact_structure.emplace(
        GoldenStructure<QuadRat>::unverified(exact_matrix(phi["matrix"], pp + "/matrix", dim), *metric));
  } else {
    const MatQ f = exact_matrix(phi["from_involution"], pp + "/from_involution", dim);
    try {
      sc.exact_structure.emplace(golden_from_product<QuadRat>(f, *metric));
    } catch (const Error& e) {
      throw ConfigError(pp + "/from_involution", e.what());
    }
  }
  sc.structure.emplace(GoldenStructure<double>::unverified(to_double_matrix(sc.exact_structure->phi()),
                                                           Metric<double>(to_double_matrix(gram))));
}

inline SampleSpec parse_samples(const YAML::Node& s, const std::vector<std::string>& params) {
  const std::string sp = "/immersion/samples";
  SampleSpec out;
  if (!s) {
    out.extra_points.push_back(VecD::Zero(static_cast<Eigen::Index>(params.size())));
    return out;
  }
  check_keys(s, sp, {"grid", "extra_points"});
  if (const auto g = s["grid"]) {
    check_keys(g, sp + "/grid", params);
    for (const auto& name : params) {
      const std::string ap = sp + "/grid/" + name;
      const auto ax = g[name];
      if (!ax) throw ConfigError(ap, "missing axis for parameter");
      if (!ax.IsSequence() || ax.size() != 3) throw ConfigError(ap, "expected [lo, hi, count]");
      GridAxis axis{scalar<double>(ax[0], ap + "/0"), scalar<double>(ax[1], ap + "/1"), scalar<int>(ax[2], ap + "/2")};
      if (axis.count < 1 || axis.count > 1000) throw ConfigError(ap + "/2", "count must be in [1, 1000]");
      out.grid.push_back(axis);
    }
  }
  if (const auto e = s["extra_points"]) {
    if (!e.IsSequence()) throw ConfigError(sp + "/extra_points", "expected a list of points");
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string ep = sp + "/extra_points/" + std::to_string(i);
      if (!e[i].IsSequence() || e[i].size() != params.size())
        throw ConfigError(ep, "expected " + std::to_string(params.size()) + " coordinates");
      VecD p(static_cast<Eigen::Index>(params.size()));
      for (std::size_t j = 0; j < params.size(); ++j)
        p(static_cast<Eigen::Index>(j)) = scalar<double>(e[i][j], ep + "/" + std::to_string(j));
      out.extra_points.push_back(std::move(p));
    }
  }
  if (out.grid.empty() && out.extra_points.empty()) throw ConfigError(sp, "no sample points");
  return out;
}

inline void parse_immersion(const YAML::Node& n, Scenario& sc) {
  const std::string path = "/immersion";
  check_keys(n, path, {"params", "components", "samples"});
  const auto ps = n["params"];
  if (!ps || !ps.IsSequence() || ps.size() == 0) throw ConfigError(path + "/params", "expected a non-empty list");
  std::vector<std::string> params;
  for (std::size_t i = 0; i < ps.size(); ++i)
    params.push_back(scalar<std::string>(ps[i], path + "/params/" + std::to_string(i)));
  const auto cs = n["components"];
  const auto dim = static_cast<std::size_t>(sc.structure->dim());
  if (!cs || !cs.IsSequence() || cs.size() != dim)
    throw ConfigError(path + "/components", "expected " + std::to_string(dim) + " components (ambient dim)");
  if (params.size() >= dim) throw ConfigError(path + "/params", "need fewer parameters than ambient dimensions");
  std::vector<expr::Expr> comps;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string cp = path + "/components/" + std::to_string(i);
    try {
      comps.push_back(expr::parse(scalar<std::string>(cs[i], cp), params));
    } catch (const SyntaxError& e) {
      throw ConfigError(cp, std::string(e.what()) + " (offset " + std::to_string(e.offset()) + ")");
    } catch (const UnknownIdentifier& e) {
      throw ConfigError(cp, std::string(e.what()) + " (offset " + std::to_string(e.offset()) + ")");
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(cp, e.what());
    }
  }
  SampleSpec samples = parse_samples(n["samples"], params);
  sc.immersion.emplace(std::move(params), std::move(comps), std::move(samples));
}

inline void parse_slant(const YAML::Node& n, Scenario& sc) {
  const std::string path = "/slant";
  check_keys(n, path, {"reference_cos", "reference_role", "reference_label"});
  if (!n["reference_cos"]) return;
  SlantReference ref;
  ref.text = scalar<std::string>(n["reference_cos"], path + "/reference_cos");
  try {
    ref.value = expr::eval(expr::parse(ref.text, {}), VecD(0));
  } catch (const Error& e) {
    throw ConfigError(path + "/reference_cos", e.what());
  }
  if (n["reference_role"]) {
    const auto role = scalar<std::string>(n["reference_role"], path + "/reference_role");
    if (role != "assert" && role != "compare") throw ConfigError(path + "/reference_role", "expected assert or compare");
    ref.assert_role = role == "assert";
  }
  if (n["reference_label"]) ref.label = scalar<std::string>(n["reference_label"], path + "/reference_label");
  sc.reference = std::move(ref);
}

inline void parse_spaceform(const YAML::Node& n, Scenario& sc) {
  const std::string path = "/spaceform";
  check_keys(n, path, {"c_p", "c_q", "p", "trials", "seed"});
  SpaceFormSpec spec{exact_constant(n["c_p"], path + "/c_p"), exact_constant(n["c_q"], path + "/c_q")};
  if (n["trials"]) {
    spec.trials = scalar<int>(n["trials"], path + "/trials");
    if (spec.trials < 1 || spec.trials > 100000) throw ConfigError(path + "/trials", "must be in [1, 100000]");
  }
  if (n["seed"]) spec.seed = scalar<std::uint64_t>(n["seed"], path + "/seed");
  if (n["p"]) {
    const int p = scalar<int>(n["p"], path + "/p");
    const SpaceFormModel probe(*sc.structure, 0, 0);
    if (p != probe.p())
      throw ConfigError(path + "/p", "ambient phi has a " + std::to_string(probe.p()) + "-dimensional psi-eigenspace, not " +
                                         std::to_string(p));
  }
  sc.spaceform = spec;
}

inline void parse_tolerances(const YAML::Node& n, ScenarioTolerances& t) {
  const std::string path = "/tolerances";
  check_keys(n, path,
             {"structure", "frame", "classification", "angle", "reference", "symmetry", "proposition", "probe"});
  auto set = [&](const char* key, double& slot) {
    if (n[key]) slot = positive(n[key], path + "/" + key);
  };
  set("structure", t.core.structure);
  set("frame", t.core.frame);
  set("classification", t.core.classification);
  set("angle", t.core.angle);
  set("reference", t.reference);
  set("symmetry", t.symmetry);
  set("proposition", t.proposition);
  set("probe", t.probe);
}

}  // namespace scenario_detail

/// Validates a config document. Every failure is a ConfigError carrying a
/// JSON-pointer path to the offending node.
inline Scenario parse_scenario(const YAML::Node& doc, const std::string& fallback_name) {
  using namespace scenario_detail;
  if (!doc || !doc.IsMap()) throw ConfigError("/", "config must be a mapping");
  check_keys(doc, "", {"name", "seed", "suites", "ambient", "immersion", "slant", "spaceform", "tolerances"});
  Scenario sc;
  sc.name = doc["name"] ? scalar<std::string>(doc["name"], "/name") : fallback_name;
  if (doc["seed"]) sc.seed = scalar<std::uint64_t>(doc["seed"], "/seed");

  const auto suites = doc["suites"];
  if (!suites || !suites.IsSequence() || suites.size() == 0) throw ConfigError("/suites", "expected a non-empty list");
  std::vector<std::string> requested;
  for (std::size_t i = 0; i < suites.size(); ++i) {
    const std::string sp = "/suites/" + std::to_string(i);
    const auto s = scalar<std::string>(suites[i], sp);
    if (std::none_of(kSuiteOrder.begin(), kSuiteOrder.end(), [&](const char* k) { return s == k; }))
      throw ConfigError(sp, "unknown suite '" + s + "'");
    requested.push_back(s);
  }
  for (const char* s : kSuiteOrder)
    if (std::find(requested.begin(), requested.end(), s) != requested.end()) sc.suites.emplace_back(s);

  parse_ambient(doc["ambient"], sc);
  if (doc["tolerances"]) parse_tolerances(doc["tolerances"], sc.tol);
  if (doc["immersion"]) parse_immersion(doc["immersion"], sc);
  if (doc["slant"]) parse_slant(doc["slant"], sc);
  if (doc["spaceform"]) parse_spaceform(doc["spaceform"], sc);

  for (const char* s : {"identities", "extrinsic", "slant"})
    if (sc.wants(s) && !sc.immersion) throw ConfigError("/immersion", std::string("suite '") + s + "' needs an immersion");
  if (sc.wants("curvature") && !sc.spaceform) throw ConfigError("/spaceform", "suite 'curvature' needs a spaceform");
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& file) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(file.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("/", "cannot open " + file.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("/", std::string("malformed config: ") + e.what());
  }
  return parse_scenario(doc, file.stem().string());
}

namespace scenario_detail {

inline YAML::Node residual_node(const ResidualMap& r) {
  YAML::Node n(YAML::NodeType::Map);
  for (const auto& [k, v] : r.entries()) n[k] = fmt(v);
  return n;
}

inline YAML::Node exact_matrix_node(const MatQ& m) {
  YAML::Node rows(YAML::NodeType::Sequence);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    YAML::Node row(YAML::NodeType::Sequence);
    row.SetStyle(YAML::EmitterStyle::Flow);
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).to_string());
    rows.push_back(row);
  }
  return rows;
}

inline const char* verdict(bool ok) { return ok ? "holds" : "fails"; }

struct SuiteOutcome {
  bool pass = true;
  YAML::Node node{YAML::NodeType::Map};
};

struct Context {
  const Scenario& sc;
  std::uint64_t seed;
  ScenarioTolerances tol;
  Backend backend;
  std::optional<MatQ> exact_jacobian() const {
    if (backend != Backend::Exact || !sc.immersion) return std::nullopt;
    return sc.immersion->exact_jacobian();
  }
};

inline SuiteOutcome structure_suite(const Context& cx) {
  SuiteOutcome out;
  const auto& s = *cx.sc.structure;
  const auto fr = verify_golden<double>(s.phi(), s.metric(), cx.tol.core.structure);
  YAML::Node fl(YAML::NodeType::Map);
  fl["phi^2-phi-I"] = fmt(fr.axiom_residual);
  fl["G phi-phi^T G"] = fmt(fr.compatibility_residual);
  fl["g(phi.,phi.)-g(phi.,.)-g(.,.)"] = fmt(fr.metric_identity_residual);
  out.node["residuals"] = fl;
  out.pass = fr.pass;
  bool golden = fr.pass;
  if (cx.backend == Backend::Exact) {
    const auto& es = *cx.sc.exact_structure;
    const auto er = verify_golden<QuadRat>(es.phi(), es.metric());
    YAML::Node ex(YAML::NodeType::Map);
    ex["phi^2-phi-I"] = er.axiom_residual.to_string();
    ex["G phi-phi^T G"] = er.compatibility_residual.to_string();
    ex["g(phi.,phi.)-g(phi.,.)-g(.,.)"] = er.metric_identity_residual.to_string();
    out.node["exact_residuals"] = ex;
    out.pass = out.pass && er.pass;
    golden = er.pass;
  }
  if (golden) {
    Eigen::Index p = 0, q = 0;
    if (cx.backend == Backend::Exact) {
      const auto split = golden_eigendecomp(GoldenStructure<QuadRat>::checked(cx.sc.exact_structure->phi(),
                                                                              cx.sc.exact_structure->metric()));
      p = split.psi_space.cols();
      q = split.conjugate_space.cols();
    } else {
      const auto split = golden_eigendecomp(s);
      p = split.psi_space.cols();
      q = split.conjugate_space.cols();
    }
    YAML::Node sig(YAML::NodeType::Map);
    sig["psi"] = static_cast<long>(p);
    sig["one_minus_psi"] = static_cast<long>(q);
    out.node["eigenspace_dims"] = sig;
  }
  return out;
}

inline SuiteOutcome identities_suite(const Context& cx) {
  SuiteOutcome out;
  const auto& imm = *cx.sc.immersion;
  const auto& s = *cx.sc.structure;
  const auto pts = imm.sample_points();
  struct Point {
    ResidualMap res;
    SubmanifoldKind kind;
    bool consistent;
  };
  const auto per = parallel_map(pts.size(), [&](std::size_t i) {
    const auto f = frame_at(imm, pts[i], s.metric());
    const auto ops = induced_operators(f, s);
    Point p{structural_identity_residuals(ops, f, s, cx.tol.core.frame, cx.seed + i).residuals, {}, false};
    p.res.set("frame_gram-I", f.gram_defect());
    p.res.set("reassembly", reassembly_residual(f, ops, s));
    const auto inv = invariance_test(ops, cx.tol.core.classification);
    p.kind = inv.kind;
    p.consistent = inv.criterion_consistent;
    return p;
  });
  ResidualMap res;
  bool consistent = true;
  std::optional<SubmanifoldKind> kind = per.front().kind;
  for (const auto& p : per) {
    res.merge_max(p.res);
    consistent = consistent && p.consistent;
    if (kind && *kind != p.kind) kind.reset();
  }
  out.node["points"] = static_cast<long>(pts.size());
  out.node["residuals"] = residual_node(res);
  out.node["classification"] = kind ? to_string(*kind) : "mixed";
  out.node["invariance_criterion"] = verdict(consistent);
  out.pass = res.all_within(cx.tol.core.frame) && consistent;

  if (const auto jac = cx.exact_jacobian()) {
    const auto ex = exact_tangent_operators(*jac, *cx.sc.exact_structure);
    const Eigen::Index m = ex.P.rows();
    const MatQ block = ex.P * ex.P - ex.P - MatQ::Identity(m, m) + ex.tQ;
    YAML::Node en(YAML::NodeType::Map);
    en["basis"] = "raw tangents";
    en["P"] = exact_matrix_node(ex.P);
    en["tQ"] = exact_matrix_node(ex.tQ);
    en["P^2-P-I+tQ"] = max_abs(block).to_string();
    out.node["exact"] = en;
    out.pass = out.pass && max_abs(block).is_zero();
  }
  return out;
}

inline SuiteOutcome extrinsic_suite(const Context& cx) {
  SuiteOutcome out;
  const auto& imm = *cx.sc.immersion;
  const auto& s = *cx.sc.structure;
  const auto pts = imm.sample_points();
  struct Point {
    GaussSplitReport gauss;
    std::optional<InvariantConnectionReport> inv;
    std::optional<AntiInvariantShapeReport> anti;
  };
  const auto per = parallel_map(pts.size(), [&](std::size_t i) {
    Point p{gauss_split_residual(imm, pts[i], s), std::nullopt, std::nullopt};
    const auto ops = induced_operators(frame_at(imm, pts[i], s.metric()), s);
    const auto kind = invariance_test(ops, cx.tol.core.classification).kind;
    if (kind == SubmanifoldKind::Invariant)
      p.inv = invariant_connection_check(imm, pts[i], s, cx.tol.core.classification);
    else if (kind == SubmanifoldKind::AntiInvariant)
      p.anti = anti_invariant_shape_vanishing(imm, pts[i], s, cx.tol.core.classification);
    return p;
  });
  ResidualMap gauss, inv;
  double anti_max = 0;
  long inv_points = 0, anti_points = 0;
  for (const auto& p : per) {
    gauss.raise("tan(phi D2x)-P tan(D2x)-t h", p.gauss.tangential);
    gauss.raise("nor(phi D2x)-Q tan(D2x)-s h", p.gauss.normal);
    if (p.inv) {
      ++inv_points;
      inv.raise("tan(phi D2x)-P tan(D2x)", p.inv->parallel_p);
      inv.raise("h(X,PY)-s h(X,Y)", p.inv->h_commutes);
    }
    if (p.anti) {
      ++anti_points;
      anti_max = std::max(anti_max, p.anti->max_norm);
    }
  }
  out.node["points"] = static_cast<long>(pts.size());
  YAML::Node gn(YAML::NodeType::Map);
  gn["residuals"] = residual_node(gauss);
  gn["structure_independent"] = true;
  out.node["gauss_split"] = gn;
  out.pass = gauss.all_within(cx.tol.core.frame);
  if (inv_points > 0) {
    YAML::Node in(YAML::NodeType::Map);
    in["points"] = inv_points;
    in["residuals"] = residual_node(inv);
    out.node["invariant_connection"] = in;
    out.pass = out.pass && inv.all_within(cx.tol.core.frame);
  }
  if (anti_points > 0) {
    // Reported as a finding on the vanishing claim; it does not gate the suite.
    YAML::Node an(YAML::NodeType::Map);
    an["points"] = anti_points;
    an["max |A_{phiY}|"] = fmt(anti_max);
    an["finding"] = anti_max <= cx.tol.core.frame ? "A_{phiY}X vanishes" : "A_{phiY}X does not vanish";
    out.node["anti_invariant_shape"] = an;
  }
  return out;
}

inline SuiteOutcome slant_suite(const Context& cx) {
  SuiteOutcome out;
  const auto& imm = *cx.sc.immersion;
  ClassifyOptions opt;
  opt.tol_angle = cx.tol.core.angle;
  opt.tol_class = cx.tol.core.classification;
  opt.seed = cx.seed;
  const auto r = classify(imm, *cx.sc.structure, imm.sample_points(), opt);
  out.node["classification"] = to_string(r.classification);
  out.node["theta"] = fmt(r.theta);
  out.node["cos_theta"] = fmt(r.cos_theta);
  out.node["lambda"] = fmt(r.lambda);
  out.node["k"] = fmt(r.k);
  out.node["angle_spread"] = fmt(r.angle_spread);
  out.node["directions"] = static_cast<long>(r.directions);
  if (!r.residuals.empty()) out.node["residuals"] = residual_node(r.residuals);
  out.pass = r.residuals.all_within(cx.tol.core.frame);

  YAML::Node flags(YAML::NodeType::Sequence);
  if (const auto jac = cx.exact_jacobian()) {
    const auto ex = exact_slant(*jac, *cx.sc.exact_structure);
    YAML::Node en(YAML::NodeType::Map);
    en["slant"] = ex.slant;
    if (ex.slant) {
      en["lambda"] = ex.lambda.to_string();
      en["k"] = ex.k.to_string();
      en["cos_theta"] = fmt(ex.cos_theta());
      en["P"] = exact_matrix_node(ex.ops.P);
      en["tQ"] = exact_matrix_node(ex.ops.tQ);
      YAML::Node id(YAML::NodeType::Map);
      id[slant_names::kCharacterization] = verdict(ex.characterization);
      if (!ex.lambda.is_zero()) id[slant_names::kCorollary] = verdict(ex.corollary);
      id[slant_names::kLemmaCos] = verdict(ex.lemma_cos);
      id[slant_names::kLemmaSin] = verdict(ex.lemma_sin);
      id[slant_names::kTqTheorem] = verdict(ex.tq_theorem);
      id[slant_names::kTqDirect] = verdict(ex.tq_direct);
      en["identities"] = id;
      const bool ok = ex.all_identities() && (ex.lambda.is_zero() || ex.corollary);
      const double gap = std::abs(ex.cos_theta() - r.cos_theta);
      en["cos_theta_float-exact"] = fmt(gap);
      out.pass = out.pass && ok && is_slant(r.classification) && gap <= cx.tol.reference;
    } else {
      out.pass = out.pass && !is_slant(r.classification);
    }
    out.node["exact"] = en;
  }

  if (const auto& ref = cx.sc.reference) {
    YAML::Node rn(YAML::NodeType::Map);
    if (!ref->label.empty()) rn["label"] = ref->label;
    rn["expression"] = ref->text;
    rn["value"] = fmt(ref->value);
    rn["role"] = ref->assert_role ? "assert" : "compare";
    const double diff = std::abs(r.cos_theta - ref->value);
    rn["|cos_theta-reference|"] = fmt(diff);
    bool flagged = false;
    if (std::abs(ref->value) > 1) {
      flags.push_back("reference_out_of_range: reference value " + fmt(ref->value) +
                      " has magnitude > 1 and cannot be a cosine; definitional cos_theta = " + fmt(r.cos_theta));
      flagged = true;
    }
    if (diff > cx.tol.reference) {
      flags.push_back("reference_mismatch: reference " + fmt(ref->value) + " differs from definitional cos_theta " +
                      fmt(r.cos_theta));
      flagged = true;
    }
    out.node["reference"] = rn;
    if (ref->assert_role && flagged) out.pass = false;
  }
  if (flags.size() > 0) out.node["flags"] = flags;
  return out;
}

inline SuiteOutcome curvature_suite(const Context& cx) {
  SuiteOutcome out;
  const auto& spec = *cx.sc.spaceform;
  const SpaceFormModel m(*cx.sc.structure, spec.c_p.to_double(), spec.c_q.to_double());
  const std::uint64_t seed = spec.seed.value_or(cx.seed);
  const int trials = spec.trials;

  YAML::Node model(YAML::NodeType::Map);
  model["n"] = static_cast<long>(m.n());
  model["p"] = m.p();
  model["c_p"] = spec.c_p.to_string();
  model["c_q"] = spec.c_q.to_string();
  model["trials"] = trials;
  model["seed"] = seed;
  out.node["model"] = model;

  auto group = [&](const char* name, const ResidualMap& r, double tol) {
    YAML::Node g(YAML::NodeType::Map);
    const bool ok = r.all_within(tol);
    g["pass"] = ok;
    g["tolerance"] = fmt(tol);
    g["residuals"] = residual_node(r);
    out.node[name] = g;
    out.pass = out.pass && ok;
  };
  group("commutation", curvature_commutation_checks(m, trials, seed), cx.tol.core.frame);
  group("symmetries", curvature_symmetry_checks(m, trials, seed), cx.tol.symmetry);
  group("ricci", ricci_agreement(m, trials, seed), cx.tol.core.frame);
  group("ricci_phi", ricci_phi_checks(m, trials, seed), cx.tol.core.frame);

  const auto rds = r_dot_s_checks(m, trials, seed);
  ResidualMap rds_checked;
  for (const auto& [k, v] : rds.residuals.entries())
    if (k.rfind(curvature_names::kRdsProbe, 0) != 0) rds_checked.set(k, v);
  group("r_dot_s", rds_checked, cx.tol.core.frame);
  group("rs_phi", rs_phi_propositions(m, trials, seed), cx.tol.proposition);

  const bool flat = spec.c_p.is_zero() && spec.c_q.is_zero();
  YAML::Node probe(YAML::NodeType::Map);
  probe["max |(R.S)(Z,W)|"] = fmt(rds.probe_max);
  probe["threshold"] = fmt(cx.tol.probe);
  probe["verdict"] = rds.not_semi_symmetric(cx.tol.probe) ? "not_semi_symmetric" : "semi_symmetric";
  out.node["semi_symmetry_probe"] = probe;
  if (!flat) out.pass = out.pass && rds.not_semi_symmetric(cx.tol.probe);

  if (m.n() > 1 && m.p() > 0 && m.p() < m.n()) {
    const auto fit = fit_ricci_coefficients(m, trials, seed);
    YAML::Node fn(YAML::NodeType::Map);
    fn["alpha-alpha_closed"] = fmt(std::abs(fit.alpha - m.ricci_alpha()));
    fn["beta-beta_closed"] = fmt(std::abs(fit.beta - m.ricci_beta()));
    fn["fit_residual"] = fmt(fit.residual);
    out.node["ricci_fit"] = fn;
    out.pass = out.pass && std::abs(fit.alpha - m.ricci_alpha()) <= cx.tol.core.frame &&
               std::abs(fit.beta - m.ricci_beta()) <= cx.tol.core.frame && fit.residual <= cx.tol.core.frame;
  }

  const auto cert = nabla_identities_certificate(m);
  const auto exact = curvature_coefficients<QuadRat>(spec.c_p, spec.c_q);
  YAML::Node cn(YAML::NodeType::Map);
  cn["A"] = exact.A.to_string();
  cn["B"] = exact.B.to_string();
  cn["A_value"] = fmt(cert.A);
  cn["B_value"] = fmt(cert.B);
  cn["ricci_alpha"] = fmt(cert.alpha);
  cn["ricci_beta"] = fmt(cert.beta);
  cn["statement"] = cert.statement;
  out.node["nabla_certificate"] = cn;
  return out;
}

}  // namespace scenario_detail

struct RunResult {
  YAML::Node report;
  bool pass = false;
  int exit_code() const { return pass ? 0 : 1; }
};

inline YAML::Node tolerance_node(const ScenarioTolerances& t) {
  using scenario_detail::fmt;
  YAML::Node n(YAML::NodeType::Map);
  n["structure"] = fmt(t.core.structure);
  n["frame"] = fmt(t.core.frame);
  n["classification"] = fmt(t.core.classification);
  n["angle"] = fmt(t.core.angle);
  n["reference"] = fmt(t.reference);
  n["symmetry"] = fmt(t.symmetry);
  n["proposition"] = fmt(t.proposition);
  n["probe"] = fmt(t.probe);
  return n;
}

/// Runs the requested suites in canonical order. Library errors raised inside a
/// suite fail that suite and are recorded with its name.
inline RunResult run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
  using namespace scenario_detail;
  Context cx{sc, opt.seed.value_or(sc.seed), sc.tol, opt.backend};
  if (opt.tol_angle) cx.tol.core.angle = *opt.tol_angle;

  RunResult rr;
  YAML::Node meta(YAML::NodeType::Map);
  meta["tool"] = "golden";
  meta["version"] = kVersion;
  meta["scenario"] = sc.name;
  meta["seed"] = cx.seed;
  meta["backend"] = to_string(opt.backend);
  meta["tolerances"] = tolerance_node(cx.tol);
  rr.report["meta"] = meta;

  YAML::Node suites(YAML::NodeType::Map);
  bool pass = true;
  for (const auto& name : sc.suites) {
    SuiteOutcome o;
    try {
      if (name == "structure")
        o = structure_suite(cx);
      else if (name == "identities")
        o = identities_suite(cx);
      else if (name == "extrinsic")
        o = extrinsic_suite(cx);
      else if (name == "slant")
        o = slant_suite(cx);
      else
        o = curvature_suite(cx);
    } catch (const Error& e) {
      o.pass = false;
      o.node = YAML::Node(YAML::NodeType::Map);
      o.node["error"] = std::string(e.what());
    }
    YAML::Node entry(YAML::NodeType::Map);
    entry["pass"] = o.pass;
    for (auto it = o.node.begin(); it != o.node.end(); ++it) entry[it->first.as<std::string>()] = it->second;
    suites[name] = entry;
    pass = pass && o.pass;
  }
  rr.report["suites"] = suites;
  rr.report["pass"] = pass;
  rr.pass = pass;
  return rr;
}

inline std::string emit_report(const YAML::Node& report) {
  YAML::Emitter e;
  e << report;
  return std::string(e.c_str()) + "\n";
}

/// Identity set checked by each suite, for `explain`.
inline std::vector<std::string> suite_description(const std::string& suite) {
  if (suite == "structure")
    return {"phi^2 - phi - I = 0                      golden axiom",
            "G phi - phi^T G = 0                      phi is g-self-adjoint",
            "g(phi X, phi Y) = g(phi X, Y) + g(X, Y)  metric identity",
            "eigenspace dimensions for psi and 1 - psi"};
  if (suite == "identities")
    return {"phi X = PX + QX, phi V = tV + sV          reassembly in ambient coordinates",
            "P^2 - P - I + tQ = 0",
            "Q - QP - sQ = 0",
            "s^2 - s - I + Qt = 0",
            "t - Pt - ts = 0",
            "g(PX, Y) = g(X, PY)",
            "g(PX, PY) + g(QX, QY) = g(X, Y) + g(PX, Y)",
            "Q = 0 exactly when (P, g) is golden     invariance criterion"};
  if (suite == "extrinsic")
    return {"tan(phi D2x) = P tan(D2x) + t h          Gauss split, tangential (structure-independent)",
            "nor(phi D2x) = Q tan(D2x) + s h          Gauss split, normal (structure-independent)",
            "invariant: P parallel, h(X, PY) = s h(X, Y)",
            "anti-invariant: size of A_{phiY} from g(A_V X, Z) = g(h(X, Z), V), reported as a finding"};
  if (suite == "slant")
    return {"theta(X) = angle between phi X and TM, constant over points and directions",
            "P^2 = lambda (P + I), lambda = cos^2 theta",
            "g(phi^2 X, X) = g(P^2 X, X) / lambda",
            "g(PX, PY) = cos^2 theta (g(X, Y) + g(X, PY))",
            "g(QX, QY) = sin^2 theta (g(X, Y) + g(PX, Y))",
            "tQ = sin^2 theta (P + I) and tQ = -P^2 + P + I",
            "eigenvalues of P solve mu^2 = lambda mu + lambda"};
  if (suite == "curvature")
    return {"R(X,Y)Z = A{g(Y,Z)X - g(X,Z)Y + g(phiY,Z)phiX - g(phiX,Z)phiY}",
            "        + B{g(phiY,Z)X - g(phiX,Z)Y + g(Y,Z)phiX - g(X,Z)phiY}",
            "commutation: R(X,Y)phi = phi R(X,Y); R(phiX,Y) = R(X,phiY); R(phiX,phiY) = R(phiX,Y) + R(X,Y);",
            "             g(R(X,Y)phiZ, phiW) = g(R(X,Y)Z, phiW) + g(R(X,Y)Z, W); g(R(X,Y)phiZ, W) = g(R(X,Y)Z, phiW)",
            "symmetries: antisymmetry, skew pair, first Bianchi, pair symmetry",
            "Ricci: frame sum equals alpha g + beta g(phi., .)",
            "Ricci/phi: S(phi^2X,Y) = S(phiX,Y) + S(X,Y) and its variants, S(phiX,Y) = S(phiY,X)",
            "R.S: definition against -2 beta g(R(X,Y)W, phiZ); (R(phiX,Y).S)(phiZ,W) = 0",
            "R.S/phi: both derivation identities",
            "probe: max |R.S| above threshold (not semi-symmetric)",
            "certificate: constant coefficients give nabla R = 0 and nabla S = 0"};
  return {};
}

inline std::vector<std::string> bundled_configs(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".cfg") names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace golden
