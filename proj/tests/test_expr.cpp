#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "golden/expr.hpp"

using namespace golden;
using namespace golden::expr;

namespace {

const std::vector<std::string> kUV = {"u1", "u2"};

// Central finite differences, used only as an independent check of the jets.
// Second differences at h = 1e-5 are dominated by roundoff (eps*|f|/h^2 ~ 2e-6),
// so the Hessian uses its own, larger step.
struct FiniteDifference {
  VecD grad;
  MatD hess;
};

FiniteDifference central_differences(const Expr& e, const VecD& x, double h, double h2 = 1e-4) {
  const Eigen::Index m = x.size();
  FiniteDifference fd{VecD(m), MatD(m, m)};
  auto f = [&](const VecD& p) { return eval(e, p); };
  for (Eigen::Index i = 0; i < m; ++i) {
    VecD xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    fd.grad(i) = (f(xp) - f(xm)) / (2 * h);
    for (Eigen::Index j = 0; j < m; ++j) {
      VecD pp = x, pm = x, mp = x, mm = x;
      pp(i) += h2, pp(j) += h2;
      pm(i) += h2, pm(j) -= h2;
      mp(i) -= h2, mp(j) += h2;
      mm(i) -= h2, mm(j) -= h2;
      fd.hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h2 * h2);
    }
  }
  return fd;
}

// Random polynomial / trigonometric expression text over u1, u2.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  auto lit = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(coef(rng)) + 0.1);
    return std::string(buf);
  };
  switch (pick(rng)) {
    case 0: return "u1";
    case 1: return "u2";
    case 2: return lit();
    case 3: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
    case 4: return "(" + random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1) + ")";
    case 5: return "(" + random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1) + ")";
    case 6: return "sin(" + random_expr(rng, depth - 1) + ")";
    case 7: return "cos(" + random_expr(rng, depth - 1) + ")";
    case 8: return "(" + random_expr(rng, depth - 1) + ")^2";
    default: return "psi*" + random_expr(rng, depth - 1);
  }
}

}  // namespace

TEST(Parse, ProductWithFunctionCall) {
  const Expr e = parse("u1*cos(0.5)", kUV);
  const auto& mul = std::get<Binary>(e.root()->v);
  EXPECT_EQ(mul.op, BinaryOp::Mul);
  EXPECT_EQ(std::get<Param>(mul.lhs->v).name, "u1");
  const auto& call = std::get<Call>(mul.rhs->v);
  EXPECT_EQ(call.fn, Function::Cos);
  EXPECT_EQ(std::get<Literal>(call.arg->v).exact, Rational(1, 2));
}

TEST(Parse, ConstantTimesParameter) {
  const Expr e = parse("psi*u1", kUV);
  const auto& mul = std::get<Binary>(e.root()->v);
  EXPECT_EQ(std::get<Constant>(mul.lhs->v).kind, ConstantKind::Psi);
  EXPECT_EQ(std::get<Param>(mul.rhs->v).index, 0u);
}

TEST(Parse, SyntaxErrorOffset) {
  try {
    parse("u1+*u2", kUV);
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& err) {
    EXPECT_EQ(err.offset(), 3u);
  }
}

TEST(Parse, UnknownIdentifier) {
  try {
    parse("u1 + w", kUV);
    FAIL();
  } catch (const UnknownIdentifier& err) {
    EXPECT_EQ(err.name(), "w");
    EXPECT_EQ(err.offset(), 5u);
  }
}

TEST(Parse, PrecedenceAndAssociativity) {
  // unary minus binds looser than ^
  EXPECT_EQ(parse("-u1^2", kUV), parse("-(u1^2)", kUV));
  // left associativity of - and /
  EXPECT_EQ(parse("u1-u2-1", kUV), parse("(u1-u2)-1", kUV));
  EXPECT_EQ(parse("u1/u2/2", kUV), parse("(u1/u2)/2", kUV));
  EXPECT_EQ(parse("1+2*u1", kUV), parse("1+(2*u1)", kUV));
  EXPECT_EQ(parse("u1^-2", kUV), parse("u1^(-2)", kUV));
}

TEST(Parse, ExponentMustBeIntegerLiteral) {
  EXPECT_THROW(parse("u1^u2", kUV), SyntaxError);
  EXPECT_THROW(parse("u1^0.5", kUV), SyntaxError);
  // right-associative chain: 2^3^2 groups as 2^(3^2), whose exponent is not a literal
  EXPECT_THROW(parse("2^3^2", kUV), SyntaxError);
}

TEST(Parse, RejectsBadInput) {
  EXPECT_THROW(parse("", kUV), SyntaxError);
  EXPECT_THROW(parse("(u1", kUV), SyntaxError);
  EXPECT_THROW(parse("sin u1", kUV), SyntaxError);
  EXPECT_THROW(parse("u1 u2", kUV), SyntaxError);
  EXPECT_THROW(parse("u1", {"u1", "u1"}), ParseError);
  EXPECT_THROW(parse("psi", {"psi"}), ParseError);
}

TEST(EvalJet, Square) {
  const Jet2 j = eval_jet(parse("u1^2", {"u1"}), VecD::Constant(1, 3.0));
  EXPECT_DOUBLE_EQ(j.value, 9.0);
  EXPECT_DOUBLE_EQ(j.grad(0), 6.0);
  EXPECT_DOUBLE_EQ(j.hess(0, 0), 2.0);
}

TEST(EvalJet, SineAtZero) {
  const Jet2 j = eval_jet(parse("sin(u1)", {"u1"}), VecD::Zero(1));
  EXPECT_DOUBLE_EQ(j.value, 0.0);
  EXPECT_DOUBLE_EQ(j.grad(0), 1.0);
  EXPECT_DOUBLE_EQ(j.hess(0, 0), 0.0);
}

TEST(EvalJet, PsiBilinearAgreesWithFiniteDifferences) {
  const Expr e = parse("psi*u1*u2", kUV);
  VecD x(2);
  x << 1.0, 2.0;
  const Jet2 j = eval_jet(e, x);
  const double psi = std::numbers::phi;
  EXPECT_NEAR(j.value, 2 * psi, 1e-15);
  EXPECT_NEAR(j.grad(0), 2 * psi, 1e-15);
  EXPECT_NEAR(j.grad(1), psi, 1e-15);
  EXPECT_NEAR(j.hess(0, 1), psi, 1e-15);
  EXPECT_EQ(j.hess(0, 0), 0.0);
  const auto fd = central_differences(e, x, 1e-5);
  EXPECT_LE((fd.grad - j.grad).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((fd.hess - j.hess).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(EvalJet, DomainErrors) {
  EXPECT_THROW(eval_jet(parse("sqrt(u1)", {"u1"}), VecD::Constant(1, -1.0)), DomainError);
  EXPECT_THROW(eval_jet(parse("1/u1", {"u1"}), VecD::Zero(1)), DomainError);
  EXPECT_THROW(eval_jet(parse("u1^-1", {"u1"}), VecD::Zero(1)), DomainError);
  EXPECT_THROW(eval_jet(parse("u1", {"u1"}), VecD::Zero(2)), DimensionMismatch);
  EXPECT_DOUBLE_EQ(eval(parse("sqrt(0)", {"u1"}), VecD::Zero(1)), 0.0);
}

TEST(EvalJet, AgreesWithFiniteDifferencesOnRandomExpressions) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::string text = random_expr(rng, 3);
    const Expr e = parse(text, kUV);
    VecD x(2);
    x << coord(rng), coord(rng);
    const Jet2 j = eval_jet(e, x);
    const auto fd = central_differences(e, x, 1e-5);
    const double scale = 1.0 + std::max(j.grad.cwiseAbs().maxCoeff(), j.hess.cwiseAbs().maxCoeff());
    EXPECT_LE((fd.grad - j.grad).cwiseAbs().maxCoeff(), 1e-6 * scale) << text;
    EXPECT_LE((fd.hess - j.hess).cwiseAbs().maxCoeff(), 1e-6 * scale) << text;
    EXPECT_EQ(j.hess, j.hess.transpose()) << text;
  }
}

TEST(PrintParse, RoundTripOnRandomExpressions) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = parse(random_expr(rng, 4), kUV);
    EXPECT_EQ(parse(print(e), kUV), e) << print(e);
  }
  const Expr neg = parse("-u1^-3 / 1e-5 + exp(-pi)", kUV);
  EXPECT_EQ(parse(print(neg), kUV), neg);
}

TEST(ExactAffine, RecoversQuadraticFieldCoefficients) {
  const auto f = exact_affine(parse("(1-psi)*u2 + psi*u1/2 - 3", kUV));
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->constant, QuadRat(-3));
  EXPECT_EQ(f->coeffs[0], golden_ratio_exact() / QuadRat(2));
  EXPECT_EQ(f->coeffs[1], QuadRat(1) - golden_ratio_exact());
  EXPECT_FALSE(exact_affine(parse("u1*u2", kUV)).has_value());
  EXPECT_FALSE(exact_affine(parse("u1*cos(0.5)", kUV)).has_value());
  EXPECT_FALSE(exact_affine(parse("pi*u1", kUV)).has_value());
  EXPECT_EQ(exact_affine(parse("psi^2", kUV))->constant, golden_ratio_exact() + QuadRat(1));
}
