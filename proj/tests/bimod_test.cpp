#include "soergel/bimod.hpp"

#include "doctest.h"

using namespace soergel;

namespace {

using K = Rational;
using QPoly = Poly<K>;
using El = BSElement<K>;
using Mor = Morphism<K>;

struct Fix {
  std::shared_ptr<Group> g;
  Calculus<K> C;
  explicit Fix(const std::string& t)
      : g(std::make_shared<Group>(CoxeterDatum::named(t))), C(g) {}
  QPoly one() { return C.poly_one(); }
  QPoly x(int s) { return C.poly_var(s); }
};

}  // namespace

TEST_CASE("normal_form: examples in B_s") {
  Fix f("A2");
  // (x_s, 1) -> x_s * b0
  El a = f.C.normal_form({0}, {f.x(0), f.one()});
  CHECK(a.coeff(0) == f.x(0));
  CHECK(a.coeff(1).is_zero());
  // (1, x_s) -> b1
  El b = f.C.normal_form({0}, {f.one(), f.x(0)});
  CHECK(b.coeff(0).is_zero());
  CHECK(b.coeff(1) == f.one());
  // A2: (1, x_t) -> (x_t + x_s/2) b0 - 1/2 b1
  El c = f.C.normal_form({0}, {f.one(), f.x(1)});
  CHECK(c.coeff(0) == f.x(1) + f.x(0) * Rational(1, 2));
  CHECK(c.coeff(1) == QPoly::constant(2, Rational(-1, 2)));
  // cross-check by applying m_s to both sides: m_s(1 (x) x_t) = x_t
  Mor m = f.C.gen_m(0);
  CHECK(m.apply(c).coeff(0) == f.x(1));
}

TEST_CASE("normal_form: idempotent and construction-independent") {
  Fix f("B2");
  // the same element built two ways: 1 (x) x_t x_s vs right_mult chains
  El e1 = f.C.normal_form({0, 1}, {f.one(), f.x(1), f.x(0)});
  El e2 = f.C.right_mult(f.C.right_mult(El::basis({0, 1}, 0, f.C.nvars()), f.x(1) * f.x(0)), f.one());
  // e2 = (1 (x) 1 (x) 1) * (x_t x_s) differs in slot placement but both are
  // normal forms of the same tensor: 1 (x) 1 (x) x_t x_s
  El e3 = f.C.normal_form({0, 1}, {f.one(), f.one(), f.x(1) * f.x(0)});
  CHECK(e2 == e3);
  // re-normalizing a normal form is the identity: feed basis slots back in
  for (auto& [bits, coeff] : e1.coeffs()) {
    (void)bits;
    CHECK(coeff == e1.coeff(bits));
  }
}

TEST_CASE("right_mult: examples") {
  Fix f("A2");
  El b0 = El::basis({0}, 0, f.C.nvars());
  CHECK(f.C.right_mult(b0, f.one()) == b0);
  // b0 * x_s = b1 (definition of the basis)
  El r = f.C.right_mult(b0, f.x(0));
  CHECK(r.coeff(1) == f.one());
  CHECK(r.coeff(0).is_zero());
  // b1 * x_s = x_s^2 is s-invariant and slides left
  El b1 = El::basis({0}, 1, f.C.nvars());
  El r2 = f.C.right_mult(b1, f.x(0));
  CHECK(r2.coeff(0) == f.x(0) * f.x(0));
  CHECK(r2.coeff(1).is_zero());
}

TEST_CASE("gen_m: multiplication morphism") {
  Fix f("A2");
  Mor m = f.C.gen_m(0);
  CHECK(m.degree() == 1);
  CHECK(m.image(0).coeff(0) == f.one());   // 1 (x) 1 -> 1
  CHECK(m.image(1).coeff(0) == f.x(0));    // 1 (x) x_s -> x_s
  // m_s(eps_s(1)) = 2 x_s
  Mor eps = f.C.gen_eps(0);
  El v = m.apply(eps.image(0));
  CHECK(v.coeff(0) == f.x(0) * Rational(2));
}

TEST_CASE("gen_j: examples") {
  Fix f("A2");
  Mor j = f.C.gen_j(0);
  CHECK(j.degree() == -1);
  // j(1 (x) x_s (x) 1) = 1 (x) 1
  CHECK(j.image(1).coeff(0) == f.one());
  // j(1 (x) 1 (x) 1) = 0
  CHECK(j.image(0).is_zero());
  // j(1 (x) x_s (x) x_s) = 1 (x) x_s
  CHECK(j.image(3).coeff(1) == f.one());
}

TEST_CASE("gen_eps and gen_p: adjoint pair values and degrees") {
  Fix f("A2");
  Mor eps = f.C.gen_eps(0), p = f.C.gen_p(0), m = f.C.gen_m(0), j = f.C.gen_j(0);
  // eps(1) = x_s (x) 1 + 1 (x) x_s
  CHECK(eps.image(0).coeff(0) == f.x(0));
  CHECK(eps.image(0).coeff(1) == f.one());
  // p(1 (x) 1) = 1 (x) 1 (x) 1
  CHECK(p.image(0).coeff(0) == f.one());
  CHECK(p.image(0).coeffs().size() == 1);
  // degree of a morphism equals the degree of its adjoint
  CHECK(eps.degree() == m.degree());
  CHECK(p.degree() == j.degree());
  // j o p = 0
  Mor jp = f.C.compose(j, p);
  CHECK(jp.is_zero());
}

TEST_CASE("zig-zag identities hold exactly (unit scalar 1)") {
  for (const char* t : {"A2", "B2"}) {
    Fix f(t);
    for (int s = 0; s < 2; ++s) {
      Mor cap = f.C.compose(f.C.gen_m(s), f.C.gen_j(s));   // B_s B_s -> R
      Mor cup = f.C.compose(f.C.gen_p(s), f.C.gen_eps(s)); // R -> B_s B_s
      Word ws{s};
      Mor id_s = f.C.identity(ws);
      // (cap (x) id) o (id (x) cup) = id
      Mor lhs = f.C.compose(f.C.tensor3({}, cap, ws), f.C.tensor3(ws, cup, {}));
      CHECK(lhs == id_s);
      // (id (x) cap) o (cup (x) id) = id
      Mor rhs = f.C.compose(f.C.tensor3(ws, cap, {}), f.C.tensor3({}, cup, ws));
      CHECK(rhs == id_s);
    }
  }
}

TEST_CASE("braid_morphism: m = 2 transposition is invertible") {
  Fix f("A1xA1");
  Mor fst = f.C.braid_morphism(0, 1);
  Mor fts = f.C.braid_morphism(1, 0);
  CHECK(fst.degree() == 0);
  CHECK(fst.image(0).coeff(0) == f.one());  // fixes the unit tensor
  Mor round = f.C.compose(fts, fst);
  CHECK(round == f.C.identity({0, 1}));
}

TEST_CASE("braid_morphism: m = 3 in A2 fixes the unit tensor") {
  Fix f("A2");
  Mor fst = f.C.braid_morphism(0, 1);
  CHECK(fst.src() == Word{0, 1, 0});
  CHECK(fst.dst() == Word{1, 0, 1});
  CHECK(fst.degree() == 0);
  CHECK(fst.image(0).coeff(0) == f.one());
  CHECK(fst.image(0).coeffs().size() == 1);
  // f_rs f_sr f_rs ... applied to the unit tensor returns the unit tensor
  Mor fts = f.C.braid_morphism(1, 0);
  El u = El::unit_tensor({0, 1, 0}, f.C.nvars());
  El v = fst.apply(u);
  El w = fts.apply(v);
  CHECK(w.coeff(0) == f.one());
}

TEST_CASE("braid_morphism: m = 4 in B2 solves uniquely") {
  Fix f("B2");
  Mor fst = f.C.braid_morphism(0, 1);
  CHECK(fst.degree() == 0);
  CHECK(fst.image(0).coeff(0) == f.one());
  // right-linearity was checked at construction; make sure values are in Z[1/2]
  for (auto& im : fst.images())
    for (auto& [bits, poly] : im.coeffs())
      for (auto& [mono, c] : poly.terms()) CHECK(c.denominator_is_power_of_two());
}

TEST_CASE("braid_morphism: infinite order is an error") {
  Fix f("A1~");
  CHECK_THROWS_AS(f.C.braid_morphism(0, 1), TheoryError);
}

TEST_CASE("compose and tensor3: examples") {
  Fix f("A2");
  Mor m = f.C.gen_m(0);
  Mor idp = f.C.identity({1});
  CHECK(f.C.compose(f.C.identity({}), m) == m);
  CHECK(f.C.tensor3({}, m, {}) == m);
  // (id_t (x) m_s)(1 (x) 1 (x) 1) = 1 (x) 1 in B_t
  Mor tm = f.C.tensor3({1}, m, {});
  CHECK(tm.src() == Word{1, 0});
  CHECK(tm.dst() == Word{1});
  CHECK(tm.image(0).coeff(0) == f.one());
  // left-frame renormalization: coefficients crossing the junction
  // (id_t (x) m_s)(1 (x) 1 (x) x_s) = 1 (x) x_s -> normal form in B_t
  El img = tm.image(2);
  El expect = f.C.normal_form({1}, {f.one(), f.x(0)});
  CHECK(img == expect);
}

TEST_CASE("adjoint: examples and involution") {
  Fix f("A2");
  Mor m = f.C.gen_m(0);
  CHECK(f.C.adjoint(m) == f.C.gen_eps(0));
  CHECK(f.C.adjoint(f.C.gen_eps(0)) == m);
  CHECK(f.C.adjoint(f.C.gen_j(0)) == f.C.gen_p(0));
  // adjoint(id_t (x) j_s) = id_t (x) p_s
  Mor tj = f.C.tensor3({1}, f.C.gen_j(0), {});
  CHECK(f.C.adjoint(tj) == f.C.tensor3({1}, f.C.gen_p(0), {}));
  // involution and degree preservation on a composite
  Mor comp = f.C.compose(m, f.C.tensor3({}, f.C.gen_j(0), {}));
  CHECK(f.C.adjoint(f.C.adjoint(comp)) == comp);
  CHECK(f.C.adjoint(comp).degree() == comp.degree());
  // adjoint of the braid morphism is the reverse braid morphism
  CHECK(f.C.adjoint(f.C.braid_morphism(0, 1)) == f.C.braid_morphism(1, 0));
  // a morphism without provenance has no adjoint
  Mor stripped = m;
  stripped.set_gen_word(std::nullopt);
  CHECK_THROWS_AS(f.C.adjoint(stripped), TheoryError);
}

TEST_CASE("morphisms stored as matrices and words agree") {
  Fix f("B2");
  Mor chain = f.C.compose(f.C.tensor3({}, f.C.gen_m(0), {1, 0, 1, 0}),
                          f.C.tensor3({0}, f.C.braid_morphism(0, 1), {}));
  REQUIRE(chain.gen_word().has_value());
  Mor rebuilt = f.C.from_gen_word(chain.src(), *chain.gen_word());
  CHECK(rebuilt == chain);
}

TEST_CASE("beta: examples") {
  Fix f("A2");
  auto rx = f.C.beta({0});
  // beta(1 (x) 1) = 1_s
  CHECK(rx.images[0] == f.one());
  // beta(1 (x) x_s) = s(x_s) = -x_s
  CHECK(rx.images[1] == -f.x(0));
  // beta on the empty word is the identity of R
  auto re = f.C.beta({});
  CHECK(re.images.size() == 1);
  CHECK(re.images[0] == f.one());
  CHECK(re.x == f.g->identity());
  // twisted right action: beta is right-linear for the twisted structure,
  // i.e. beta(m r) = beta(m) x(r)
  auto rst = f.C.beta({0, 1});
  El u = El::unit_tensor({0, 1}, f.C.nvars());
  QPoly r = f.x(0) + f.x(1) * Rational(3);
  El ur = f.C.right_mult(u, r);
  QPoly lhs = rst.apply(ur);
  QPoly rhs = rst.apply(u) * act<K>(rst.x, r);
  CHECK(lhs == rhs);
}

TEST_CASE("every generator is right-linear (checked exhaustively)") {
  for (const char* t : {"A2", "B2"}) {
    Fix f(t);
    for (int s = 0; s < 2; ++s) {
      CHECK_NOTHROW(f.C.check_right_linear(f.C.gen_m(s)));
      CHECK_NOTHROW(f.C.check_right_linear(f.C.gen_j(s)));
      CHECK_NOTHROW(f.C.check_right_linear(f.C.gen_eps(s)));
      CHECK_NOTHROW(f.C.check_right_linear(f.C.gen_p(s)));
    }
    CHECK_NOTHROW(f.C.check_right_linear(f.C.compose(
        f.C.tensor3({0}, f.C.gen_j(1), {}), f.C.tensor3({0}, f.C.gen_p(1), {}))));
  }
}
