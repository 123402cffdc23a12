#include "soergel/projector.hpp"

#include "doctest.h"

using namespace soergel;

namespace {

using K = Rational;

struct Fix {
  std::shared_ptr<Group> g;
  HeckeAlgebra H;
  Calculus<K> C;
  LeafEngine<K> L;
  ProjectorEngine<K> P;
  explicit Fix(const std::string& t)
      : g(std::make_shared<Group>(CoxeterDatum::named(t))), H(g), C(g), L(C, H), P(L) {}
};

}  // namespace

TEST_CASE("favorite_projector: base cases are identities") {
  Fix f("A2");
  CHECK(f.P.favorite({})->mor == f.C.identity({}));
  CHECK(f.P.favorite({0})->mor == f.C.identity({0}));
  // m(s,t) >= 3: C'_s C'_t = C'_st, so Z is empty
  auto st = f.P.favorite({0, 1});
  CHECK(st->mor == f.C.identity({0, 1}));
  CHECK(st->blocks.empty());
  Fix f2("A1xA1");
  CHECK(f2.P.favorite({0, 1})->mor == f2.C.identity({0, 1}));
}

TEST_CASE("favorite_projector: (s,t,s) in A2, the hand-checked instance") {
  Fix f("A2");
  auto proj = f.P.favorite({0, 1, 0});
  REQUIRE(proj->blocks.size() == 1);
  const auto& blk = proj->blocks[0];
  CHECK(blk.z == f.g->generator(0));
  CHECK(blk.mult == 1);
  REQUIRE(blk.selected.size() == 1);
  CHECK(blk.selected[0] == Bits(0b010));  // the unique degree-0 leaf to s has i = (0,1,0)
  // lambda is the 1x1 matrix (-1), eta = (-1), det = -1
  CHECK(blk.lambda.at(0, 0) == Rational(-1));
  CHECK(blk.eta.at(0, 0) == Rational(-1));
  CHECK(blk.det == Rational(-1));
  CHECK(blk.simplified_applicable);
  REQUIRE(blk.lambda_simple.has_value());
  CHECK(blk.lambda_simple->at(0, 0) == Rational(-1));
  // p = id + l^a o l for the unique degree-0 leaf l
  Leaf<K> l = f.L.materialize({0, 1, 0}, 0b010);
  Morphism<K> expect = f.C.identity({0, 1, 0}) + f.C.compose(f.C.adjoint(l.mor), l.mor);
  CHECK(proj->mor == expect);
  // character reproduces the KL element (Soergel's theorem instance)
  CHECK(f.L.character(proj->mor) == f.H.kl_element(f.g->element_of({0, 1, 0})));
}

TEST_CASE("favorite_projector rejects non-reduced words") {
  Fix f("A2");
  CHECK_THROWS_AS(f.P.favorite({0, 0}), TheoryError);
}

TEST_CASE("projector suite on all of A2 and B2") {
  for (const char* t : {"A2", "B2"}) {
    Fix f(t);
    for (Element x : f.g->elements_up_to_length(6)) {
      Word w = f.g->canonical_word(x);
      auto proj = f.P.favorite(w);
      // idempotent; factors through P; absorbs the z-blocks
      CHECK(f.C.compose(proj->mor, proj->mor) == proj->mor);
      CHECK(f.C.compose(proj->mor, proj->big_p) == proj->mor);
      CHECK(f.C.compose(proj->big_p, proj->mor) == proj->mor);
      for (const auto& blk : proj->blocks) {
        // lambda eta = Id exactly
        CHECK(blk.lambda * blk.eta == Matrix<K>::identity(blk.lambda.rows()));
        // orthogonal family, and p kills each p_z^i
        auto family = f.P.zblock_projectors(*proj, blk);
        for (size_t i = 0; i < family.size(); ++i) {
          for (size_t j = 0; j < family.size(); ++j) {
            Morphism<K> prod = f.C.compose(family[i], family[j]);
            if (i == j)
              CHECK(prod == family[i]);
            else
              CHECK(prod.is_zero());
          }
          CHECK(f.C.compose(proj->mor, family[i]).is_zero());
          CHECK(f.C.compose(family[i], proj->mor).is_zero());
        }
      }
      // character equals the KL element (char-0 theorem)
      CHECK(f.L.character(proj->mor) == f.H.kl_element(x));
    }
  }
}

TEST_CASE("degree_zero_leaves_to: examples") {
  Fix f("A2");
  auto pref = f.P.favorite({0, 1});
  Morphism<K> P = f.C.tensor3({}, pref->mor, {0});
  Morphism<K> pz = f.P.favorite({0})->mor;
  auto lz = f.P.degree_zero_leaves_to({0, 1, 0}, f.g->generator(0), P, pz);
  CHECK(lz.bits == std::vector<Bits>{0b010});
}

TEST_CASE("intersection_scalar: examples") {
  Fix f("A2");
  // identity leaf against itself
  Leaf<K> id_leaf = f.L.materialize({0, 1, 0}, 0);  // i = 0: the identity path
  CHECK(id_leaf.degree == 0);
  CHECK(id_leaf.target == f.g->element_of({0, 1, 0}));
  CHECK(f.P.intersection_scalar(id_leaf, id_leaf) == Rational(1));
  // the (sts, s) pair: equals the lambda entry via the simplified route
  Leaf<K> l = f.L.materialize({0, 1, 0}, 0b010);
  CHECK(f.P.intersection_scalar(l, l) == Rational(-1));
}

TEST_CASE("d_determinant: examples") {
  Fix f("A2");
  Element sts = f.g->element_of({0, 1, 0});
  CHECK(f.P.d_determinant(sts, sts) == Rational(1));            // y = x
  CHECK(f.P.d_determinant(f.g->generator(0), f.g->identity()) == Rational(1));  // empty matrix
  CHECK(f.P.d_determinant(sts, f.g->generator(0)) == Rational(-1));
  CHECK_THROWS_AS(f.P.d_determinant(f.g->generator(0), sts), TheoryError);  // y <= x violated
}

TEST_CASE("bad_primes: A1 and A1xA1 give empty D") {
  for (const char* t : {"A1", "A1xA1"}) {
    Fix f(t);
    auto region = f.g->elements_up_to_length(4);
    auto rep = f.P.bad_primes(region, 1);
    CHECK(rep.D.empty());
    CHECK(rep.two_excluded);
    if (std::string(t) == "A1") CHECK(rep.entries.empty());
  }
}

TEST_CASE("bad_primes: A2 report with provenance, reversed-order invariant") {
  Fix f("A2");
  auto region = f.g->elements_up_to_length(3);
  auto rep = f.P.bad_primes(region, 2, /*crosscheck_reversed=*/true);
  CHECK(rep.datum == "A2");
  // one nontrivial block: the longest element's canonical word contributes z = s
  REQUIRE(rep.entries.size() == 1);
  for (auto& e : rep.entries) {
    CHECK(e.det == "1");
    CHECK(e.primes.empty());
  }
  CHECK(rep.D.empty());
  CHECK(rep.integrality_violations.empty());
}

TEST_CASE("reduce_mod_p: identity and the A2 length-3 projector") {
  Fix f("A2");
  auto p0 = f.P.favorite({0, 1, 0}, /*want_dlb=*/true);
  REQUIRE(p0->dlb.has_value());
  for (long p : {3L, 5L, 7L}) {
    Fp::ModulusScope scope(p);
    auto gp = std::make_shared<Group>(CoxeterDatum::named("A2"));
    HeckeAlgebra Hp(gp);
    Calculus<Fp> Cp(gp);
    LeafEngine<Fp> Lp(Cp, Hp);
    auto res = reduce_mod_p(*p0, p, Lp);
    REQUIRE(std::holds_alternative<Projector<Fp>>(res));
    auto& pp = std::get<Projector<Fp>>(res);
    CHECK(Cp.compose(pp.mor, pp.mor) == pp.mor);
    // character over F_p equals the char-0 character
    CHECK(Lp.character(pp.mor) == f.H.kl_element(f.g->element_of({0, 1, 0})));
    // identity projector reduces to the identity
    auto id0 = f.P.favorite({0, 1}, true);
    auto idres = reduce_mod_p(*id0, p, Lp);
    REQUIRE(std::holds_alternative<Projector<Fp>>(idres));
    CHECK(std::get<Projector<Fp>>(idres).mor == Cp.identity({0, 1}));
  }
}

TEST_CASE("reduce_mod_p: a coefficient with denominator p is NotLiftable") {
  Fix f("A2");
  auto p0 = f.P.favorite({0, 1, 0}, true);
  Projector<K> doctored = *p0;
  REQUIRE(doctored.dlb.has_value());
  // plant a 1/5 coefficient
  (*doctored.dlb)[0] += Poly<K>::constant(f.C.nvars(), Rational(1, 5));
  Fp::ModulusScope scope(5);
  auto gp = std::make_shared<Group>(CoxeterDatum::named("A2"));
  HeckeAlgebra Hp(gp);
  Calculus<Fp> Cp(gp);
  LeafEngine<Fp> Lp(Cp, Hp);
  auto res = reduce_mod_p(doctored, 5, Lp);
  REQUIRE(std::holds_alternative<NotLiftable>(res));
  CHECK(std::get<NotLiftable>(res).p == 5);
  CHECK(!std::get<NotLiftable>(res).offenders.empty());
}

TEST_CASE("affine A1: projectors on a small region") {
  Fix f("A1~");
  for (Element x : f.g->elements_up_to_length(3)) {
    Word w = f.g->canonical_word(x);
    auto proj = f.P.favorite(w);
    CHECK(f.C.compose(proj->mor, proj->mor) == proj->mor);
    CHECK(f.L.character(proj->mor) == f.H.kl_element(x));
  }
}
