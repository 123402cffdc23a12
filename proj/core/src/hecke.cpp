#include "soergel/hecke.hpp"

#include <algorithm>

#include "soergel/matrix.hpp"

namespace soergel {

HeckeElt HeckeAlgebra::mul_gen(const HeckeElt& a, int s) {
  Group* g = g_.get();
  HeckeElt r(g);
  // T~_x T~_s = T~_{xs}                    if l(xs) > l(x)
  //           = T~_{xs} + (v^-1 - v) T~_x  if l(xs) < l(x)
  LaurentInt corr = LaurentInt::monomial(-1) - LaurentInt::monomial(1);
  for (auto& [id, c] : a.terms()) {
    uint32_t xs = g->mul_gen(id, s);
    r.add(xs, c);
    if (g->length(xs) < g->length(id)) r.add(id, c * corr);
  }
  return r;
}

HeckeElt HeckeAlgebra::mul(const HeckeElt& a, const HeckeElt& b) {
  Group* g = g_.get();
  HeckeElt r(g);
  for (auto& [id, c] : b.terms()) {
    HeckeElt t = a;
    for (int s : g->shortlex(id)) t = mul_gen(t, s);
    r += t * c;
  }
  return r;
}

HeckeElt HeckeAlgebra::product_of_generators(const Word& w) {
  HeckeElt r = HeckeElt::unit(g_.get());
  for (int s : w) r = mul_gen(r, s);
  return r;
}

HeckeElt HeckeAlgebra::bar(const HeckeElt& a) {
  Group* g = g_.get();
  HeckeElt r(g);
  for (auto& [id, c] : a.terms()) {
    HeckeElt bx;
    {
      std::lock_guard lock(mtx_);
      auto it = bar_cache_.find(id);
      if (it != bar_cache_.end()) bx = it->second;
    }
    if (bx.is_zero() && id != 0) {
      // bar(T~_x) = prod_k (T~_{s_k} + (v - v^-1)) over a reduced word of x.
      bx = HeckeElt::unit(g);
      LaurentInt c1 = LaurentInt::monomial(1) - LaurentInt::monomial(-1);
      for (int s : g->shortlex(id)) {
        HeckeElt t = mul_gen(bx, s);
        t += bx * c1;
        bx = t;
      }
      std::lock_guard lock(mtx_);
      bar_cache_.emplace(id, bx);
    } else if (id == 0) {
      bx = HeckeElt::unit(g);
    }
    r += bx * c.bar();
  }
  return r;
}

LaurentInt HeckeAlgebra::mu_coeff(Element y, Element x) {
  return LaurentInt::constant(kl_element(x).coeff(y).coeff(1));
}

HeckeElt HeckeAlgebra::kl_element(Element x) {
  {
    std::lock_guard lock(mtx_);
    auto it = kl_cache_.find(x.id());
    if (it != kl_cache_.end()) return it->second;
  }
  Group* g = g_.get();
  HeckeElt res;
  if (x.length() == 0) {
    res = HeckeElt::unit(g);
  } else {
    int s = g->shortlex(x.id()).back();
    Element u(g, g->mul_gen(x.id(), s));  // l(u) = l(x) - 1, us > u
    HeckeElt cu = kl_element(u);
    // C'_u C'_s = C'_u (T~_s + v T~_e)
    HeckeElt prod = mul_gen(cu, s) + cu * LaurentInt::monomial(1);
    // subtract mu(y,u) C'_y over y < u with ys < y
    res = prod;
    for (auto& [yid, cy] : cu.terms()) {
      Element y(g, yid);
      if (y == u) continue;
      long long mu = cy.coeff(1);
      if (mu == 0) continue;
      if (!g->has_right_descent(yid, s)) continue;
      res -= kl_element(y) * LaurentInt::constant(mu);
    }
  }
  // Defining conditions, asserted on every computed element.
  if (!(res.coeff(x) == LaurentInt::constant(1)))
    throw TheoryError("KL element: leading coefficient is not 1");
  for (auto& [yid, c] : res.terms())
    if (yid != x.id() && !c.in_vZv()) throw TheoryError("KL element: coefficient not in vZ[v]");
  std::lock_guard lock(mtx_);
  kl_cache_.emplace(x.id(), res);
  return res;
}

HeckeElt HeckeAlgebra::kl_element_by_solver(Element x) {
  Group* g = g_.get();
  if (x.length() == 0) return HeckeElt::unit(g);
  // Unknowns: coefficients of v^1..v^{l(x)-l(y)} in h_y for every y < x.
  std::vector<Element> below;
  for (Element y : g->elements_up_to_length(x.length() - 1))
    if (g->bruhat_leq(y, x)) below.push_back(y);
  struct Var {
    uint32_t y;
    int exp;
  };
  std::vector<Var> vars;
  for (Element y : below)
    for (int e = 1; e <= x.length() - y.length(); ++e) vars.push_back({y.id(), e});
  // Residual map: bar(C') - C' where C' = T~_x + sum vars. Both bar(T~_x) and
  // bar of each unknown basis term are Hecke elements; the equation system is
  // linear in the unknowns over Q.
  HeckeElt bar_tx = bar(HeckeElt::basis(g, x));
  HeckeElt tx = HeckeElt::basis(g, x);
  // Row index space: (element id, exponent) pairs that appear.
  std::map<std::pair<uint32_t, int>, int> rows;
  auto row_of = [&](uint32_t id, int e) {
    auto [it, fresh] = rows.try_emplace(std::make_pair(id, e), static_cast<int>(rows.size()));
    return it->second;
  };
  struct Entry {
    int row;
    Rational val;
  };
  std::vector<std::vector<Entry>> cols(vars.size());
  std::vector<Entry> rhs;
  auto accumulate = [&](const HeckeElt& h, std::vector<Entry>& out, long long sign) {
    for (auto& [id, c] : h.terms())
      for (auto& [e, v] : c.terms()) out.push_back({row_of(id, e), Rational(sign * v)});
  };
  // rhs = -(bar(T~_x) - T~_x)
  accumulate(bar_tx, rhs, -1);
  accumulate(tx, rhs, 1);
  for (size_t j = 0; j < vars.size(); ++j) {
    HeckeElt term(g);
    term.add(vars[j].y, LaurentInt::monomial(vars[j].exp));
    HeckeElt diff = bar(term) - term;
    accumulate(diff, cols[j], 1);
  }
  int nrows = static_cast<int>(rows.size());
  Matrix<Rational> A(nrows, static_cast<int>(vars.size()));
  Matrix<Rational> B(nrows, 1);
  for (size_t j = 0; j < vars.size(); ++j)
    for (auto& e : cols[j]) A.at(e.row, static_cast<int>(j)) += e.val;
  for (auto& e : rhs) B.at(e.row, 0) += e.val;
  bool unique = false;
  auto sol = A.solve(B, &unique);
  if (!sol || !unique) throw TheoryError("KL solver: system has no unique solution");
  HeckeElt res = tx;
  for (size_t j = 0; j < vars.size(); ++j) {
    const Rational& v = sol->at(static_cast<int>(j), 0);
    if (v.is_zero()) continue;
    if (!v.is_integer()) throw TheoryError("KL solver: non-integer coefficient");
    res.add(vars[j].y, LaurentInt::monomial(vars[j].exp, v.numerator().get_si()));
  }
  return res;
}

LaurentInt HeckeAlgebra::tau(Element x, const HeckeElt& a) { return a.coeff(x); }

HeckeElt HeckeAlgebra::kl_word_product(const Word& w) {
  Group* g = g_.get();
  HeckeElt r = HeckeElt::unit(g);
  for (int s : w) {
    // r * C'_s = r T~_s + v r
    r = mul_gen(r, s) + r * LaurentInt::monomial(1);
  }
  return r;
}

LaurentInt HeckeAlgebra::dlb_degree_oracle(const Word& s, const Word& r) {
  Group* g = g_.get();
  Word rop(r.rbegin(), r.rend());
  HeckeElt cs = kl_word_product(s);
  HeckeElt prod = cs;
  for (int t : rop) prod = mul_gen(prod, t) + prod * LaurentInt::monomial(1);
  LaurentInt route1 = tau(g->identity(), prod);
  // Second route: sum_x p_x^s p_x^r.
  HeckeElt cr = kl_word_product(r);
  LaurentInt route2;
  for (auto& [id, c] : cs.terms()) route2 += c * cr.coeff(Element(g, id));
  if (route1 != route2)
    throw TheoryError("dlb_degree_oracle: trace route and coefficient route disagree");
  return route1;
}

std::map<Element, LaurentInt> HeckeAlgebra::kl_expand(const HeckeElt& h) {
  Group* g = g_.get();
  std::map<Element, LaurentInt> out;
  HeckeElt rest = h;
  while (!rest.is_zero()) {
    // strip the T~-maximal term by length, then ShortLex
    uint32_t best = rest.terms().begin()->first;
    for (auto& [id, c] : rest.terms()) {
      if (g->length(id) > g->length(best) ||
          (g->length(id) == g->length(best) && g->shortlex(id) < g->shortlex(best)))
        best = id;
    }
    Element y(g, best);
    LaurentInt c = rest.coeff(y);
    rest -= kl_element(y) * c;
    out.emplace(y, c);
  }
  return out;
}

std::map<Element, long long> HeckeAlgebra::kl_multiplicities(Element x, int s) {
  Group* g = g_.get();
  Element xs = x.times(s);
  if (xs.length() <= x.length()) throw TheoryError("kl_multiplicities requires l(xs) > l(x)");
  HeckeElt prod = mul_gen(kl_element(x), s) + kl_element(x) * LaurentInt::monomial(1);
  auto expansion = kl_expand(prod);
  std::map<Element, long long> out;
  for (auto& [y, c] : expansion) {
    if (c.is_zero()) continue;
    if (!c.is_constant() || c.coeff(0) < 0)
      throw TheoryError("kl_multiplicities: coefficient is not a nonnegative integer");
    if (y == xs) {
      if (c.coeff(0) != 1) throw TheoryError("kl_multiplicities: top coefficient is not 1");
      continue;
    }
    out.emplace(y, c.coeff(0));
  }
  return out;
}

}  // namespace soergel
