#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "soergel/coxeter.hpp"
#include "soergel/laurent.hpp"

namespace soergel {

// Element of the Hecke algebra in the normalized standard basis
// {T~_x = v^{l(x)} T_x}.  Coordinates are Laurent polynomials over Z.
class HeckeElt {
 public:
  HeckeElt() : g_(nullptr) {}
  explicit HeckeElt(Group* g) : g_(g) {}

  static HeckeElt basis(Group* g, Element x) {
    HeckeElt h(g);
    h.c_.emplace(x.id(), LaurentInt::constant(1));
    return h;
  }
  static HeckeElt unit(Group* g) { return basis(g, g->identity()); }

  Group* group() const { return g_; }
  bool is_zero() const { return c_.empty(); }
  const std::map<uint32_t, LaurentInt>& terms() const { return c_; }

  LaurentInt coeff(Element x) const {
    auto it = c_.find(x.id());
    return it == c_.end() ? LaurentInt() : it->second;
  }

  void add(uint32_t id, const LaurentInt& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = c_.try_emplace(id, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) c_.erase(it);
    }
  }

  HeckeElt operator-() const {
    HeckeElt r(g_);
    for (auto& [id, c] : c_) r.c_.emplace(id, -c);
    return r;
  }
  HeckeElt& operator+=(const HeckeElt& o) {
    for (auto& [id, c] : o.c_) add(id, c);
    return *this;
  }
  HeckeElt& operator-=(const HeckeElt& o) {
    for (auto& [id, c] : o.c_) add(id, -c);
    return *this;
  }
  friend HeckeElt operator+(HeckeElt a, const HeckeElt& b) { return a += b; }
  friend HeckeElt operator-(HeckeElt a, const HeckeElt& b) { return a -= b; }
  HeckeElt operator*(const LaurentInt& c) const {
    HeckeElt r(g_);
    for (auto& [id, cc] : c_) r.add(id, cc * c);
    return r;
  }
  bool operator==(const HeckeElt& o) const { return c_ == o.c_; }
  bool operator!=(const HeckeElt& o) const { return !(*this == o); }

 private:
  Group* g_;
  std::map<uint32_t, LaurentInt> c_;
};

// Hecke algebra operations with per-group caches for the bar involution and
// the Kazhdan-Lusztig basis.  Pure values in, pure values out; the caches
// allow concurrent readers and serialize writers.
class HeckeAlgebra {
 public:
  explicit HeckeAlgebra(std::shared_ptr<Group> g) : g_(std::move(g)) {}

  Group* group() const { return g_.get(); }

  // T~_x T~_s, by the quadratic relation when l(xs) < l(x).
  HeckeElt mul_gen(const HeckeElt& a, int s);
  HeckeElt mul(const HeckeElt& a, const HeckeElt& b);
  HeckeElt product_of_generators(const Word& w);  // C'-products use kl_gen instead

  HeckeElt bar(const HeckeElt& a);

  // Kazhdan-Lusztig basis element C'_x, by the standard mu-recursion.
  HeckeElt kl_element(Element x);
  // Independent oracle: direct linear solve of bar-invariance and the
  // degree constraints; test-only cross-check of kl_element.
  HeckeElt kl_element_by_solver(Element x);

  // Coefficient of T~_x.
  LaurentInt tau(Element x, const HeckeElt& a);

  // C'_{s_1} ... C'_{s_n} as a Hecke element.
  HeckeElt kl_word_product(const Word& w);

  // Graded rank of Hom(B_s, B_r): tau(C'_s C'_{r^op}); both displayed routes
  // are computed and asserted equal.
  LaurentInt dlb_degree_oracle(const Word& s, const Word& r);

  // Coefficients m_y in C'_x C'_s = C'_{xs} + sum m_y C'_y (requires
  // l(xs) > l(x)); values checked to be nonnegative integers.
  std::map<Element, long long> kl_multiplicities(Element x, int s);

  // Expansion of a bar-invariant element in the KL basis (unitriangular
  // change of basis); returns coefficient polynomials.
  std::map<Element, LaurentInt> kl_expand(const HeckeElt& h);

 private:
  LaurentInt mu_coeff(Element y, Element x);  // coefficient of v in tau_y(C'_x)

  std::shared_ptr<Group> g_;
  std::mutex mtx_;
  std::map<uint32_t, HeckeElt> bar_cache_;  // bar(T~_x)
  std::map<uint32_t, HeckeElt> kl_cache_;
};

}  // namespace soergel
