#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "soergel/error.hpp"
#include "soergel/intmatrix.hpp"
#include "soergel/scalar.hpp"

namespace soergel {

// Exponent vector.  The grading puts every variable x_s in degree 2, so a
// monomial of exponent sum k has degree 2k.
using Monomial = std::vector<uint8_t>;

inline int monomial_degree(const Monomial& m) {
  int s = 0;
  for (uint8_t e : m) s += e;
  return 2 * s;
}

// Graded lexicographic order on the fixed variable ordering of the datum.
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    int da = monomial_degree(a), db = monomial_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

// Linear form on the realization, coordinates in the basis {x_s}.
template <ScalarField K>
struct LinForm {
  std::vector<K> coeff;

  int rank() const { return static_cast<int>(coeff.size()); }
  static LinForm var(int rank, int i) {
    LinForm f;
    f.coeff.assign(rank, K());
    f.coeff[i] = K::from_int(1);
    return f;
  }
};

// Sparse multivariate polynomial over K on the realization space.  Zero
// coefficients are never stored; values are immutable in spirit (all ops
// return fresh values) and safe to share across threads.
template <ScalarField K>
class Poly {
 public:
  Poly() : rank_(0) {}
  explicit Poly(int rank) : rank_(rank) {}

  static Poly zero(int rank) { return Poly(rank); }
  static Poly constant(int rank, const K& c) {
    Poly p(rank);
    if (!c.is_zero()) p.t_.emplace(Monomial(rank, 0), c);
    return p;
  }
  static Poly one(int rank) { return constant(rank, K::from_int(1)); }
  static Poly var(int rank, int i) {
    Poly p(rank);
    Monomial m(rank, 0);
    m[i] = 1;
    p.t_.emplace(std::move(m), K::from_int(1));
    return p;
  }
  static Poly from_linform(const LinForm<K>& f) {
    Poly p(f.rank());
    for (int i = 0; i < f.rank(); ++i) {
      if (f.coeff[i].is_zero()) continue;
      Monomial m(f.rank(), 0);
      m[i] = 1;
      p.t_.emplace(std::move(m), f.coeff[i]);
    }
    return p;
  }

  int rank() const { return rank_; }
  bool is_zero() const { return t_.empty(); }
  size_t term_count() const { return t_.size(); }
  const std::map<Monomial, K, GrlexLess>& terms() const { return t_; }

  K coeff(const Monomial& m) const {
    auto it = t_.find(m);
    return it == t_.end() ? K() : it->second;
  }
  K constant_term() const { return coeff(Monomial(rank_, 0)); }

  // Degree of the top term (graded scale: x_s has degree 2); zero poly -> -1.
  int degree() const { return t_.empty() ? -1 : monomial_degree(t_.rbegin()->first); }
  bool is_homogeneous() const {
    return t_.empty() || monomial_degree(t_.begin()->first) == degree();
  }
  // Degree check for homogeneous values, with zero counting as any degree.
  bool is_homogeneous_of_degree(int d) const {
    return t_.empty() || (is_homogeneous() && degree() == d);
  }

  std::map<int, Poly> homogeneous_components() const {
    std::map<int, Poly> out;
    for (const auto& [m, c] : t_) {
      auto [it, fresh] = out.try_emplace(monomial_degree(m), Poly(rank_));
      it->second.t_.emplace(m, c);
    }
    return out;
  }

  Poly operator-() const {
    Poly r(rank_);
    for (const auto& [m, c] : t_) r.t_.emplace(m, -c);
    return r;
  }
  // The zero polynomial acts as rank-agnostic in all arithmetic.
  Poly& operator+=(const Poly& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) rank_ = o.rank_;
    check_rank(o);
    for (const auto& [m, c] : o.t_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) rank_ = o.rank_;
    check_rank(o);
    for (const auto& [m, c] : o.t_) add_term(m, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly(std::max(a.rank_, b.rank_));
    a.check_rank(b);
    Poly r(a.rank_);
    for (const auto& [ma, ca] : a.t_)
      for (const auto& [mb, cb] : b.t_) {
        Monomial m(a.rank_);
        for (int i = 0; i < a.rank_; ++i) m[i] = static_cast<uint8_t>(ma[i] + mb[i]);
        r.add_term(m, ca * cb);
      }
    return r;
  }
  Poly operator*(const K& c) const {
    Poly r(rank_);
    if (c.is_zero()) return r;
    for (const auto& [m, cc] : t_) r.t_.emplace(m, cc * c);
    return r;
  }

  bool operator==(const Poly& o) const {
    if (is_zero() && o.is_zero()) return true;
    return rank_ == o.rank_ && t_ == o.t_;
  }
  bool operator!=(const Poly& o) const { return !(*this == o); }

  // Substitution x_i -> images[i]; the workhorse behind the W-action.
  Poly substitute(const std::vector<Poly>& images) const {
    Poly r(rank_);
    for (const auto& [m, c] : t_) {
      Poly term = constant(rank_, c);
      for (int i = 0; i < rank_; ++i)
        for (int e = 0; e < m[i]; ++e) term = term * images[i];
      r += term;
    }
    return r;
  }

  // Exact division by the variable x_i; throws if any term lacks it.
  Poly divided_by_variable(int i) const {
    Poly r(rank_);
    for (const auto& [m, c] : t_) {
      if (m[i] == 0) throw TheoryError("polynomial not divisible by x_" + std::to_string(i + 1));
      Monomial mm = m;
      --mm[i];
      r.t_.emplace(std::move(mm), c);
    }
    return r;
  }

  // Evaluation at a scalar point (used by rank-stability assertions).
  K eval(const std::vector<K>& point) const {
    K total;
    for (const auto& [m, c] : t_) {
      K v = c;
      for (int i = 0; i < rank_; ++i)
        for (int e = 0; e < m[i]; ++e) v = v * point[i];
      total += v;
    }
    return total;
  }

  // Canonical text form, terms in descending graded-lex order,
  // e.g. "x_1^2*x_2 - 1/2*x_2".
  std::string str() const {
    if (t_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
      const auto& [m, c] = *it;
      std::string cs = c.str();
      bool neg = !cs.empty() && cs[0] == '-';
      if (first) {
        if (neg) os << "-";
      } else {
        os << (neg ? " - " : " + ");
      }
      if (neg) cs = cs.substr(1);
      bool const_mono = monomial_degree(m) == 0;
      bool unit = (cs == "1");
      if (!unit || const_mono) os << cs;
      bool printed_var = false;
      for (int i = 0; i < rank_; ++i) {
        if (m[i] == 0) continue;
        if (printed_var || !unit || const_mono) os << "*";
        os << "x_" << (i + 1);
        if (m[i] > 1) os << "^" << static_cast<int>(m[i]);
        printed_var = true;
      }
      first = false;
    }
    return os.str();
  }

  static std::optional<Poly> parse(int rank, const std::string& s);

 private:
  void check_rank(const Poly& o) const {
    if (rank_ != o.rank_) throw TheoryError("polynomial rank mismatch");
  }
  void add_term(const Monomial& m, const K& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = t_.try_emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) t_.erase(it);
    }
  }

  int rank_;
  std::map<Monomial, K, GrlexLess> t_;
};

// Parses the canonical text form produced by str().
template <ScalarField K>
std::optional<Poly<K>> Poly<K>::parse(int rank, const std::string& s) {
  Poly<K> out(rank);
  if (s == "0") return out;
  size_t i = 0;
  auto skip_ws = [&] { while (i < s.size() && s[i] == ' ') ++i; };
  bool first = true;
  while (true) {
    skip_ws();
    if (i >= s.size()) break;
    bool neg = false;
    if (!first || s[i] == '+' || s[i] == '-') {
      if (i >= s.size() || (s[i] != '+' && s[i] != '-')) return std::nullopt;
      neg = s[i] == '-';
      ++i;
      skip_ws();
    }
    first = false;
    // coefficient (optional)
    std::string num;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '/')) num += s[i++];
    K c = K::from_int(1);
    if (!num.empty()) {
      auto p = K::parse(num);
      if (!p) return std::nullopt;
      c = *p;
    }
    if (neg) c = -c;
    if (i < s.size() && s[i] == '*' && !num.empty()) ++i;
    // monomial
    Monomial m(rank, 0);
    while (i + 1 < s.size() && s[i] == 'x' && s[i + 1] == '_') {
      i += 2;
      std::string idx;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) idx += s[i++];
      if (idx.empty()) return std::nullopt;
      int v = std::stoi(idx) - 1;
      if (v < 0 || v >= rank) return std::nullopt;
      int e = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        std::string ex;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ex += s[i++];
        if (ex.empty()) return std::nullopt;
        e = std::stoi(ex);
      }
      m[v] = static_cast<uint8_t>(m[v] + e);
      if (i < s.size() && s[i] == '*') ++i;
    }
    Poly<K> term = Poly<K>::constant(rank, c);
    for (int v = 0; v < rank; ++v)
      for (int e = 0; e < m[v]; ++e) term = term * Poly<K>::var(rank, v);
    out += term;
    skip_ws();
    if (i >= s.size()) break;
  }
  return out;
}

// Action of a realization matrix on a polynomial: column j of `a` holds the
// coordinates of the image of x_j in the basis {x_i}.
template <ScalarField K>
Poly<K> act_matrix(const IntMatrix& a, const Poly<K>& f) {
  int rank = f.rank();
  if (a.dim() != rank) throw TheoryError("action matrix rank mismatch");
  std::vector<Poly<K>> images;
  images.reserve(rank);
  for (int j = 0; j < rank; ++j) {
    Poly<K> img(rank);
    for (int i = 0; i < rank; ++i) {
      long long e = a.at(i, j);
      if (e == 0) continue;
      img += Poly<K>::var(rank, i) * K::from_int(e);
    }
    images.push_back(std::move(img));
  }
  return f.substitute(images);
}

// Splits f = f_plus + x_s * d_s(f) with both parts s-invariant; d_s is half
// the classical divided difference, matching p -> (p+s.p)/2 + (p-s.p)/2.
template <ScalarField K>
std::pair<Poly<K>, Poly<K>> demazure_split(const IntMatrix& refl_s, int s, const Poly<K>& f) {
  if (K::characteristic() == 2) throw TheoryError("Demazure split needs 2 invertible");
  K half = K::from_int(2).inverse();
  Poly<K> sf = act_matrix(refl_s, f);
  Poly<K> plus = (f + sf) * half;
  Poly<K> del = ((f - sf) * half).divided_by_variable(s);
  return {std::move(plus), std::move(del)};
}

}  // namespace soergel
