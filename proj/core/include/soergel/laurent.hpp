#pragma once

#include <map>
#include <sstream>
#include <string>

#include "soergel/error.hpp"

namespace soergel {

// Laurent polynomial in v with integer coefficients, Z[v, v^-1].
class LaurentInt {
 public:
  LaurentInt() = default;
  static LaurentInt constant(long long c) {
    LaurentInt p;
    p.add(0, c);
    return p;
  }
  static LaurentInt monomial(int exp, long long c = 1) {
    LaurentInt p;
    p.add(exp, c);
    return p;
  }

  bool is_zero() const { return c_.empty(); }
  long long coeff(int exp) const {
    auto it = c_.find(exp);
    return it == c_.end() ? 0 : it->second;
  }
  const std::map<int, long long>& terms() const { return c_; }

  void add(int exp, long long c) {
    if (c == 0) return;
    auto [it, fresh] = c_.try_emplace(exp, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) c_.erase(it);
    }
  }

  LaurentInt operator-() const {
    LaurentInt r;
    for (auto& [e, c] : c_) r.c_.emplace(e, -c);
    return r;
  }
  LaurentInt& operator+=(const LaurentInt& o) {
    for (auto& [e, c] : o.c_) add(e, c);
    return *this;
  }
  LaurentInt& operator-=(const LaurentInt& o) {
    for (auto& [e, c] : o.c_) add(e, -c);
    return *this;
  }
  friend LaurentInt operator+(LaurentInt a, const LaurentInt& b) { return a += b; }
  friend LaurentInt operator-(LaurentInt a, const LaurentInt& b) { return a -= b; }
  friend LaurentInt operator*(const LaurentInt& a, const LaurentInt& b) {
    LaurentInt r;
    for (auto& [ea, ca] : a.c_)
      for (auto& [eb, cb] : b.c_) r.add(ea + eb, ca * cb);
    return r;
  }
  bool operator==(const LaurentInt& o) const { return c_ == o.c_; }
  bool operator!=(const LaurentInt& o) const { return c_ != o.c_; }

  // v -> v^-1
  LaurentInt bar() const {
    LaurentInt r;
    for (auto& [e, c] : c_) r.c_.emplace(-e, c);
    return r;
  }

  int min_exp() const { return is_zero() ? 0 : c_.begin()->first; }
  int max_exp() const { return is_zero() ? 0 : c_.rbegin()->first; }
  long long eval_at_one() const {
    long long s = 0;
    for (auto& [e, c] : c_) s += c;
    return s;
  }
  bool in_vZv() const { return is_zero() || min_exp() >= 1; }  // element of vZ[v]
  bool nonneg_coeffs() const {
    for (auto& [e, c] : c_)
      if (c < 0) return false;
    return true;
  }
  bool is_constant() const { return is_zero() || (c_.size() == 1 && c_.begin()->first == 0); }

  // "v^-2 + 1 + 2*v", exponents ascending.
  std::string str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [e, c] : c_) {
      long long a = c;
      if (first) {
        if (a < 0) os << "-";
      } else {
        os << (a < 0 ? " - " : " + ");
      }
      a = a < 0 ? -a : a;
      if (a != 1 || e == 0) os << a;
      if (e != 0) {
        if (a != 1) os << "*";
        os << "v";
        if (e != 1) os << "^" << e;
      }
      first = false;
    }
    return os.str();
  }

 private:
  std::map<int, long long> c_;
};

}  // namespace soergel
